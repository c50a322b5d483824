#include "protodown/ppi.hpp"

#include <cmath>
#include <cstdlib>
#include <future>
#include <set>

#include <json.hpp>

namespace protodown::ppi {

using nlohmann::json;

PpiConfig PpiConfig::from_env() {
  PpiConfig cfg;
  if (const char* base = std::getenv("PROTODOWN_STRING_BASE"); base && *base) cfg.endpoint_base = base;
  return cfg;
}

void PpiConfig::validate() const {
  if (taxon_id <= 0) throw ConfigError("taxon id must be a positive integer");
  if (required_score < 0 || required_score > 1000) throw ConfigError("required score must be within 0-1000");
  if (!(timeout_s > 0.0)) throw ConfigError("timeout must be positive");
  if (endpoint_base.empty() && !offline_fixture) throw ConfigError("no STRING endpoint configured");
}

void PpiNetwork::check(int required_score) const {
  std::set<std::string> ids;
  for (const auto& n : nodes) ids.insert(n.resolved_id);
  std::set<std::pair<std::string, std::string>> pairs;
  for (const auto& e : edges) {
    if (!ids.count(e.node_a) || !ids.count(e.node_b)) throw StateError("edge endpoint missing from nodes");
    if (e.node_a == e.node_b) throw StateError("self-edge in network");
    if (e.combined_score < required_score || e.combined_score > 1000) throw StateError("edge score out of range");
    if (!pairs.insert(std::minmax(e.node_a, e.node_b)).second) throw StateError("duplicate undirected edge");
  }
}

int scale_score(double raw) {
  const double x = raw <= 1.0 ? raw * 1000.0 : raw;
  // tolerance absorbs binary representation error of decimal halves
  return static_cast<int>(std::floor(x + 0.5 + 1e-9));
}

namespace {

std::string join_lines(const std::vector<std::string>& ids) {
  std::string out;
  for (const auto& id : ids) out += (out.empty() ? "" : "\n") + id;
  return out;
}

json parse_body(const std::string& body, const char* what) {
  try {
    auto doc = json::parse(body);
    if (!doc.is_array()) throw TransportError(TransportFailure::malformed_body, std::string(what) + ": expected a JSON array");
    return doc;
  } catch (const json::exception& e) {
    throw TransportError(TransportFailure::malformed_body, std::string(what) + ": " + e.what());
  }
}

std::string string_field(const json& item, const char* key) {
  auto it = item.find(key);
  if (it == item.end() || !it->is_string()) return {};
  return it->get<std::string>();
}

}  // namespace

Resolution resolve_ids(const std::vector<std::string>& ids, const PpiConfig& cfg, transport::Transport& transport) {
  cfg.validate();
  std::vector<std::string> unique;
  std::set<std::string> seen;
  for (const auto& id : ids) {
    if (!id.empty() && seen.insert(id).second) unique.push_back(id);
  }
  if (unique.empty()) throw PreconditionError("no identifiers to resolve");

  transport::Request req;
  req.path = "/api/json/get_string_ids";
  req.fields = {{"identifiers", join_lines(unique)}, {"species", std::to_string(cfg.taxon_id)}};
  const auto doc = parse_body(transport.post(req).body, "identifier mapping response");

  std::map<std::string, Node> first;
  for (const auto& item : doc) {
    if (!item.is_object()) continue;
    std::string query = string_field(item, "queryItem");
    if (auto qi = item.find("queryIndex"); qi != item.end() && qi->is_number_integer()) {
      auto idx = qi->get<long long>();
      if (idx >= 0 && static_cast<std::size_t>(idx) < unique.size()) query = unique[static_cast<std::size_t>(idx)];
    }
    const auto sid = string_field(item, "stringId");
    if (query.empty() || sid.empty() || !seen.count(query) || first.count(query)) continue;
    first[query] = {query, sid, string_field(item, "preferredName")};
  }

  Resolution out;
  std::set<std::string> taken;
  for (const auto& id : unique) {
    auto it = first.find(id);
    if (it == first.end()) {
      out.unresolved.push_back(id);
    } else if (taken.insert(it->second.resolved_id).second) {
      out.resolved.push_back(it->second);
    }
  }
  return out;
}

PpiNetwork fetch_network(const Resolution& resolved, const PpiConfig& cfg, transport::Transport& transport) {
  cfg.validate();
  if (resolved.resolved.size() < 2) {
    throw PreconditionError("a network needs at least two resolved proteins");
  }
  std::vector<std::string> ids;
  for (const auto& n : resolved.resolved) ids.push_back(n.resolved_id);

  transport::Request req;
  req.path = "/api/json/network";
  req.fields = {{"identifiers", join_lines(ids)},
                {"species", std::to_string(cfg.taxon_id)},
                {"required_score", std::to_string(cfg.required_score)}};
  const auto doc = parse_body(transport.post(req).body, "network response");

  PpiNetwork net;
  net.nodes = resolved.resolved;
  net.unresolved_ids = resolved.unresolved;
  const std::set<std::string> known(ids.begin(), ids.end());
  std::set<std::pair<std::string, std::string>> pairs;
  std::size_t dropped = 0;
  for (const auto& item : doc) {
    if (!item.is_object()) {
      ++dropped;
      continue;
    }
    Edge e;
    e.node_a = string_field(item, "stringId_A");
    e.node_b = string_field(item, "stringId_B");
    auto score = item.find("score");
    if (score == item.end() || !score->is_number()) {
      ++dropped;
      continue;
    }
    const double raw = score->get<double>();
    if (!std::isfinite(raw) || raw < 0.0) {
      ++dropped;
      continue;
    }
    e.combined_score = scale_score(raw);
    if (e.combined_score > 1000 || e.combined_score < cfg.required_score || e.node_a == e.node_b ||
        !known.count(e.node_a) || !known.count(e.node_b)) {
      ++dropped;
      continue;
    }
    if (!pairs.insert(std::minmax(e.node_a, e.node_b)).second) {
      ++dropped;
      continue;
    }
    for (const auto& [key, value] : item.items()) {
      if (key != "score" && key.size() > 5 && key.ends_with("score") && value.is_number()) {
        e.sub_scores[key] = value.get<double>();
      }
    }
    net.edges.push_back(std::move(e));
  }
  if (dropped) net.notices.push_back(std::to_string(dropped) + " response rows filtered");
  net.check(cfg.required_score);
  return net;
}

PpiNetwork network_for(const std::vector<std::string>& ids, const PpiConfig& cfg, transport::Transport& transport) {
  PpiNetwork net;
  if (ids.empty()) {
    net.notices.push_back("no proteins in this set; no network requested");
    return net;
  }
  auto res = resolve_ids(ids, cfg, transport);
  if (res.resolved.size() < 2) {
    net.nodes = res.resolved;
    net.unresolved_ids = res.unresolved;
    net.notices.push_back("fewer than two proteins resolved; no network requested");
    return net;
  }
  return fetch_network(res, cfg, transport);
}

std::vector<std::string> up_set(const std::vector<diffexpr::DiffRow>& rows, bool include_exclusives) {
  std::vector<std::string> out;
  for (const auto& r : rows) {
    if (r.status == diffexpr::Status::up || (include_exclusives && r.status == diffexpr::Status::exclusive_a)) {
      out.push_back(r.protein_id);
    }
  }
  return out;
}

std::vector<std::string> down_set(const std::vector<diffexpr::DiffRow>& rows, bool include_exclusives) {
  std::vector<std::string> out;
  for (const auto& r : rows) {
    if (r.status == diffexpr::Status::down || (include_exclusives && r.status == diffexpr::Status::exclusive_b)) {
      out.push_back(r.protein_id);
    }
  }
  return out;
}

namespace {

PpiNetwork tagged(const std::string& name, const std::vector<std::string>& ids, const PpiConfig& cfg,
                  transport::Transport& transport) {
  try {
    return network_for(ids, cfg, transport);
  } catch (const TransportError& e) {
    throw TransportError(e.failure(), name + " set: " + e.what(), e.status());
  } catch (const Error& e) {
    throw Error(e.code(), name + " set: " + e.what(), e.detail());
  }
}

}  // namespace

DiffNetworks networks_for_diff(const std::vector<diffexpr::DiffRow>& rows, const PpiConfig& cfg,
                               transport::Transport& transport) {
  cfg.validate();
  const auto up_ids = up_set(rows, cfg.include_exclusives);
  const auto down_ids = down_set(rows, cfg.include_exclusives);
  auto up = std::async(std::launch::async, [&] { return tagged("up", up_ids, cfg, transport); });
  auto down = std::async(std::launch::async, [&] { return tagged("down", down_ids, cfg, transport); });
  DiffNetworks out;
  // both futures are drained before an error propagates
  std::exception_ptr err;
  try {
    out.up = up.get();
  } catch (...) {
    err = std::current_exception();
  }
  try {
    out.down = down.get();
  } catch (...) {
    if (!err) err = std::current_exception();
  }
  if (err) std::rethrow_exception(err);
  return out;
}

std::shared_ptr<transport::Transport> make_transport(const PpiConfig& cfg) {
  if (cfg.offline_fixture) return transport::FixtureTransport::from_file(*cfg.offline_fixture);
  return std::make_shared<transport::HttpTransport>(cfg.endpoint_base, cfg.timeout_s);
}

std::string to_json(const PpiNetwork& net) {
  json nodes = json::array();
  for (const auto& n : net.nodes) {
    nodes.push_back({{"query_id", n.query_id}, {"resolved_id", n.resolved_id}, {"preferred_name", n.preferred_name}});
  }
  json edges = json::array();
  for (const auto& e : net.edges) {
    json sub = json::object();
    for (const auto& [k, v] : e.sub_scores) sub[k] = v;
    edges.push_back({{"node_a", e.node_a}, {"node_b", e.node_b}, {"combined_score", e.combined_score}, {"sub_scores", sub}});
  }
  json doc = {{"nodes", nodes}, {"edges", edges}, {"unresolved_ids", net.unresolved_ids}, {"notices", net.notices}};
  return doc.dump(2) + "\n";
}

}  // namespace protodown::ppi
