#include "protodown/enrich.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <iterator>
#include <map>

#include <json.hpp>

#include "protodown/diffexpr.hpp"
#include "protodown/stats.hpp"

namespace protodown::enrich {

std::string_view to_string(Correction c) { return c == Correction::bh ? "bh" : "bonferroni"; }

std::string_view to_string(QuerySelector s) {
  switch (s) {
    case QuerySelector::up: return "up";
    case QuerySelector::down: return "down";
    case QuerySelector::union_: return "union";
  }
  return "";
}

Correction parse_correction(std::string_view text) {
  if (text == "bh" || text == "BH" || text == "fdr") return Correction::bh;
  if (text == "bonferroni") return Correction::bonferroni;
  throw ConfigError("unknown correction: " + std::string(text));
}

QuerySelector parse_selector(std::string_view text) {
  if (text == "up") return QuerySelector::up;
  if (text == "down") return QuerySelector::down;
  if (text == "union" || text == "both") return QuerySelector::union_;
  throw ConfigError("unknown enrichment query selector: " + std::string(text));
}

namespace {

std::vector<std::string> split_tabs(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto tab = line.find('\t', start);
    out.emplace_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return out;
}

std::string trim(std::string s) {
  const auto ws = " \t\r\n";
  s.erase(0, s.find_first_not_of(ws));
  auto end = s.find_last_not_of(ws);
  s.erase(end == std::string::npos ? 0 : end + 1);
  return s;
}

}  // namespace

GmtResult parse_gmt(std::string_view bytes) {
  if (bytes.size() >= 3 && bytes.substr(0, 3) == "\xEF\xBB\xBF") bytes.remove_prefix(3);
  GmtResult out;
  std::set<std::string> seen_ids;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < bytes.size()) {
    auto nl = bytes.find('\n', start);
    std::string_view line = bytes.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
    start = nl == std::string_view::npos ? bytes.size() : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

    auto fields = split_tabs(line);
    if (fields.size() < 3) {
      out.warnings.push_back("line " + std::to_string(line_no) + ": fewer than 3 fields, skipped");
      continue;
    }
    AnnotationSet set;
    set.term_id = trim(fields[0]);
    if (set.term_id.empty()) {
      out.warnings.push_back("line " + std::to_string(line_no) + ": empty term id, skipped");
      continue;
    }
    std::string desc = trim(fields[1]);
    if (auto bar = desc.find('|'); bar != std::string::npos) {
      set.source = desc.substr(0, bar);
      set.term_name = desc.substr(bar + 1);
    } else {
      auto colon = set.term_id.find(':');
      set.source = colon == std::string::npos ? "GMT" : set.term_id.substr(0, colon);
      set.term_name = desc;
    }
    std::set<std::string> members;
    for (std::size_t i = 2; i < fields.size(); ++i) {
      auto m = trim(fields[i]);
      if (!m.empty()) members.insert(m);
    }
    if (members.empty()) {
      out.warnings.push_back("line " + std::to_string(line_no) + ": term " + set.term_id + " has no members, dropped");
      continue;
    }
    if (!seen_ids.insert(set.term_id).second) {
      out.warnings.push_back("line " + std::to_string(line_no) + ": duplicate term " + set.term_id + ", skipped");
      continue;
    }
    set.members.assign(members.begin(), members.end());
    out.sets.push_back(std::move(set));
  }
  if (out.sets.empty()) throw FormatError("no usable annotation sets in GMT input");
  return out;
}

namespace {

double log_choose(double n, double k) { return std::lgamma(n + 1) - std::lgamma(k + 1) - std::lgamma(n - k + 1); }

}  // namespace

double hypergeometric_upper_tail(std::size_t k, std::size_t N, std::size_t K, std::size_t n) {
  if (K > N || n > N) throw ValidationError("hypergeometric: K and n must not exceed N");
  const std::size_t lo = n + K > N ? n + K - N : 0;
  const std::size_t hi = std::min(n, K);
  if (k <= lo) return 1.0;
  if (k > hi) return 0.0;
  const double total = log_choose(static_cast<double>(N), static_cast<double>(n));
  std::vector<double> terms;
  for (std::size_t j = k; j <= hi; ++j) {
    terms.push_back(log_choose(static_cast<double>(K), static_cast<double>(j)) +
                    log_choose(static_cast<double>(N - K), static_cast<double>(n - j)) - total);
  }
  const double peak = *std::max_element(terms.begin(), terms.end());
  double sum = 0.0;
  for (double t : terms) sum += std::exp(t - peak);
  const double p = std::exp(peak + std::log(sum));
  return std::clamp(p, std::numeric_limits<double>::min(), 1.0);
}

OraResult ora(const std::set<std::string>& query, const std::set<std::string>& universe,
              const std::vector<AnnotationSet>& sets, const OraOptions& options) {
  if (universe.empty()) throw PreconditionError("enrichment universe is empty");
  if (query.empty()) throw PreconditionError("enrichment query is empty");
  if (options.min_size > options.max_size) throw ConfigError("min_size exceeds max_size");
  if (!(options.sig_threshold > 0.0 && options.sig_threshold <= 1.0)) {
    throw ConfigError("significance threshold must be in (0, 1]");
  }
  OraResult out;
  std::vector<std::string> q;
  std::size_t dropped = 0;
  for (const auto& id : query) {
    if (universe.count(id)) q.push_back(id);
    else ++dropped;
  }
  if (dropped) out.warnings.push_back(std::to_string(dropped) + " query ids outside the universe dropped");
  if (q.empty()) throw PreconditionError("no query ids inside the universe");

  const std::size_t N = universe.size();
  const std::size_t n = q.size();
  for (const auto& set : sets) {
    std::vector<std::string> in_universe;
    for (const auto& m : set.members) {
      if (universe.count(m)) in_universe.push_back(m);
    }
    const std::size_t K = in_universe.size();
    if (K < options.min_size || K > options.max_size) continue;
    EnrichmentRow row;
    row.term_id = set.term_id;
    row.term_name = set.term_name;
    row.source = set.source;
    std::set_intersection(q.begin(), q.end(), in_universe.begin(), in_universe.end(),
                          std::back_inserter(row.overlap_ids));
    row.k = row.overlap_ids.size();
    row.n = n;
    row.K = K;
    row.N = N;
    row.p = hypergeometric_upper_tail(row.k, N, K, n);
    out.rows.push_back(std::move(row));
  }
  if (out.rows.empty()) {
    out.warnings.push_back("no annotation set within the size limits");
    return out;
  }

  const double m = static_cast<double>(out.rows.size());
  if (options.correction == Correction::bonferroni) {
    for (auto& r : out.rows) r.p_adj = std::min(1.0, r.p * m);
  } else {
    std::vector<double> p;
    for (const auto& r : out.rows) p.push_back(r.p);
    auto adj = diffexpr::bh_adjust(p);
    for (std::size_t i = 0; i < adj.size(); ++i) out.rows[i].p_adj = std::max(adj[i], out.rows[i].p);
  }
  for (auto& r : out.rows) r.significant = r.p_adj <= options.sig_threshold;
  std::sort(out.rows.begin(), out.rows.end(), [](const EnrichmentRow& a, const EnrichmentRow& b) {
    if (a.p != b.p) return a.p < b.p;
    return a.term_id < b.term_id;
  });
  return out;
}

double neg_log10(double p) { return -std::log10(std::max(p, std::numeric_limits<double>::min())); }

EnrichPlots enrich_plot_data(const std::vector<EnrichmentRow>& rows, int top_n, int font_size, std::string title) {
  if (top_n < 1) throw ConfigError("top_n must be at least 1");
  if (font_size < 1) throw ConfigError("font_size must be at least 1");
  EnrichPlots out;
  out.font_size = font_size;
  out.title = std::move(title);
  const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(top_n), rows.size());

  for (std::size_t i = 0; i < take; ++i) {
    const auto& r = rows[i];
    out.dot.push_back({r.term_id, r.term_name, r.source, r.n ? static_cast<double>(r.k) / static_cast<double>(r.n) : 0.0,
                       static_cast<double>(r.k), neg_log10(r.p_adj)});
  }

  std::vector<const EnrichmentRow*> by_adj;
  for (const auto& r : rows) by_adj.push_back(&r);
  std::stable_sort(by_adj.begin(), by_adj.end(), [](const EnrichmentRow* a, const EnrichmentRow* b) {
    if (a->p_adj != b->p_adj) return a->p_adj < b->p_adj;
    return a->term_id < b->term_id;
  });
  by_adj.resize(take);
  std::stable_sort(by_adj.begin(), by_adj.end(),
                   [](const EnrichmentRow* a, const EnrichmentRow* b) { return a->source < b->source; });
  for (const auto* r : by_adj) out.bar.push_back({r->term_id, r->term_name, r->source, neg_log10(r->p_adj)});

  std::vector<const EnrichmentRow*> all;
  for (const auto& r : rows) all.push_back(&r);
  std::sort(all.begin(), all.end(), [](const EnrichmentRow* a, const EnrichmentRow* b) {
    if (a->source != b->source) return a->source < b->source;
    return a->term_id < b->term_id;
  });
  for (std::size_t i = 0; i < all.size(); ++i) {
    const auto* r = all[i];
    out.manhattan.push_back(
        {r->term_id, r->term_name, r->source, static_cast<double>(i), neg_log10(r->p_adj), r->significant});
  }
  return out;
}

std::string export_table(const std::vector<EnrichmentRow>& rows) {
  using diffexpr::csv_field;
  using diffexpr::format_double;
  std::string out = "source,term_id,term_name,k,n,K,N,p,p_adj,significant,overlap_ids\n";
  for (const auto& r : rows) {
    std::string overlap;
    for (const auto& id : r.overlap_ids) overlap += (overlap.empty() ? "" : ";") + id;
    out += csv_field(r.source) + ',' + csv_field(r.term_id) + ',' + csv_field(r.term_name) + ',' +
           std::to_string(r.k) + ',' + std::to_string(r.n) + ',' + std::to_string(r.K) + ',' + std::to_string(r.N) +
           ',' + format_double(r.p) + ',' + format_double(r.p_adj) + ',' + (r.significant ? "true" : "false") + ',' +
           csv_field(overlap) + '\n';
  }
  return out;
}

std::vector<EnrichmentRow> remote_profile(const std::vector<std::string>& query, const RemoteOptions& options,
                                          transport::Transport& transport) {
  using nlohmann::json;
  if (query.empty()) throw PreconditionError("enrichment query is empty");
  if (options.organism.empty()) throw ConfigError("organism code is empty");

  transport::Request req;
  req.path = options.path;
  req.encoding = transport::BodyEncoding::json;
  std::string joined;
  for (const auto& id : query) joined += (joined.empty() ? "" : "\n") + id;
  req.fields = {{"organism", options.organism},
                {"query", joined},
                {"user_threshold", diffexpr::format_double(options.threshold)}};
  req.list_fields = {"query"};
  req.number_fields = {"user_threshold"};
  const auto res = transport.post(req);

  std::vector<EnrichmentRow> rows;
  try {
    const auto doc = json::parse(res.body);
    for (const auto& item : doc.at("result")) {
      EnrichmentRow r;
      r.term_id = item.at("native").get<std::string>();
      r.term_name = item.value("name", std::string());
      r.source = item.value("source", std::string());
      r.k = item.at("intersection_size").get<std::size_t>();
      r.n = item.at("query_size").get<std::size_t>();
      r.K = item.at("term_size").get<std::size_t>();
      r.N = item.at("effective_domain_size").get<std::size_t>();
      // the service reports only its own corrected p-value
      r.p = item.at("p_value").get<double>();
      r.p_adj = r.p;
      r.significant = item.value("significant", r.p_adj <= options.threshold);
      if (item.contains("intersections") && item["intersections"].is_array()) {
        const auto& inter = item["intersections"];
        for (std::size_t i = 0; i < inter.size() && i < query.size(); ++i) {
          if (inter[i].is_array() && !inter[i].empty()) r.overlap_ids.push_back(query[i]);
        }
      }
      if (r.k > std::min(r.n, r.K) || !(r.p > 0.0 && r.p <= 1.0)) {
        throw TransportError(TransportFailure::malformed_body,
                             "enrichment response row violates count or p-value bounds: " + r.term_id);
      }
      rows.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw TransportError(TransportFailure::malformed_body,
                         std::string("malformed enrichment response: ") + e.what());
  }
  std::sort(rows.begin(), rows.end(), [](const EnrichmentRow& a, const EnrichmentRow& b) {
    if (a.p != b.p) return a.p < b.p;
    return a.term_id < b.term_id;
  });
  return rows;
}

}  // namespace protodown::enrich
