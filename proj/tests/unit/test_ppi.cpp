#include <doctest.h>

#include <set>

#include "oracles.hpp"
#include "ppi_check.hpp"
#include "protodown/ppi.hpp"

using namespace protodown;
using namespace protodown::ppi;

namespace {

std::string fixture_path(const std::string& name) { return std::string(PROTODOWN_FIXTURES) + "/" + name; }

std::vector<std::string> ids(int n) {
  std::vector<std::string> out;
  for (int i = 1; i <= n; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "P%05d", i);
    out.push_back(buf);
  }
  return out;
}

PpiConfig cfg(int score) {
  PpiConfig c;
  c.required_score = score;
  return c;
}

diffexpr::DiffRow row(const std::string& id, diffexpr::Status s) {
  diffexpr::DiffRow r;
  r.protein_id = id;
  r.status = s;
  return r;
}

}  // namespace

TEST_CASE("score scaling rounds half up") {
  CHECK(scale_score(0.7) == 700);
  CHECK(scale_score(0.4995) == 500);
  CHECK(scale_score(0.4994) == 499);
  CHECK(scale_score(1.0) == 1000);
  CHECK(scale_score(750) == 750);
  CHECK(scale_score(0.0) == 0);
}

TEST_CASE("basic network keeps edges at or above the threshold") {
  auto t = transport::FixtureTransport::from_file(fixture_path("string_basic.json"));
  auto net = network_for(ids(10), cfg(700), *t);
  CHECK(net.nodes.size() == 8);
  CHECK(net.unresolved_ids == std::vector<std::string>{"P00004", "P00009"});
  CHECK(net.edges.size() == 12);
  for (const auto& e : net.edges) {
    CHECK(e.combined_score >= 700);
    CHECK(e.sub_scores.at("escore") == doctest::Approx(0.5));
  }
  CHECK(oracle::ppi_violations(net, 700).empty());
  REQUIRE(net.notices.size() == 1);
  CHECK(net.notices[0].find("3 response rows") != std::string::npos);
  CHECK(t->calls() == 2);
}

TEST_CASE("resolution drops duplicates and keeps input order") {
  auto t = transport::FixtureTransport::from_file(fixture_path("string_basic.json"));
  auto with_dups = ids(10);
  with_dups.insert(with_dups.begin() + 3, "P00001");
  with_dups.push_back("");
  auto res = resolve_ids(with_dups, cfg(700), *t);
  REQUIRE(res.resolved.size() == 8);
  CHECK(res.resolved[0].query_id == "P00001");
  CHECK(res.resolved[0].preferred_name == "GENE1");
  CHECK(res.resolved[3].query_id == "P00005");
}

TEST_CASE("adversarial responses cannot break network invariants") {
  auto t = transport::FixtureTransport::from_file(fixture_path("string_adversarial.json"));
  auto net = network_for({"Q1", "Q2", "Q3", "Q4", "Q5", "Q6"}, cfg(500), *t);
  std::set<std::string> nodes;
  for (const auto& n : net.nodes) nodes.insert(n.resolved_id);
  CHECK(nodes == std::set<std::string>{"9606.A", "9606.B", "9606.C", "9606.E"});
  CHECK(net.unresolved_ids == std::vector<std::string>{"Q6"});
  CHECK(net.edges.size() == 4);
  CHECK(oracle::ppi_violations(net, 500).empty());
  CHECK_NOTHROW(net.check(500));
  bool half = false;
  for (const auto& e : net.edges) half = half || (e.node_a == "9606.C" && e.node_b == "9606.E" && e.combined_score == 500);
  CHECK(half);
}

TEST_CASE("the checker and the built-in invariant agree on broken networks") {
  PpiNetwork bad;
  bad.nodes = {{"q1", "A", "a"}, {"q2", "B", "b"}};
  bad.edges = {{"A", "B", 800, {}}, {"B", "A", 900, {}}};
  CHECK_FALSE(oracle::ppi_violations(bad, 400).empty());
  CHECK_THROWS_AS(bad.check(400), StateError);
  bad.edges = {{"A", "C", 800, {}}};
  CHECK_THROWS_AS(bad.check(400), StateError);
  bad.edges = {{"A", "A", 800, {}}};
  CHECK_THROWS_AS(bad.check(400), StateError);
  bad.edges = {{"A", "B", 300, {}}};
  CHECK_THROWS_AS(bad.check(400), StateError);
}

TEST_CASE("small sets give notices instead of requests") {
  auto t = transport::FixtureTransport::from_file(fixture_path("string_basic.json"));
  auto empty = network_for({}, cfg(700), *t);
  CHECK(empty.nodes.empty());
  CHECK(empty.edges.empty());
  CHECK(empty.notices.size() == 1);
  CHECK(t->calls() == 0);
  CHECK_THROWS_AS(resolve_ids({}, cfg(700), *t), PreconditionError);

  Resolution one;
  one.resolved = {{"P00001", "9606.ENSP00000001", "GENE1"}};
  CHECK_THROWS_AS(fetch_network(one, cfg(700), *t), PreconditionError);
}

TEST_CASE("configuration is validated") {
  auto c = cfg(400);
  c.required_score = 1001;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.required_score = 400;
  c.taxon_id = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.taxon_id = 9606;
  c.endpoint_base.clear();
  CHECK_THROWS_AS(c.validate(), ConfigError);  // neither endpoint nor fixture
  c.offline_fixture = "x.json";
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("up and down networks are disjoint and named in errors") {
  std::vector<diffexpr::DiffRow> rows;
  for (const auto& id : ids(10)) rows.push_back(row(id, diffexpr::Status::up));
  rows.push_back(row("D1", diffexpr::Status::not_significant));
  auto t = transport::FixtureTransport::from_file(fixture_path("string_basic.json"));
  auto nets = networks_for_diff(rows, cfg(700), *t);
  CHECK(nets.up.nodes.size() == 8);
  CHECK(nets.down.nodes.empty());
  CHECK(nets.down.notices.size() == 1);

  auto up = up_set(rows, true), down = down_set(rows, true);
  for (const auto& u : up) CHECK(std::find(down.begin(), down.end(), u) == down.end());

  rows.push_back(row("D2", diffexpr::Status::down));
  rows.push_back(row("D3", diffexpr::Status::exclusive_b));
  CHECK(down_set(rows, true).size() == 2);
  CHECK(down_set(rows, false).size() == 1);
  try {
    networks_for_diff(rows, cfg(700), *t);
    FAIL("expected a transport error");
  } catch (const TransportError& e) {
    CHECK(e.failure() == TransportFailure::no_fixture);
    CHECK(std::string(e.what()).rfind("down set:", 0) == 0);
  }
}

TEST_CASE("network json is byte-deterministic") {
  auto t = transport::FixtureTransport::from_file(fixture_path("string_basic.json"));
  const auto a = to_json(network_for(ids(10), cfg(700), *t));
  const auto b = to_json(network_for(ids(10), cfg(700), *t));
  CHECK(a == b);
  CHECK(a.find("\"combined_score\"") != std::string::npos);
}

TEST_CASE("transport failures surface typed errors") {
  auto t = transport::FixtureTransport::from_json_text(R"({"responses":[
    {"path":"/api/json/get_string_ids","fields":{"identifiers":"A\nB","species":"9606"},"timeout":true},
    {"path":"/api/json/get_string_ids","fields":{"identifiers":"C\nD","species":"9606"},"status":503,"body":""},
    {"path":"/api/json/get_string_ids","fields":{"identifiers":"E\nF","species":"9606"},"body":"not json"},
    {"path":"/api/json/get_string_ids","fields":{"identifiers":"G\nH","species":"9606"},"body":{"an":"object"}}]})");
  auto failure = [&](std::vector<std::string> q) {
    try {
      resolve_ids(q, cfg(400), *t);
    } catch (const TransportError& e) {
      return e.failure();
    }
    return TransportFailure::connection;
  };
  CHECK(failure({"A", "B"}) == TransportFailure::timeout);
  CHECK(failure({"C", "D"}) == TransportFailure::http_status);
  CHECK(failure({"E", "F"}) == TransportFailure::malformed_body);
  CHECK(failure({"G", "H"}) == TransportFailure::malformed_body);
}
