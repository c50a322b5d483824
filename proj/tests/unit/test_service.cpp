#include <doctest.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <thread>

#include "oracles.hpp"
#include "ppi_check.hpp"
#include "ppi_fixture.hpp"
#include "protodown/service.hpp"
#include "sim.hpp"

using namespace protodown;
using namespace protodown::service;
namespace fs = std::filesystem;

namespace {

std::string fixture(const std::string& name) { return oracle::read_file(std::string(PROTODOWN_FIXTURES) + "/" + name); }

Inputs maxquant_inputs() {
  Inputs in;
  in.main = fixture("maxquant_proteinGroups.txt");
  return in;
}

Inputs spike_inputs(std::uint64_t seed = 11) {
  Inputs in;
  in.main = sim::spike_in(seed).maxquant;
  return in;
}

void configure(Session& s) {
  s.update(Section::design, {{"groups", "ctrl=^ctrl;trt=^trt"}});
  s.update(Section::test, {{"comparison", "trt:ctrl"}});
}

std::vector<std::string> names(const std::vector<Stage>& v) {
  std::vector<std::string> out;
  for (auto s : v) out.emplace_back(to_string(s));
  return out;
}

fs::path temp_dir(const std::string& tag) {
  auto p = fs::temp_directory_path() / ("protodown_" + tag + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("sessions need a design and a comparison before results") {
  SessionStore store;
  auto s = store.create(maxquant_inputs());
  CHECK(s->id().size() == 32);
  CHECK(s->summary().at("columns") == 4);
  CHECK_THROWS_AS(s->payload("diff_table"), StateError);
  CHECK_THROWS_AS(s->payload("venn"), StateError);
  s->update(Section::design, {{"groups", "ctrl=^ctrl;trt=^trt"}});
  CHECK_NOTHROW(s->payload("venn"));
  CHECK_THROWS_AS(s->payload("diff_table"), StateError);
  s->update(Section::test, {{"comparison", "trt:ctrl"}});
  const auto env = serialize::parse(s->payload("diff_table"));
  CHECK(env.at("schema_version") == kSchemaVersion);
  CHECK(env.at("artifact") == "diff_table");
  CHECK(env.at("stage") == "diffexpr");
  CHECK(env.at("stage_hash") == s->stage_hashes().at(Stage::diffexpr));
  CHECK(env.at("data").at("rows").is_array());
  CHECK(store.get(s->id()) == s);
  store.remove(s->id());
  CHECK_THROWS_AS(store.get(s->id()), NotFoundError);
  CHECK_THROWS_AS(store.remove(s->id()), NotFoundError);
}

TEST_CASE("parameter changes invalidate exactly the downstream stages") {
  Session s("x", maxquant_inputs(), {});
  configure(s);
  auto r = s.update(Section::preprocess, {{"normalization", "mean"}});
  CHECK(names(r.invalidated) == std::vector<std::string>{"preprocess", "qc", "diffexpr", "enrich", "ppi"});
  CHECK(r.recomputed.empty());
  r = s.update(Section::test, {{"fc_threshold", 0.5}});
  CHECK(names(r.invalidated) == std::vector<std::string>{"diffexpr", "enrich", "ppi"});
  r = s.update(Section::test, {{"fc_threshold", 0.5}});
  CHECK(r.invalidated.empty());
  r = s.update(Section::enrich, {{"gmt", fixture("sets.gmt")}});
  CHECK(names(r.invalidated) == std::vector<std::string>{"enrich"});
  r = s.update(Section::ppi, {{"taxon_id", 9606}, {"offline_fixture", "/nonexistent.json"}});
  CHECK(names(r.invalidated) == std::vector<std::string>{"ppi"});
  CHECK(r.to_json().at("invalidated")[0] == "ppi");
}

TEST_CASE("updates are all-or-nothing") {
  Session s("x", maxquant_inputs(), {});
  configure(s);
  const auto before = s.stage_hashes();
  const auto params = s.params();
  CHECK_THROWS_AS(s.update(Section::preprocess, {{"normalization", "mean"}, {"knn_k", "x"}}), ValidationError);
  CHECK_THROWS_AS(s.update(Section::preprocess, {{"normalization", "mean"}, {"nope", 1}}), ValidationError);
  CHECK_THROWS_AS(s.update(Section::test, {{"comparison", "trt:nothere"}}), Error);
  CHECK_THROWS_AS(s.update(Section::design, {{"groups", "ctrl=^ctrl;other=^trt"}}), DesignError);
  CHECK_THROWS_AS(s.update(Section::enrich, {{"top_n", -1}}), ValidationError);
  CHECK(s.stage_hashes() == before);
  CHECK(s.params().preprocess == params.preprocess);
  CHECK(s.params().test == params.test);
  CHECK(s.params().design == params.design);
  CHECK_FALSE(s.params().enrich.has_value());
  CHECK_THROWS_AS(parse_section("bogus"), NotFoundError);
}

TEST_CASE("artifact and export errors are typed") {
  Session s("x", maxquant_inputs(), {});
  configure(s);
  CHECK_THROWS_AS(s.payload("nope"), NotFoundError);
  CHECK_THROWS_AS(s.export_artifact("volcano", "csv"), UnsupportedError);
  CHECK_THROWS_AS(s.export_artifact("diff_table", "svg"), UnsupportedError);
  CHECK_THROWS_AS(s.export_artifact("ppi.up", "png"), UnsupportedError);
  CHECK_THROWS_AS(s.export_artifact("volcano", "pdf"), ValidationError);
  CHECK_THROWS_AS(s.payload("qc.boxplot", {{"bogus", "1"}}), ValidationError);
  CHECK_THROWS_AS(s.payload("qc.qq", {{"column", "nope"}}), NotFoundError);
  CHECK_THROWS_AS(s.payload("qc.boxplot", {{"stage", "raw"}}), ValidationError);
  CHECK_THROWS_AS(s.payload("enrichment.table"), StateError);
  CHECK_THROWS_AS(s.payload("ppi.up"), StateError);
}

TEST_CASE("exports and payloads agree and repeat byte for byte") {
  Session s("x", spike_inputs(), {});
  configure(s);
  const auto csv = s.export_artifact("diff_table", "csv");
  CHECK(csv.media_type == "text/csv");
  CHECK(csv.filename == "diff_table.csv");
  const auto rows = diffexpr::parse_table(csv.body);
  const auto env = serialize::parse(s.payload("diff_table"));
  REQUIRE(rows.size() == env.at("data").at("rows").size());
  // the table leaves out the standard error
  std::size_t mismatched = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto got = serialize::to_json(rows[i]);
    auto want = env.at("data").at("rows")[i];
    got.erase("se");
    want.erase("se");
    mismatched += got != want;
  }
  CHECK(mismatched == 0);
  CHECK(s.payload("diff_table") == s.payload("diff_table"));

  for (const char* a : {"volcano", "heatmap", "venn", "qc.boxplot", "qc.histogram", "qc.qq", "qc.imputation_overlay",
                        "qc.dispersion", "qc.scatter", "qc.correlation", "qc.pca"}) {
    INFO(a);
    const auto svg = s.export_artifact(a, "svg");
    CHECK(svg.body.rfind("<?xml", 0) == 0);
    CHECK(svg.media_type == "image/svg+xml");
    CHECK(s.export_artifact(a, "svg").body == svg.body);
    CHECK(serialize::parse(s.payload(a)).at("data").is_object());
  }
  const auto png = s.export_artifact("volcano", "png");
  CHECK(png.body.substr(1, 3) == "PNG");
  CHECK(png.filename == "volcano.png");

  const auto scatter = serialize::parse(s.payload("qc.scatter", {{"x", "trt_1"}, {"y", "trt_2"}}));
  CHECK(scatter.at("data").dump().find("trt_2") != std::string::npos);
}

TEST_CASE("enrichment and networks run through the session") {
  const auto spike = sim::spike_in(11);
  Session s("x", spike_inputs(), {});
  configure(s);
  // raw p keeps enough spiked rows in the query for a clear overlap
  s.update(Section::test, {{"comparison", "trt:ctrl"}, {"use_adjusted", false}, {"fc_threshold", 0.58}});
  std::string gmt = "SPIKE\tspiked rows";
  for (std::size_t i = 0; i < spike.ids.size(); ++i)
    if (spike.spiked[i]) gmt += "\t" + spike.ids[i];
  gmt += "\nNOISE\tunspiked rows";
  for (std::size_t i = 0; i < 60; ++i)
    if (!spike.spiked[i]) gmt += "\t" + spike.ids[i];
  gmt += "\n";
  s.update(Section::enrich, {{"gmt", gmt}, {"selector", "up"}});
  const auto table = serialize::parse(s.payload("enrichment.table")).at("data").at("rows");
  REQUIRE(table.size() == 2);
  CHECK(table[0].at("term_id") == "SPIKE");
  CHECK(table[0].at("significant") == true);
  CHECK(s.export_artifact("enrichment.table", "csv").body.rfind("source,", 0) == 0);
  for (const char* p : {"enrichment.dot", "enrichment.bar", "enrichment.manhattan"}) {
    const auto body = s.export_artifact(p, "svg").body;
    CHECK((body.find("SPIKE") != std::string::npos || body.find("spiked rows") != std::string::npos));
  }

  const auto dir = temp_dir("svc_ppi");
  ppi::PpiConfig cfg;
  cfg.required_score = 600;
  const auto rows = diffexpr::parse_table(s.export_artifact("diff_table", "csv").body);
  nlohmann::json doc = {{"responses", oracle::ppi_responses(rows, cfg)}};
  std::ofstream(dir / "ppi.json") << doc.dump();
  s.update(Section::ppi, {{"required_score", 600}, {"offline_fixture", (dir / "ppi.json").string()}});
  const auto up = serialize::parse(s.payload("ppi.up")).at("data");
  CHECK(up.at("nodes").size() == ppi::up_set(rows, true).size());
  CHECK_FALSE(up.at("edges").empty());
  for (const auto& e : up.at("edges")) CHECK(e.at("combined_score").get<int>() >= 600);
  const auto down = serialize::parse(s.payload("ppi.down")).at("data");
  std::set<std::string> up_nodes;
  for (const auto& n : up.at("nodes")) up_nodes.insert(n.at("query_id"));
  for (const auto& n : down.at("nodes")) CHECK(up_nodes.count(n.at("query_id")) == 0);
  fs::remove_all(dir);
}

TEST_CASE("eager sessions recompute on update") {
  Options o;
  o.eager = true;
  Session s("x", maxquant_inputs(), o);
  configure(s);
  auto r = s.update(Section::preprocess, {{"normalization", "mean"}});
  CHECK(names(r.recomputed) == std::vector<std::string>{"preprocess", "qc", "diffexpr"});
}

TEST_CASE("sessions persist and restore") {
  const auto dir = temp_dir("svc_persist");
  Options o;
  o.persist_dir = dir;
  std::string id, table;
  std::map<Stage, std::string> hashes;
  {
    SessionStore store(o);
    auto s = store.create(maxquant_inputs());
    configure(*s);
    s->update(Section::preprocess, {{"imputation", "knn"}, {"knn_k", 2}});
    id = s->id();
    table = s->payload("diff_table");
    hashes = s->stage_hashes();
    CHECK(fs::exists(dir / id / "session.json"));
    CHECK(fs::exists(dir / id / "inputs" / "main"));
    bool stage_file = false;
    for (const auto& e : fs::directory_iterator(dir / id / "stages"))
      stage_file = stage_file || e.path().filename().string().rfind("diffexpr-", 0) == 0;
    CHECK(stage_file);
  }
  SessionStore again(o);
  CHECK(again.load_persisted() == 1);
  auto s = again.get(id);
  CHECK(s->stage_hashes() == hashes);
  CHECK(s->payload("diff_table") == table);
  again.remove(id);
  CHECK_FALSE(fs::exists(dir / id));
  fs::remove_all(dir);
}

TEST_CASE("idle sessions expire and uploads are size-limited") {
  Options o;
  o.idle_ttl = std::chrono::seconds(0);
  SessionStore store(o);
  auto s = store.create(maxquant_inputs());
  std::this_thread::sleep_for(std::chrono::milliseconds(20));
  CHECK(store.expire_idle() == 1);
  CHECK(store.size() == 0);

  Options tiny;
  tiny.max_upload_bytes = 16;
  CHECK_THROWS_AS(Session("x", maxquant_inputs(), tiny), ValidationError);
  Inputs broken;
  broken.main = "not a protein table\n1\t2\n";
  CHECK_THROWS_AS(Session("x", broken, {}), Error);
}

TEST_CASE("concurrent readers never see a result from stale parameters") {
  // reference payload per stage hash
  std::map<std::string, nlohmann::json> reference;
  for (const char* norm : {"median", "mean"}) {
    Session ref("r", spike_inputs(3), {});
    configure(ref);
    ref.update(Section::preprocess, {{"normalization", norm}});
    const auto env = serialize::parse(ref.payload("diff_table"));
    reference[env.at("stage_hash")] = env.at("data");
  }
  REQUIRE(reference.size() == 2);

  Session s("r", spike_inputs(3), {});
  configure(s);
  std::atomic<bool> stop{false};
  std::atomic<int> ok{0}, cancelled{0}, wrong{0};
  std::vector<std::thread> readers;
  for (int t = 0; t < 3; ++t) {
    readers.emplace_back([&] {
      while (!stop) {
        try {
          const auto env = serialize::parse(s.payload("diff_table"));
          auto it = reference.find(env.at("stage_hash"));
          if (it == reference.end() || it->second != env.at("data")) ++wrong;
          else ++ok;
        } catch (const StateError&) {
          ++cancelled;
        }
      }
    });
  }
  for (int i = 0; i < 6; ++i) {
    s.update(Section::preprocess, {{"normalization", i % 2 ? "median" : "mean"}});
    std::this_thread::sleep_for(std::chrono::milliseconds(30));
  }
  stop = true;
  for (auto& t : readers) t.join();
  CHECK(wrong == 0);
  CHECK(ok > 0);
}

TEST_CASE("manifest is free of timestamps and tracks parameters") {
  Session a("a", maxquant_inputs(), {}), b("b", maxquant_inputs(), {});
  configure(a);
  configure(b);
  CHECK(a.manifest() == b.manifest());
  CHECK(a.manifest().dump().find("created") == std::string::npos);
  b.update(Section::test, {{"p_threshold", 0.01}});
  CHECK(a.manifest() != b.manifest());
  CHECK(a.describe().at("stage_hashes").size() == 6);
}
