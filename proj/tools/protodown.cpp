#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "protodown/server.hpp"
#include "protodown/service.hpp"

namespace fs = std::filesystem;
using namespace protodown;
using service::json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot read " + path, path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& path, const std::string& body) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string(), path.string());
  out << body;
}

int exit_code(const Error& e) {
  switch (e.code()) {
    case ErrorCode::config:
    case ErrorCode::validation:
    case ErrorCode::syntax:
    case ErrorCode::design:
    case ErrorCode::unsupported:
    case ErrorCode::not_found: return kExitConfig;
    default: return kExitData;
  }
}

struct RunArgs {
  std::string platform;
  std::string input;
  std::string report;
  std::string quant = "lfq";
  std::string label = "label_free";
  std::string mapping;
  std::string groups;
  std::string compare;
  std::string normalize = "median";
  double trim = 0.2;
  std::string impute = "normal_downshift";
  double shift = 1.8;
  double width = 0.3;
  int knn_k = 10;
  int min_valid = 2;
  std::string valid_mode = "at_least_one_group";
  int min_unique = 0;
  std::string test = "moderated_t";
  bool paired = false;
  bool equal_var = false;
  double fc = 1.0;
  double p = 0.05;
  bool adjusted = true;
  std::string gmt;
  std::string selector = "union";
  std::string correction = "bh";
  std::string id_field = "protein_id";
  int top_n = 20;
  int taxon = 0;
  int score = 400;
  std::string ppi_fixture;
  std::string string_base;
  std::uint64_t seed = 42;
  std::string out = "results";
};

int run(const RunArgs& a) {
  service::Inputs in;
  in.main = slurp(a.input);
  if (!a.report.empty()) in.report = slurp(a.report);
  json cfg = {{"platform", a.platform}, {"quantification", a.quant}, {"label_type", a.label}};
  if (!a.mapping.empty()) {
    cfg["generic_mapping"] = fs::exists(a.mapping) ? serialize::parse(slurp(a.mapping)) : json(a.mapping);
  }
  in.config = serialize::ingest_config_from(cfg);

  service::Options opts;
  opts.persist_dir.reset();
  service::Session session("cli", std::move(in), opts);
  const auto compare = a.compare;
  const auto colon = compare.find(':');
  if (colon == std::string::npos) throw ConfigError("--compare must look like group_a:group_b", compare);

  session.update(service::Section::design, {{"groups", a.groups}});
  session.update(service::Section::preprocess, {{"min_valid", a.min_valid},
                                                {"valid_mode", a.valid_mode},
                                                {"min_unique_peptides", a.min_unique},
                                                {"normalization", a.normalize},
                                                {"trim_fraction", a.trim},
                                                {"imputation", a.impute},
                                                {"downshift_shift", a.shift},
                                                {"downshift_width", a.width},
                                                {"knn_k", a.knn_k},
                                                {"rng_seed", a.seed}});
  session.update(service::Section::test, {{"method", a.test},
                                          {"paired", a.paired},
                                          {"equal_variance", a.equal_var},
                                          {"fc_threshold", a.fc},
                                          {"p_threshold", a.p},
                                          {"use_adjusted", a.adjusted},
                                          {"comparison", compare}});
  if (!a.gmt.empty()) {
    session.update(service::Section::enrich, {{"gmt", slurp(a.gmt)},
                                              {"selector", a.selector},
                                              {"correction", a.correction},
                                              {"sig_threshold", a.p},
                                              {"id_field", a.id_field},
                                              {"top_n", a.top_n}});
  }
  if (a.taxon > 0) {
    json p = {{"taxon_id", a.taxon}, {"required_score", a.score}};
    if (!a.ppi_fixture.empty()) p["offline_fixture"] = a.ppi_fixture;
    if (!a.string_base.empty()) p["endpoint_base"] = a.string_base;
    session.update(service::Section::ppi, p);
  }

  const fs::path out = a.out;
  fs::create_directories(out);
  json outputs = json::object();
  json skipped = json::object();
  auto record = [&](const std::string& name, const std::string& body) {
    spit(out / name, body);
    outputs[name] = service::sha256_hex(body);
  };

  // the differential table is the core result: failures here are fatal
  record("diff_table.csv", session.export_artifact("diff_table", "csv").body);

  auto soft = [&](const std::string& name, const std::function<std::string()>& make) {
    try {
      record(name, make());
    } catch (const Error& e) {
      skipped[name] = e.what();
      std::cerr << "warning: " << name << " skipped: " << e.what() << "\n";
    }
  };
  for (const char* art : {"boxplot", "histogram", "qq", "imputation_overlay", "dispersion", "scatter", "correlation",
                          "pca"}) {
    soft(std::string("qc/") + art + ".svg",
         [&] { return session.export_artifact(std::string("qc.") + art, "svg").body; });
  }
  soft("volcano.svg", [&] { return session.export_artifact("volcano", "svg").body; });
  soft("heatmap.svg", [&] { return session.export_artifact("heatmap", "svg").body; });
  soft("venn.svg", [&] { return session.export_artifact("venn", "svg").body; });

  if (!a.gmt.empty()) {
    record("enrichment.csv", session.export_artifact("enrichment.table", "csv").body);
    for (const char* plot : {"dot", "bar", "manhattan"}) {
      soft(std::string("enrichment_") + plot + ".svg",
           [&] { return session.export_artifact(std::string("enrichment.") + plot, "svg").body; });
    }
  } else {
    record("enrichment.csv", enrich::export_table({}));
    skipped["enrichment"] = "no annotation sets given (--gmt)";
  }

  if (a.taxon > 0) {
    for (const char* side : {"up", "down"}) {
      const auto payload = serialize::parse(session.payload(std::string("ppi.") + side));
      record(std::string("ppi_") + side + ".json", payload.at("data").dump(2) + "\n");
    }
  } else {
    ppi::PpiNetwork none;
    none.notices.push_back("network lookup disabled: no taxon id given (--taxon)");
    record("ppi_up.json", ppi::to_json(none));
    record("ppi_down.json", ppi::to_json(none));
  }

  auto manifest = session.manifest();
  manifest["outputs"] = outputs;
  manifest["skipped"] = skipped;
  manifest["ingest_summary"] = session.summary();
  spit(out / "run_manifest.json", manifest.dump(2) + "\n");
  return 0;
}

server::Server* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

int serve(const std::string& addr) {
  const auto [host, port] = server::parse_addr(addr);
  auto store = std::make_shared<service::SessionStore>(service::options_from_env());
  const auto restored = store->load_persisted();
  if (restored) std::cerr << "restored " << restored << " session(s)\n";
  server::Server srv(store);
  g_server = &srv;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cerr << "listening on " << host << ":" << port << "\n";
  if (!srv.listen(host, port)) {
    std::cerr << "error: cannot listen on " << host << ":" << port << "\n";
    return kExitConfig;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"protodown: downstream analysis of protein quantification tables"};
  app.set_version_flag("--version", std::string(service::engine_version()));
  app.require_subcommand(1);

  RunArgs a;
  auto* r = app.add_subcommand("run", "Run the full pipeline in batch mode");
  r->add_option("--platform", a.platform, "maxquant | msfragger | diann | proteome_discoverer | generic_wide")
      ->required();
  r->add_option("--input", a.input, "Main protein table")->required();
  r->add_option("--report", a.report, "DIA-NN precursor report (optional)");
  r->add_option("--quant", a.quant, "intensity | lfq | spectral_count | reporter")->capture_default_str();
  r->add_option("--label", a.label, "label_free | tmt | silac")->capture_default_str();
  r->add_option("--mapping", a.mapping, "Generic column mapping: JSON file or preset name");
  r->add_option("--groups", a.groups, "Group patterns, e.g. \"ctrl=^ctrl;trt=^trt\"")->required();
  r->add_option("--compare", a.compare, "Comparison group_a:group_b (fold change = a - b)")->required();
  r->add_option("--normalize", a.normalize, "none | mean | median | trimmed_mean | vsn_glog")->capture_default_str();
  r->add_option("--trim", a.trim, "Trim fraction for trimmed_mean")->capture_default_str();
  r->add_option("--impute", a.impute, "none | normal_downshift | knn")->capture_default_str();
  r->add_option("--shift", a.shift, "Down-shift in SDs")->capture_default_str();
  r->add_option("--width", a.width, "Down-shift width in SDs")->capture_default_str();
  r->add_option("--knn-k", a.knn_k, "Neighbours for knn")->capture_default_str();
  r->add_option("--min-valid", a.min_valid, "Minimum valid values per group")->capture_default_str();
  r->add_option("--valid-mode", a.valid_mode, "each_group | at_least_one_group")->capture_default_str();
  r->add_option("--min-unique", a.min_unique, "Minimum unique peptides")->capture_default_str();
  r->add_option("--test", a.test, "ordinary_t | moderated_t | moderated_t_psm")->capture_default_str();
  r->add_flag("--paired", a.paired, "Paired ordinary t-test");
  r->add_flag("--equal-var", a.equal_var, "Pooled-variance ordinary t-test");
  r->add_option("--fc", a.fc, "|log2 fold change| threshold")->capture_default_str();
  r->add_option("--p", a.p, "p-value threshold")->capture_default_str();
  r->add_flag("--adjusted,!--raw-p", a.adjusted, "Threshold BH-adjusted (default) or raw p-values");
  r->add_option("--gmt", a.gmt, "Annotation sets for enrichment (GMT)");
  r->add_option("--selector", a.selector, "Enrichment query: up | down | union")->capture_default_str();
  r->add_option("--correction", a.correction, "Enrichment correction: bh | bonferroni")->capture_default_str();
  r->add_option("--id-field", a.id_field, "Identifier matched against GMT members: protein_id | gene")
      ->capture_default_str();
  r->add_option("--top-n", a.top_n, "Terms shown in enrichment plots")->capture_default_str();
  r->add_option("--taxon", a.taxon, "NCBI taxon id for interaction networks (0 = off)");
  r->add_option("--score", a.score, "Interaction score threshold 0-1000")->capture_default_str();
  r->add_option("--ppi-fixture", a.ppi_fixture, "Replay recorded network responses from a JSON file");
  r->add_option("--string-base", a.string_base, "Network service base URL");
  r->add_option("--seed", a.seed, "Imputation seed")->capture_default_str();
  r->add_option("--out", a.out, "Output directory")->capture_default_str();

  std::string addr;
  if (const char* env = std::getenv("PROTODOWN_ADDR"); env && *env) addr = env;
  else addr = "127.0.0.1:8080";
  auto* s = app.add_subcommand("serve", "Serve the session HTTP API");
  s->add_option("--addr", addr, "Listen address host:port (env PROTODOWN_ADDR)")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (r->parsed()) return run(a);
    return serve(addr);
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what();
    if (!e.detail().empty()) std::cerr << " (" << e.detail() << ")";
    std::cerr << "\n";
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
}
