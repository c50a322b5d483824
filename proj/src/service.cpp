#include "protodown/service.hpp"

#include <openssl/evp.h>
#include <openssl/rand.h>

#include <cstdlib>
#include <ctime>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "protodown/render.hpp"

#ifndef PROTODOWN_VERSION
#define PROTODOWN_VERSION "0.0.0"
#endif

namespace protodown::service {

namespace fs = std::filesystem;

std::string_view engine_version() { return "protodown-" PROTODOWN_VERSION; }

std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::ingest: return "ingest";
    case Stage::preprocess: return "preprocess";
    case Stage::qc: return "qc";
    case Stage::diffexpr: return "diffexpr";
    case Stage::enrich: return "enrich";
    case Stage::ppi: return "ppi";
  }
  return "";
}

std::string_view to_string(Section s) {
  switch (s) {
    case Section::design: return "design";
    case Section::preprocess: return "preprocess";
    case Section::test: return "test";
    case Section::enrich: return "enrich";
    case Section::ppi: return "ppi";
  }
  return "";
}

Section parse_section(std::string_view text) {
  for (auto s : {Section::design, Section::preprocess, Section::test, Section::enrich, Section::ppi}) {
    if (to_string(s) == text) return s;
  }
  throw NotFoundError("unknown parameter section: " + std::string(text));
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw StateError("SHA-256 digest failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

json Report::to_json() const {
  json inv = json::array(), rec = json::array();
  for (auto s : invalidated) inv.push_back(service::to_string(s));
  for (auto s : recomputed) rec.push_back(service::to_string(s));
  return {{"invalidated", inv}, {"recomputed", rec}};
}

namespace {

std::string now_utc() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string random_id() {
  unsigned char bytes[16];
  if (RAND_bytes(bytes, sizeof(bytes)) != 1) throw StateError("random source unavailable");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned char b : bytes) {
    out += hex[b >> 4];
    out += hex[b & 15];
  }
  return out;
}

std::string stage_hash(Stage s, const std::string& upstream, const json& params) {
  return sha256_hex(std::string(to_string(s)) + "\n" + upstream + "\n" + params.dump() + "\n" +
                    std::string(engine_version()));
}

template <typename T>
struct Slot {
  std::string hash;
  std::shared_ptr<const T> value;
  std::shared_ptr<const T> get(const std::string& h) const { return hash == h ? value : nullptr; }
};

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw NotFoundError("cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& body) {
  fs::create_directories(p.parent_path());
  const auto tmp = p.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    out << body;
  }
  fs::rename(tmp, p);
}

Stage artifact_stage(const std::string& artifact) {
  if (artifact.rfind("qc.", 0) == 0) return Stage::qc;
  if (artifact == "venn") return Stage::preprocess;
  if (artifact == "volcano" || artifact == "heatmap" || artifact == "diff_table") return Stage::diffexpr;
  if (artifact.rfind("enrichment.", 0) == 0) return Stage::enrich;
  if (artifact == "ppi.up" || artifact == "ppi.down") return Stage::ppi;
  throw NotFoundError("unknown artifact: " + artifact, artifact);
}

bool csv_capable(const std::string& a) { return a == "diff_table" || a == "enrichment.table"; }

bool plot_capable(const std::string& a) {
  return !csv_capable(a) && a != "ppi.up" && a != "ppi.down";
}

std::string query_key(const std::string& artifact, const Query& q) {
  std::string key = artifact;
  for (const auto& [k, v] : q) key += "\x1f" + k + "=" + v;
  return key;
}

void allow_keys(const Query& q, std::initializer_list<const char*> keys) {
  for (const auto& [k, v] : q) {
    bool ok = false;
    for (const char* a : keys) ok = ok || k == a;
    if (!ok) throw ValidationError("unsupported query parameter: " + k, k);
  }
}

std::string first_gene(const std::string& genes) {
  auto semi = genes.find(';');
  return genes.substr(0, semi);
}

}  // namespace

struct Session::PreprocessStage {
  preprocess::PreprocessResult result;
  GroupDesign active;
};

struct Session::EnrichStage {
  std::vector<enrich::EnrichmentRow> rows;
  enrich::EnrichPlots plots;
  std::vector<std::string> warnings;
};

struct Session::Cache {
  Slot<ingest::IngestResult> ingest;
  Slot<PreprocessStage> pre;
  Slot<diffexpr::DiffResult> diff;
  Slot<EnrichStage> enrich;
  Slot<ppi::DiffNetworks> ppi;
  std::map<std::string, std::pair<std::string, json>> memo;
};

struct Session::Built {
  Stage stage;
  json data;
  std::function<render::Canvas()> canvas;
  std::function<std::string()> csv;
};

// ---------------------------------------------------------------------------

Session::Session(std::string id, Inputs inputs, Options options)
    : id_(std::move(id)), inputs_(std::move(inputs)), options_(std::move(options)), cache_(std::make_unique<Cache>()) {
  const std::size_t total = inputs_.main.size() + (inputs_.report ? inputs_.report->size() : 0);
  if (total > options_.max_upload_bytes) {
    throw ValidationError("upload exceeds the size limit of " + std::to_string(options_.max_upload_bytes) + " bytes");
  }
  inputs_.config.validate();
  input_digest_ = sha256_hex(inputs_.main) + ":" + (inputs_.report ? sha256_hex(*inputs_.report) : std::string("-"));
  created_ = updated_ = now_utc();
  last_access_ = std::chrono::steady_clock::now();

  auto parsed = std::make_shared<ingest::IngestResult>(ingest::parse(
      inputs_.main, inputs_.report ? std::optional<std::string_view>(*inputs_.report) : std::nullopt, inputs_.config));
  cache_->ingest = {hashes_for(params_).at(Stage::ingest), parsed};
  if (!inputs_.config.group_patterns.empty()) {
    params_.design = ingest::select_groups(parsed->matrix, inputs_.config.group_patterns);
  }
}

Session::~Session() = default;

std::map<Stage, std::string> Session::hashes_for(const Params& p) const {
  std::map<Stage, std::string> h;
  h[Stage::ingest] = stage_hash(Stage::ingest, input_digest_, serialize::to_json(inputs_.config));
  json pre = {{"design", serialize::to_json(p.design)},
              {"params", serialize::to_json(p.preprocess)},
              {"comparison", {p.test.comparison.group_a, p.test.comparison.group_b}}};
  h[Stage::preprocess] = stage_hash(Stage::preprocess, h[Stage::ingest], pre);
  h[Stage::qc] = stage_hash(Stage::qc, h[Stage::preprocess], json::object());
  h[Stage::diffexpr] = stage_hash(Stage::diffexpr, h[Stage::preprocess], serialize::to_json(p.test));
  h[Stage::enrich] =
      stage_hash(Stage::enrich, h[Stage::diffexpr], p.enrich ? serialize::to_json(*p.enrich) : json("unconfigured"));
  h[Stage::ppi] = stage_hash(Stage::ppi, h[Stage::diffexpr], p.ppi ? serialize::to_json(*p.ppi) : json("unconfigured"));
  return h;
}

std::map<Stage, std::string> Session::stage_hashes() const {
  std::shared_lock lock(rw_);
  return hashes_for(params_);
}

Params Session::params() const {
  std::shared_lock lock(rw_);
  return params_;
}

void Session::checkpoint() const {
  if (pending_.load() > 0) throw StateError("computation cancelled by a concurrent update", "cancelled");
}

std::chrono::steady_clock::time_point Session::last_access() const {
  std::lock_guard lock(access_mutex_);
  return last_access_;
}

void Session::touch() {
  std::lock_guard lock(access_mutex_);
  last_access_ = std::chrono::steady_clock::now();
}

json Session::summary() const {
  const auto& ing = cache_->ingest.value;
  return {{"rows", ing->matrix.rows()},
          {"columns", ing->matrix.cols()},
          {"column_ids", ing->matrix.col_ids()},
          {"warnings", ing->warnings}};
}

json Session::describe() const {
  std::shared_lock lock(rw_);
  const auto h = hashes_for(params_);
  json stages = json::object();
  for (auto s : kStages) stages[std::string(to_string(s))] = h.at(s);
  return {{"session_id", id_},
          {"created", created_},
          {"updated", updated_},
          {"summary", summary()},
          {"ingest_config", serialize::to_json(inputs_.config)},
          {"design", serialize::to_json(params_.design)},
          {"preprocess", serialize::to_json(params_.preprocess)},
          {"test", serialize::to_json(params_.test)},
          {"enrich", params_.enrich ? serialize::to_json(*params_.enrich) : json(nullptr)},
          {"ppi", params_.ppi ? serialize::to_json(*params_.ppi) : json(nullptr)},
          {"stage_hashes", stages}};
}

json Session::manifest() const {
  std::shared_lock lock(rw_);
  const auto h = hashes_for(params_);
  json stages = json::object();
  for (auto s : kStages) stages[std::string(to_string(s))] = h.at(s);
  return {{"engine_version", engine_version()},
          {"schema_version", kSchemaVersion},
          {"inputs",
           {{"main_sha256", sha256_hex(inputs_.main)},
            {"report_sha256", inputs_.report ? json(sha256_hex(*inputs_.report)) : json(nullptr)}}},
          {"ingest_config", serialize::to_json(inputs_.config)},
          {"design", serialize::to_json(params_.design)},
          {"preprocess", serialize::to_json(params_.preprocess)},
          {"test", serialize::to_json(params_.test)},
          {"enrich", params_.enrich ? serialize::to_json(*params_.enrich) : json(nullptr)},
          {"ppi", params_.ppi ? serialize::to_json(*params_.ppi) : json(nullptr)},
          {"stage_hashes", stages}};
}

// --- stages -------------------------------------------------------------------

std::shared_ptr<const ingest::IngestResult> Session::ingest_stage() { return cache_->ingest.value; }

std::shared_ptr<const Session::PreprocessStage> Session::preprocess_stage() {
  const auto h = hashes_for(params_).at(Stage::preprocess);
  if (auto hit = cache_->pre.get(h)) return hit;
  if (params_.design.groups.empty()) throw StateError("design not configured", "design");
  checkpoint();
  const auto ing = ingest_stage();
  auto out = std::make_shared<PreprocessStage>();
  const auto& cmp = params_.test.comparison;
  out->active = cmp.configured() ? params_.design.subset({cmp.group_a, cmp.group_b}) : params_.design;
  std::vector<std::size_t> cols;
  for (const auto& idx : resolve_columns(ing->matrix, out->active)) cols.insert(cols.end(), idx.begin(), idx.end());
  const auto linear = ing->matrix.select_columns(cols);
  out->result = preprocess::run(ing->table, linear, out->active, params_.preprocess);
  cache_->pre = {h, out};
  write_stage(Stage::preprocess, h,
              json({{"rows", out->result.imputed.rows()},
                    {"columns", out->result.imputed.col_ids()},
                    {"warnings", out->result.warnings}})
                  .dump());
  return out;
}

std::shared_ptr<const diffexpr::DiffResult> Session::diff_stage() {
  const auto h = hashes_for(params_).at(Stage::diffexpr);
  if (auto hit = cache_->diff.get(h)) return hit;
  if (!params_.test.comparison.configured()) throw StateError("comparison not configured", "test");
  const auto pre = preprocess_stage();
  checkpoint();
  params_.test.validate(&pre->active);
  auto out = std::make_shared<diffexpr::DiffResult>(diffexpr::run(pre->result.imputed, pre->result.mask, pre->result.table,
                                                                  pre->active, params_.test,
                                                                  params_.preprocess.min_valid));
  cache_->diff = {h, out};
  write_stage(Stage::diffexpr, h, diffexpr::export_table(out->rows));
  return out;
}

std::shared_ptr<const Session::EnrichStage> Session::enrich_stage() {
  const auto h = hashes_for(params_).at(Stage::enrich);
  if (auto hit = cache_->enrich.get(h)) return hit;
  if (!params_.enrich) throw StateError("enrichment not configured", "enrich");
  const auto& ep = *params_.enrich;
  if (!ep.remote && ep.gmt.empty()) throw StateError("enrichment annotation sets not configured", "enrich");
  const auto diff = diff_stage();
  checkpoint();

  auto id_of = [&](const diffexpr::DiffRow& r) {
    if (ep.id_field == "gene") {
      auto g = first_gene(r.gene_names);
      if (!g.empty()) return g;
    }
    return r.protein_id;
  };
  const bool ex = params_.test.include_exclusives;
  std::set<std::string> up_ids, down_ids;
  for (const auto& id : ppi::up_set(diff->rows, ex)) up_ids.insert(id);
  for (const auto& id : ppi::down_set(diff->rows, ex)) down_ids.insert(id);
  std::set<std::string> universe, query;
  for (const auto& r : diff->rows) {
    const auto id = id_of(r);
    universe.insert(id);
    const bool up = up_ids.count(r.protein_id) > 0, down = down_ids.count(r.protein_id) > 0;
    if ((ep.selector != enrich::QuerySelector::down && up) || (ep.selector != enrich::QuerySelector::up && down)) {
      query.insert(id);
    }
  }

  auto out = std::make_shared<EnrichStage>();
  if (query.empty()) {
    out->warnings.push_back("no differentially abundant proteins in the selected set");
  } else if (ep.remote) {
    std::shared_ptr<transport::Transport> t;
    if (!ep.remote_fixture.empty()) t = transport::FixtureTransport::from_file(ep.remote_fixture);
    else t = std::make_shared<transport::HttpTransport>(ep.remote_base);
    enrich::RemoteOptions ro;
    ro.organism = ep.organism;
    ro.threshold = ep.ora.sig_threshold;
    out->rows = enrich::remote_profile(std::vector<std::string>(query.begin(), query.end()), ro, *t);
  } else {
    auto gmt = enrich::parse_gmt(ep.gmt);
    out->warnings = gmt.warnings;
    auto res = enrich::ora(query, universe, gmt.sets, ep.ora);
    out->rows = std::move(res.rows);
    out->warnings.insert(out->warnings.end(), res.warnings.begin(), res.warnings.end());
  }
  out->plots = enrich::enrich_plot_data(out->rows, ep.top_n, ep.font_size, ep.title);
  cache_->enrich = {h, out};
  write_stage(Stage::enrich, h, enrich::export_table(out->rows));
  return out;
}

std::shared_ptr<const ppi::DiffNetworks> Session::ppi_stage() {
  const auto h = hashes_for(params_).at(Stage::ppi);
  if (auto hit = cache_->ppi.get(h)) return hit;
  if (!params_.ppi) throw StateError("ppi not configured", "ppi");
  const auto diff = diff_stage();
  checkpoint();
  auto t = ppi::make_transport(*params_.ppi);
  auto out = std::make_shared<ppi::DiffNetworks>(ppi::networks_for_diff(diff->rows, *params_.ppi, *t));
  cache_->ppi = {h, out};
  write_stage(Stage::ppi, h,
              json({{"up", serialize::to_json(out->up)}, {"down", serialize::to_json(out->down)}}).dump());
  return out;
}

// --- artifacts --------------------------------------------------------------

Session::Built Session::build(const std::string& artifact, const Query& q) {
  Built b{artifact_stage(artifact), nullptr, {}, {}};
  auto get = [&](const char* key, const std::string& fallback) {
    auto it = q.find(key);
    return it == q.end() ? fallback : it->second;
  };

  if (b.stage == Stage::qc) {
    allow_keys(q, {"stage", "column", "x", "y"});
    const auto pre = preprocess_stage();
    const auto& r = pre->result;
    const std::string default_stage = artifact == "qc.boxplot" ? "normalized" : "imputed";
    const std::string which = get("stage", default_stage);
    const ExpressionMatrix* m = nullptr;
    if (which == "log2") m = &r.log2;
    else if (which == "normalized") m = &r.normalized;
    else if (which == "imputed") m = &r.imputed;
    else throw ValidationError("stage must be log2, normalized or imputed", which);

    auto column = [&](const char* key, std::size_t fallback) {
      if (m->cols() == 0) throw PreconditionError("matrix has no columns");
      auto name = get(key, m->col_ids()[std::min(fallback, m->cols() - 1)]);
      auto idx = m->find_column(name);
      if (!idx) throw NotFoundError("unknown column: " + name, name);
      return *idx;
    };
    if (artifact == "qc.boxplot") {
      auto boxes = qc::boxplot_stats(*m);
      b.data = serialize::to_json(qc::to_plot(boxes));
      b.canvas = [boxes] { return render::boxplot(boxes); };
    } else if (artifact == "qc.histogram") {
      std::vector<double> values;
      std::string title = "All samples";
      if (q.count("column")) {
        const auto c = column("column", 0);
        values = m->observed_in_column(c);
        title = m->col_ids()[c];
      } else {
        for (std::size_t c = 0; c < m->cols(); ++c) {
          auto v = m->observed_in_column(c);
          values.insert(values.end(), v.begin(), v.end());
        }
      }
      auto h = qc::histogram(values);
      b.data = serialize::to_json(qc::to_plot(h, title));
      b.canvas = [h, title] { return render::histogram(h, title); };
    } else if (artifact == "qc.qq") {
      const auto c = column("column", 0);
      auto points = qc::qq_points(m->observed_in_column(c));
      const auto name = m->col_ids()[c];
      b.data = serialize::to_json(qc::to_plot(points, name));
      b.canvas = [points, name] { return render::qq(points, "Q-Q plot: " + name); };
    } else if (artifact == "qc.imputation_overlay") {
      auto o = qc::imputation_overlay(r.imputed, r.mask);
      b.data = serialize::to_json(qc::to_plot(o));
      b.canvas = [o] { return render::imputation_overlay(o); };
    } else if (artifact == "qc.dispersion") {
      auto rows = qc::dispersion_stats(*m);
      b.data = serialize::to_json(qc::to_plot(rows));
      b.canvas = [rows] { return render::dispersion(rows); };
    } else if (artifact == "qc.scatter") {
      const auto x = column("x", 0), y = column("y", 1);
      auto s = qc::scatter(*m, m->col_ids()[x], m->col_ids()[y]);
      b.data = serialize::to_json(qc::to_plot(s));
      b.canvas = [s] { return render::scatter(s); };
    } else if (artifact == "qc.correlation") {
      auto corr = qc::correlation_matrix(*m);
      auto ids = m->col_ids();
      b.data = serialize::to_json(qc::correlation_plot(corr, ids));
      b.canvas = [corr, ids] { return render::correlation(corr, ids); };
    } else if (artifact == "qc.pca") {
      auto p = qc::pca(*m, true);
      auto design = pre->active;
      b.data = serialize::to_json(qc::to_plot(p, &design));
      b.canvas = [p, design] { return render::pca(p, &design); };
    } else {
      throw NotFoundError("unknown artifact: " + artifact, artifact);
    }
    return b;
  }

  if (artifact == "venn") {
    allow_keys(q, {});
    if (params_.design.groups.empty()) throw StateError("design not configured", "design");
    preprocess_stage();  // same validity rules as the preprocess stage
    const auto ing = ingest_stage();
    auto v = preprocess::venn_sets(ing->matrix.mask(), ing->matrix, params_.design, params_.preprocess.min_valid);
    b.data = serialize::to_json(v);
    b.canvas = [v] { return render::venn(v); };
    return b;
  }

  if (b.stage == Stage::diffexpr) {
    allow_keys(q, {});
    const auto diff = diff_stage();
    if (artifact == "diff_table") {
      b.data = serialize::to_json(*diff);
      b.csv = [diff] { return diffexpr::export_table(diff->rows); };
    } else if (artifact == "volcano") {
      auto v = diffexpr::volcano_data(diff->rows, params_.test);
      b.data = serialize::to_json(v);
      b.canvas = [v] { return render::volcano(v); };
    } else {
      const auto pre = preprocess_stage();
      const auto& m = pre->result.imputed;
      std::vector<std::size_t> rows;
      std::size_t incomplete = 0;
      for (std::size_t i = 0; i < diff->rows.size(); ++i) {
        const auto s = diff->rows[i].status;
        if (s != diffexpr::Status::up && s != diffexpr::Status::down) continue;
        bool full = true;
        for (std::size_t c = 0; c < m.cols(); ++c) full = full && m.observed(i, c);
        if (full) rows.push_back(i);
        else ++incomplete;
      }
      std::stable_sort(rows.begin(), rows.end(), [&](std::size_t a, std::size_t c) {
        return diff->rows[a].p.value_or(1.0) < diff->rows[c].p.value_or(1.0);
      });
      auto h = heatmap::heatmap_data(m, rows);
      if (incomplete) h.warnings.push_back(std::to_string(incomplete) + " significant rows with missing values left out");
      b.data = serialize::to_json(h);
      b.canvas = [h] { return render::heatmap(h); };
    }
    return b;
  }

  if (b.stage == Stage::enrich) {
    allow_keys(q, {});
    const auto e = enrich_stage();
    if (artifact == "enrichment.table") {
      json rows = json::array();
      for (const auto& r : e->rows) rows.push_back(serialize::to_json(r));
      b.data = {{"rows", rows}, {"warnings", e->warnings}};
      b.csv = [e] { return enrich::export_table(e->rows); };
    } else if (artifact == "enrichment.dot") {
      b.data = serialize::to_json(e->plots, "dot");
      b.canvas = [e] { return render::enrichment_dot(e->plots); };
    } else if (artifact == "enrichment.bar") {
      b.data = serialize::to_json(e->plots, "bar");
      b.canvas = [e] { return render::enrichment_bar(e->plots); };
    } else if (artifact == "enrichment.manhattan") {
      b.data = serialize::to_json(e->plots, "manhattan");
      b.canvas = [e] { return render::enrichment_manhattan(e->plots); };
    } else {
      throw NotFoundError("unknown artifact: " + artifact, artifact);
    }
    return b;
  }

  allow_keys(q, {});
  const auto nets = ppi_stage();
  b.data = serialize::to_json(artifact == "ppi.up" ? nets->up : nets->down);
  return b;
}

std::string Session::payload(const std::string& artifact, const Query& query) {
  touch();
  std::shared_lock lock(rw_);
  std::lock_guard guard(compute_);
  const Stage stage = artifact_stage(artifact);
  const auto hash = hashes_for(params_).at(stage);
  const auto key = query_key(artifact, query);
  json data;
  if (auto it = cache_->memo.find(key); it != cache_->memo.end() && it->second.first == hash) {
    data = it->second.second;
  } else {
    data = build(artifact, query).data;
    // the stage hash must not move while computing (readers-writer contract)
    if (hashes_for(params_).at(stage) != hash) throw StateError("parameters changed during computation");
    cache_->memo[key] = {hash, data};
  }
  json env = {{"schema_version", kSchemaVersion},
              {"artifact", artifact},
              {"stage", to_string(stage)},
              {"stage_hash", hash},
              {"data", data}};
  return env.dump();
}

Export Session::export_artifact(const std::string& artifact, const std::string& format, const Query& query) {
  touch();
  artifact_stage(artifact);
  if (format != "csv" && format != "svg" && format != "png") {
    throw ValidationError("unknown export format: " + format, format);
  }
  if ((format == "csv" && !csv_capable(artifact)) || (format != "csv" && !plot_capable(artifact))) {
    throw UnsupportedError("unsupported export pair: " + artifact + " as " + format, artifact + ":" + format);
  }
  std::shared_lock lock(rw_);
  std::lock_guard guard(compute_);
  auto b = build(artifact, query);
  std::string stem = artifact;
  std::replace(stem.begin(), stem.end(), '.', '_');
  if (format == "csv") return {b.csv(), "text/csv", stem + ".csv"};
  auto canvas = b.canvas();
  if (format == "svg") return {canvas.to_svg(), "image/svg+xml", stem + ".svg"};
  auto png = canvas.to_png(300.0);
  return {std::string(png.begin(), png.end()), "image/png", stem + ".png"};
}

// --- mutation ---------------------------------------------------------------

void Session::recompute_all() {
  auto attempt = [](auto&& fn) {
    try {
      fn();
      return true;
    } catch (const Error&) {
      return false;
    }
  };
  attempt([&] { preprocess_stage(); });
  attempt([&] { diff_stage(); });
  if (params_.enrich) attempt([&] { enrich_stage(); });
  if (params_.ppi) attempt([&] { ppi_stage(); });
}

Report Session::update(Section section, const json& body) {
  touch();
  ++pending_;
  struct Done {
    std::atomic<int>& n;
    ~Done() { --n; }
  } done{pending_};
  std::unique_lock lock(rw_);
  std::lock_guard guard(compute_);

  Params next = params_;
  const auto ing = ingest_stage();
  switch (section) {
    case Section::design: {
      next.design = serialize::design_from(body, ing->matrix.col_ids());
      const auto& cmp = next.test.comparison;
      if (cmp.configured() && (!next.design.contains(cmp.group_a) || !next.design.contains(cmp.group_b))) {
        throw DesignError("design drops a group used by the configured comparison", cmp.group_a + ":" + cmp.group_b);
      }
      if (cmp.configured()) next.test.validate(&next.design);
      break;
    }
    case Section::preprocess: next.preprocess = serialize::preprocess_from(body, next.preprocess); break;
    case Section::test:
      next.test = serialize::test_from(body, next.test);
      next.test.validate(next.design.groups.empty() ? nullptr : &next.design);
      break;
    case Section::enrich: {
      next.enrich = serialize::enrich_from(body, next.enrich.value_or(serialize::EnrichParams{}));
      if (!next.enrich->remote && !next.enrich->gmt.empty()) enrich::parse_gmt(next.enrich->gmt);
      break;
    }
    case Section::ppi: next.ppi = serialize::ppi_from(body, next.ppi.value_or(ppi::PpiConfig::from_env())); break;
  }

  Report report;
  const auto before = hashes_for(params_);
  const auto after = hashes_for(next);
  for (auto s : kStages) {
    if (before.at(s) != after.at(s)) report.invalidated.push_back(s);
  }
  params_ = std::move(next);
  if (!report.invalidated.empty()) {
    updated_ = now_utc();
    // stale entries would never be served; dropping them frees memory
    if (cache_->pre.hash != after.at(Stage::preprocess)) cache_->pre = {};
    if (cache_->diff.hash != after.at(Stage::diffexpr)) cache_->diff = {};
    if (cache_->enrich.hash != after.at(Stage::enrich)) cache_->enrich = {};
    if (cache_->ppi.hash != after.at(Stage::ppi)) cache_->ppi = {};
    std::erase_if(cache_->memo, [&](const auto& kv) {
      for (auto s : kStages) {
        if (kv.second.first == after.at(s)) return false;
      }
      return true;
    });
  }
  if (options_.persist_dir) persist();
  if (options_.eager && !report.invalidated.empty()) {
    --pending_;  // our own recomputation must not cancel itself
    try {
      recompute_all();
    } catch (...) {
      ++pending_;
      throw;
    }
    ++pending_;
    const std::map<Stage, std::string> now = {{Stage::preprocess, cache_->pre.hash},
                                              {Stage::qc, cache_->pre.hash.empty() ? "" : after.at(Stage::qc)},
                                              {Stage::diffexpr, cache_->diff.hash},
                                              {Stage::enrich, cache_->enrich.hash},
                                              {Stage::ppi, cache_->ppi.hash}};
    for (auto s : report.invalidated) {
      auto it = now.find(s);
      if (it != now.end() && it->second == after.at(s)) report.recomputed.push_back(s);
    }
  }
  return report;
}

// --- persistence ------------------------------------------------------------

void Session::write_stage(Stage stage, const std::string& hash, const std::string& body) const {
  if (!options_.persist_dir) return;
  try {
    write_file(*options_.persist_dir / id_ / "stages" / (std::string(to_string(stage)) + "-" + hash), body);
  } catch (const std::exception&) {
    // persistence is best effort; the in-memory result stays valid
  }
}

void Session::persist() const {
  if (!options_.persist_dir) return;
  const auto dir = *options_.persist_dir / id_;
  json doc = {{"session_id", id_},
              {"created", created_},
              {"updated", updated_},
              {"ingest_config", serialize::to_json(inputs_.config)},
              {"has_report", inputs_.report.has_value()},
              {"design", serialize::to_json(params_.design)},
              {"preprocess", serialize::to_json(params_.preprocess)},
              {"test", serialize::to_json(params_.test)},
              {"enrich", params_.enrich ? serialize::to_json(*params_.enrich) : json(nullptr)},
              {"ppi", params_.ppi ? serialize::to_json(*params_.ppi) : json(nullptr)}};
  if (!fs::exists(dir / "inputs" / "main")) {
    write_file(dir / "inputs" / "main", inputs_.main);
    if (inputs_.report) write_file(dir / "inputs" / "report", *inputs_.report);
  }
  write_file(dir / "session.json", doc.dump(2));
}

std::shared_ptr<Session> Session::restore(const fs::path& dir, Options options) {
  const auto doc = serialize::parse(read_file(dir / "session.json"));
  Inputs in;
  in.main = read_file(dir / "inputs" / "main");
  if (doc.value("has_report", false)) in.report = read_file(dir / "inputs" / "report");
  in.config = serialize::ingest_config_from(doc.at("ingest_config"));
  auto opts = options;
  opts.persist_dir.reset();  // no rewrite while restoring
  auto s = std::make_shared<Session>(doc.at("session_id").get<std::string>(), std::move(in), opts);
  const auto cols = s->ingest_stage()->matrix.col_ids();
  if (!doc.at("design").at("groups").empty()) s->params_.design = serialize::design_from(doc.at("design"), cols);
  s->params_.preprocess = serialize::preprocess_from(doc.at("preprocess"));
  s->params_.test = serialize::test_from(doc.at("test"));
  if (!doc.at("enrich").is_null()) s->params_.enrich = serialize::enrich_from(doc.at("enrich"));
  if (!doc.at("ppi").is_null()) s->params_.ppi = serialize::ppi_from(doc.at("ppi"));
  s->created_ = doc.value("created", s->created_);
  s->updated_ = doc.value("updated", s->updated_);
  s->options_ = options;
  return s;
}

// --- store ------------------------------------------------------------------

SessionStore::SessionStore(Options options) : options_(std::move(options)) {}

std::shared_ptr<Session> SessionStore::create(Inputs inputs) {
  expire_idle();
  auto s = std::make_shared<Session>(random_id(), std::move(inputs), options_);
  if (options_.persist_dir) s->persist();
  std::lock_guard lock(mutex_);
  sessions_[s->id()] = s;
  return s;
}

std::shared_ptr<Session> SessionStore::get(const std::string& id) {
  expire_idle();
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw NotFoundError("no such session: " + id, id);
  it->second->touch();
  return it->second;
}

void SessionStore::remove(const std::string& id) {
  std::shared_ptr<Session> victim;
  {
    std::lock_guard lock(mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw NotFoundError("no such session: " + id, id);
    victim = it->second;
    sessions_.erase(it);
  }
  if (options_.persist_dir) {
    std::error_code ec;
    fs::remove_all(*options_.persist_dir / id, ec);
  }
}

std::size_t SessionStore::size() const {
  std::lock_guard lock(mutex_);
  return sessions_.size();
}

std::size_t SessionStore::expire_idle() {
  const auto now = std::chrono::steady_clock::now();
  std::vector<std::string> gone;
  {
    std::lock_guard lock(mutex_);
    for (auto it = sessions_.begin(); it != sessions_.end();) {
      if (now - it->second->last_access() > options_.idle_ttl) {
        gone.push_back(it->first);
        it = sessions_.erase(it);
      } else {
        ++it;
      }
    }
  }
  if (options_.persist_dir) {
    for (const auto& id : gone) {
      std::error_code ec;
      fs::remove_all(*options_.persist_dir / id, ec);
    }
  }
  return gone.size();
}

std::size_t SessionStore::load_persisted() {
  if (!options_.persist_dir || !fs::exists(*options_.persist_dir)) return 0;
  std::size_t n = 0;
  for (const auto& entry : fs::directory_iterator(*options_.persist_dir)) {
    if (!entry.is_directory() || !fs::exists(entry.path() / "session.json")) continue;
    try {
      auto s = Session::restore(entry.path(), options_);
      std::lock_guard lock(mutex_);
      sessions_[s->id()] = s;
      ++n;
    } catch (const std::exception&) {
      // unreadable session directories are skipped
    }
  }
  return n;
}

Options options_from_env() {
  Options o;
  if (const char* dir = std::getenv("PROTODOWN_SESSION_DIR"); dir && *dir) o.persist_dir = fs::path(dir);
  if (const char* eager = std::getenv("PROTODOWN_EAGER"); eager && std::string(eager) == "1") o.eager = true;
  if (const char* ttl = std::getenv("PROTODOWN_SESSION_TTL"); ttl && *ttl) {
    o.idle_ttl = std::chrono::seconds(std::strtoll(ttl, nullptr, 10));
  }
  return o;
}

}  // namespace protodown::service
