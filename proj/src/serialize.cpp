#include "protodown/serialize.hpp"

#include <set>

namespace protodown::serialize {

namespace {

/// Walks a JSON object, remembering which keys were read.
class Reader {
 public:
  Reader(const json& j, std::string what) : j_(j), what_(std::move(what)) {
    if (!j.is_object()) throw ValidationError(what_ + ": expected a JSON object");
  }

  bool has(const char* key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  template <typename T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    if (!has(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ValidationError(what_ + ": field '" + key + "' has the wrong type", key);
    }
  }

  template <typename E, typename Parse>
  void read_enum(const char* key, E& out, Parse parse) {
    std::string text;
    read(key, text);
    if (!has(key)) return;
    try {
      out = parse(text);
    } catch (const Error& e) {
      throw ValidationError(what_ + ": " + e.what(), key);
    }
  }

  void skip(const char* key) { seen_.insert(key); }

  const json& raw(const char* key) {
    seen_.insert(key);
    return j_.at(key);
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ValidationError(what_ + ": unknown field '" + key + "'", key);
    }
  }

 private:
  const json& j_;
  std::string what_;
  std::set<std::string> seen_;
};

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("invalid JSON: ") + e.what());
  }
}

// --- parameters -------------------------------------------------------------

json to_json(const ingest::IngestConfig& c) {
  json patterns = json::array();
  for (const auto& p : c.group_patterns) patterns.push_back({{"name", p.name}, {"regex", p.regex}});
  json out = {{"platform", ingest::to_string(c.platform)},
              {"label_type", ingest::to_string(c.label_type)},
              {"quantification", ingest::to_string(c.quantification)},
              {"organism", c.organism},
              {"group_patterns", patterns},
              {"generic_mapping", nullptr}};
  if (c.generic_mapping) {
    const auto& m = *c.generic_mapping;
    out["generic_mapping"] = {{"id", m.id},
                              {"gene", m.gene},
                              {"description", m.description},
                              {"abundance_prefix", m.abundance_prefix},
                              {"peptide_count", m.peptide_count},
                              {"unique_peptide_count", m.unique_peptide_count},
                              {"psm_count", m.psm_count}};
  }
  return out;
}

ingest::IngestConfig ingest_config_from(const json& j, ingest::IngestConfig base) {
  Reader r(j, "ingest config");
  r.read_enum("platform", base.platform, ingest::parse_platform);
  r.read_enum("label_type", base.label_type, ingest::parse_label_type);
  r.read_enum("quantification", base.quantification, ingest::parse_quantification);
  r.read("organism", base.organism);
  if (r.has("group_patterns")) {
    base.group_patterns.clear();
    const auto& list = r.raw("group_patterns");
    if (list.is_string()) {
      base.group_patterns = ingest::parse_group_spec(list.get<std::string>());
    } else if (list.is_array()) {
      for (const auto& item : list) {
        Reader g(item, "group pattern");
        ingest::GroupPattern p;
        g.read("name", p.name);
        g.read("regex", p.regex);
        g.finish();
        base.group_patterns.push_back(p);
      }
    } else {
      throw ValidationError("ingest config: group_patterns must be a list or a spec string");
    }
  } else {
    r.skip("group_patterns");
  }
  if (r.has("generic_mapping")) {
    const auto& m = r.raw("generic_mapping");
    ingest::GenericMapping g = m.is_string() && m.get<std::string>() == "proteome_discoverer"
                                   ? ingest::GenericMapping::proteome_discoverer()
                                   : ingest::GenericMapping{};
    if (m.is_object()) {
      Reader mr(m, "generic mapping");
      mr.read("id", g.id);
      mr.read("gene", g.gene);
      mr.read("description", g.description);
      mr.read("abundance_prefix", g.abundance_prefix);
      mr.read("peptide_count", g.peptide_count);
      mr.read("unique_peptide_count", g.unique_peptide_count);
      mr.read("psm_count", g.psm_count);
      mr.finish();
    } else if (!m.is_string()) {
      throw ValidationError("ingest config: generic_mapping must be an object or a preset name");
    }
    base.generic_mapping = g;
  } else {
    r.skip("generic_mapping");
  }
  r.finish();
  if (base.platform == ingest::PlatformKind::proteome_discoverer && !base.generic_mapping) {
    base.generic_mapping = ingest::GenericMapping::proteome_discoverer();
  }
  return base;
}

json to_json(const GroupDesign& d) {
  json groups = json::array();
  for (const auto& g : d.groups) groups.push_back({{"name", g.name}, {"pattern", g.pattern}, {"columns", g.columns}});
  return {{"groups", groups}};
}

GroupDesign design_from(const json& j, const std::vector<std::string>& sample_columns) {
  Reader r(j, "design");
  if (!r.has("groups")) throw ValidationError("design: 'groups' is required");
  const auto& list = r.raw("groups");
  r.finish();
  std::vector<ingest::GroupPattern> patterns;
  GroupDesign explicit_design;
  bool any_explicit = false;
  if (list.is_string()) {
    patterns = ingest::parse_group_spec(list.get<std::string>());
  } else if (list.is_array()) {
    for (const auto& item : list) {
      Reader g(item, "design group");
      Group grp;
      g.read("name", grp.name);
      g.read("pattern", grp.pattern);
      g.read("columns", grp.columns);
      g.finish();
      if (!grp.columns.empty()) {
        for (const auto& c : grp.columns) {
          if (std::find(sample_columns.begin(), sample_columns.end(), c) == sample_columns.end()) {
            throw DesignError("design group " + grp.name + " names unknown column " + c, c);
          }
        }
        any_explicit = true;
      }
      explicit_design.groups.push_back(grp);
      patterns.push_back({grp.name, grp.pattern});
    }
  } else {
    throw ValidationError("design: 'groups' must be a list or a spec string");
  }
  if (!any_explicit) return ingest::select_groups(sample_columns, patterns);
  // mixed form: pattern groups are resolved, column lists are kept
  GroupDesign out;
  for (auto& g : explicit_design.groups) {
    if (g.columns.empty()) {
      g = ingest::select_groups(sample_columns, {{g.name, g.pattern}}).groups.front();
    }
    out.groups.push_back(g);
  }
  out.validate();
  return out;
}

json to_json(const preprocess::PreprocessParams& p) {
  json flags = json::array();
  for (auto f : p.drop_flagged) flags.push_back(to_string(f));
  return {{"min_valid", p.min_valid},
          {"valid_mode", preprocess::to_string(p.valid_mode)},
          {"min_unique_peptides", p.min_unique_peptides},
          {"drop_flagged", flags},
          {"normalization", preprocess::to_string(p.normalization)},
          {"trim_fraction", p.trim_fraction},
          {"imputation", preprocess::to_string(p.imputation)},
          {"downshift_shift", p.downshift_shift},
          {"downshift_width", p.downshift_width},
          {"knn_k", p.knn_k},
          {"rng_seed", p.rng_seed}};
}

preprocess::PreprocessParams preprocess_from(const json& j, preprocess::PreprocessParams base) {
  Reader r(j, "preprocess params");
  r.read("min_valid", base.min_valid);
  r.read_enum("valid_mode", base.valid_mode, preprocess::parse_valid_mode);
  r.read("min_unique_peptides", base.min_unique_peptides);
  if (r.has("drop_flagged")) {
    std::vector<std::string> names;
    r.read("drop_flagged", names);
    base.drop_flagged.clear();
    for (const auto& n : names) {
      auto f = parse_protein_flag(n);
      if (!f) throw ValidationError("preprocess params: unknown flag '" + n + "'", n);
      base.drop_flagged.insert(*f);
    }
  } else {
    r.skip("drop_flagged");
  }
  r.read_enum("normalization", base.normalization, preprocess::parse_normalization);
  r.read("trim_fraction", base.trim_fraction);
  r.read_enum("imputation", base.imputation, preprocess::parse_imputation);
  r.read("downshift_shift", base.downshift_shift);
  r.read("downshift_width", base.downshift_width);
  r.read("knn_k", base.knn_k);
  r.read("rng_seed", base.rng_seed);
  r.finish();
  base.validate();
  return base;
}

json to_json(const diffexpr::TestConfig& t) {
  return {{"method", diffexpr::to_string(t.method)},
          {"paired", t.paired},
          {"equal_variance", t.equal_variance},
          {"fc_threshold", t.fc_threshold},
          {"p_threshold", t.p_threshold},
          {"use_adjusted", t.use_adjusted},
          {"include_exclusives", t.include_exclusives},
          {"comparison", {{"group_a", t.comparison.group_a}, {"group_b", t.comparison.group_b}}}};
}

diffexpr::TestConfig test_from(const json& j, diffexpr::TestConfig base) {
  Reader r(j, "test config");
  r.read_enum("method", base.method, diffexpr::parse_method);
  r.read("paired", base.paired);
  r.read("equal_variance", base.equal_variance);
  r.read("fc_threshold", base.fc_threshold);
  r.read("p_threshold", base.p_threshold);
  r.read("use_adjusted", base.use_adjusted);
  r.read("include_exclusives", base.include_exclusives);
  if (r.has("comparison")) {
    const auto& c = r.raw("comparison");
    if (c.is_string()) {
      // "a:b"
      const auto s = c.get<std::string>();
      const auto colon = s.find(':');
      if (colon == std::string::npos) throw ValidationError("comparison must look like group_a:group_b");
      base.comparison = {s.substr(0, colon), s.substr(colon + 1)};
    } else {
      Reader cr(c, "comparison");
      cr.read("group_a", base.comparison.group_a);
      cr.read("group_b", base.comparison.group_b);
      cr.finish();
    }
  } else {
    r.skip("comparison");
  }
  r.finish();
  return base;
}

void EnrichParams::validate() const {
  if (top_n < 1) throw ValidationError("top_n must be at least 1");
  if (font_size < 1) throw ValidationError("font_size must be at least 1");
  if (ora.min_size > ora.max_size) throw ValidationError("min_size exceeds max_size");
  if (!(ora.sig_threshold > 0.0 && ora.sig_threshold <= 1.0)) throw ValidationError("sig_threshold must be in (0, 1]");
  if (id_field != "protein_id" && id_field != "gene") throw ValidationError("id_field must be protein_id or gene");
}

json to_json(const EnrichParams& e) {
  return {{"gmt", e.gmt},
          {"selector", enrich::to_string(e.selector)},
          {"min_size", e.ora.min_size},
          {"max_size", e.ora.max_size},
          {"correction", enrich::to_string(e.ora.correction)},
          {"sig_threshold", e.ora.sig_threshold},
          {"id_field", e.id_field},
          {"top_n", e.top_n},
          {"font_size", e.font_size},
          {"title", e.title},
          {"remote", e.remote},
          {"remote_base", e.remote_base},
          {"organism", e.organism},
          {"remote_fixture", e.remote_fixture}};
}

EnrichParams enrich_from(const json& j, EnrichParams base) {
  Reader r(j, "enrichment params");
  r.read("gmt", base.gmt);
  r.read_enum("selector", base.selector, enrich::parse_selector);
  r.read("min_size", base.ora.min_size);
  r.read("max_size", base.ora.max_size);
  r.read_enum("correction", base.ora.correction, enrich::parse_correction);
  r.read("sig_threshold", base.ora.sig_threshold);
  r.read("id_field", base.id_field);
  r.read("top_n", base.top_n);
  r.read("font_size", base.font_size);
  r.read("title", base.title);
  r.read("remote", base.remote);
  r.read("remote_base", base.remote_base);
  r.read("organism", base.organism);
  r.read("remote_fixture", base.remote_fixture);
  r.finish();
  base.validate();
  return base;
}

json to_json(const ppi::PpiConfig& p) {
  return {{"taxon_id", p.taxon_id},
          {"required_score", p.required_score},
          {"endpoint_base", p.endpoint_base},
          {"timeout_s", p.timeout_s},
          {"offline_fixture", p.offline_fixture ? json(*p.offline_fixture) : json(nullptr)},
          {"include_exclusives", p.include_exclusives}};
}

ppi::PpiConfig ppi_from(const json& j, ppi::PpiConfig base) {
  Reader r(j, "ppi config");
  r.read("taxon_id", base.taxon_id);
  r.read("required_score", base.required_score);
  r.read("endpoint_base", base.endpoint_base);
  r.read("timeout_s", base.timeout_s);
  if (r.has("offline_fixture")) {
    std::string path;
    r.read("offline_fixture", path);
    base.offline_fixture = path.empty() ? std::nullopt : std::optional<std::string>(path);
  } else {
    r.skip("offline_fixture");
  }
  r.read("include_exclusives", base.include_exclusives);
  r.finish();
  try {
    base.validate();
  } catch (const Error& e) {
    throw ValidationError(e.what());
  }
  return base;
}

// --- payloads ---------------------------------------------------------------

json to_json(const qc::PlotData& p) {
  json series = json::object();
  for (const auto& [name, values] : p.series) series[name] = values;
  json labels = json::object();
  for (const auto& [name, values] : p.labels) labels[name] = values;
  return {{"kind", qc::to_string(p.kind)}, {"series", series}, {"labels", labels}, {"meta", p.meta}};
}

json to_json(const diffexpr::VolcanoData& v) {
  json points = json::array();
  for (const auto& p : v.points) {
    points.push_back({{"id", p.protein_id}, {"x", p.x}, {"y", p.y}, {"status", diffexpr::to_string(p.status)}});
  }
  json ex = json::array();
  for (const auto& [id, s] : v.exclusives) ex.push_back({{"id", id}, {"status", diffexpr::to_string(s)}});
  return {{"points", points},
          {"exclusives", ex},
          {"fc_threshold", v.fc_threshold},
          {"y_threshold", v.y_threshold},
          {"adjusted", v.adjusted}};
}

namespace {

json dendro(const heatmap::Dendrogram& d) {
  json merges = json::array();
  for (const auto& m : d.merges) merges.push_back({m.left, m.right, m.height, m.size});
  return {{"merges", merges}, {"leaf_order", d.leaf_order}};
}

}  // namespace

json to_json(const heatmap::HeatmapData& h) {
  return {{"row_ids", h.row_ids}, {"col_ids", h.col_ids}, {"z", h.z},
          {"rows", dendro(h.rows)},  {"cols", dendro(h.cols)}, {"warnings", h.warnings},
          {"notice", h.notice},      {"truncated", h.truncated}};
}

json to_json(const preprocess::VennResult& v) {
  return {{"groups", v.groups}, {"sets", v.sets}, {"regions", v.regions}};
}

json to_json(const diffexpr::DiffRow& r) {
  return {{"protein_id", r.protein_id}, {"gene_names", r.gene_names}, {"log2fc", opt(r.log2fc)},
          {"t_stat", opt(r.t_stat)},    {"df", opt(r.df)},            {"p", opt(r.p)},
          {"p_adj", opt(r.p_adj)},      {"se", opt(r.se)},            {"posterior_var", opt(r.posterior_var)},
          {"n_a", r.n_a},               {"n_b", r.n_b},               {"status", diffexpr::to_string(r.status)}};
}

json to_json(const diffexpr::DiffResult& d) {
  json rows = json::array();
  for (const auto& r : d.rows) rows.push_back(to_json(r));
  json fit = nullptr;
  if (d.fit) fit = {{"d0", d.fit->d0}, {"s0_sq", d.fit->s0_sq}, {"psm_prior", !d.fit->prior_var.empty()}};
  return {{"rows", rows}, {"fit", fit}, {"warnings", d.warnings}};
}

json to_json(const enrich::EnrichmentRow& r) {
  return {{"term_id", r.term_id}, {"term_name", r.term_name}, {"source", r.source}, {"k", r.k},
          {"n", r.n},             {"K", r.K},                 {"N", r.N},           {"p", r.p},
          {"p_adj", r.p_adj},     {"significant", r.significant}, {"overlap_ids", r.overlap_ids}};
}

json to_json(const enrich::EnrichPlots& e, const std::string& which) {
  json items = json::array();
  if (which == "dot") {
    for (const auto& d : e.dot) {
      items.push_back({{"term_id", d.term_id}, {"term_name", d.term_name}, {"source", d.source},
                       {"gene_ratio", d.gene_ratio}, {"size", d.size}, {"color", d.color}});
    }
  } else if (which == "bar") {
    for (const auto& b : e.bar) {
      items.push_back({{"term_id", b.term_id}, {"term_name", b.term_name}, {"source", b.source}, {"value", b.value}});
    }
  } else if (which == "manhattan") {
    for (const auto& m : e.manhattan) {
      items.push_back({{"term_id", m.term_id}, {"term_name", m.term_name}, {"source", m.source}, {"x", m.x},
                       {"y", m.y}, {"significant", m.significant}});
    }
  } else {
    throw NotFoundError("unknown enrichment plot: " + which);
  }
  return {{"plot", which}, {"items", items}, {"font_size", e.font_size}, {"title", e.title}};
}

json to_json(const ppi::PpiNetwork& n) { return json::parse(ppi::to_json(n)); }

}  // namespace protodown::serialize
