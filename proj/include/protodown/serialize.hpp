#pragma once

#include <string>

#include <json.hpp>

#include "protodown/diffexpr.hpp"
#include "protodown/enrich.hpp"
#include "protodown/heatmap.hpp"
#include "protodown/ingest.hpp"
#include "protodown/ppi.hpp"
#include "protodown/preprocess.hpp"
#include "protodown/qc.hpp"

// JSON forms of parameters and payloads. Readers merge onto a base value,
// reject unknown keys and raise ValidationError on type mismatches.
namespace protodown::serialize {

using nlohmann::json;

struct EnrichParams {
  std::string gmt;  // annotation collection (GMT text)
  enrich::QuerySelector selector = enrich::QuerySelector::union_;
  enrich::OraOptions ora;
  std::string id_field = "protein_id";  // or "gene"
  int top_n = 20;
  int font_size = 12;
  std::string title = "Enrichment";
  bool remote = false;
  std::string remote_base = "https://biit.cs.ut.ee/gprofiler";
  std::string organism = "hsapiens";
  std::string remote_fixture;

  void validate() const;
  friend bool operator==(const EnrichParams&, const EnrichParams&) = default;
};

json to_json(const ingest::IngestConfig& c);
ingest::IngestConfig ingest_config_from(const json& j, ingest::IngestConfig base = {});

json to_json(const GroupDesign& d);
/// {"groups": [{"name", "pattern"}]} resolved against sample columns;
/// a "columns" list may replace the pattern.
GroupDesign design_from(const json& j, const std::vector<std::string>& sample_columns);

json to_json(const preprocess::PreprocessParams& p);
preprocess::PreprocessParams preprocess_from(const json& j, preprocess::PreprocessParams base = {});

json to_json(const diffexpr::TestConfig& t);
diffexpr::TestConfig test_from(const json& j, diffexpr::TestConfig base = {});

json to_json(const EnrichParams& e);
EnrichParams enrich_from(const json& j, EnrichParams base = {});

json to_json(const ppi::PpiConfig& p);
ppi::PpiConfig ppi_from(const json& j, ppi::PpiConfig base = {});

json to_json(const qc::PlotData& p);
json to_json(const diffexpr::VolcanoData& v);
json to_json(const heatmap::HeatmapData& h);
json to_json(const preprocess::VennResult& v);
json to_json(const diffexpr::DiffRow& r);
json to_json(const diffexpr::DiffResult& d);
json to_json(const enrich::EnrichmentRow& r);
json to_json(const enrich::EnrichPlots& e, const std::string& which);
json to_json(const ppi::PpiNetwork& n);

/// Parses JSON text, raising ValidationError with the parser message.
json parse(const std::string& text);

}  // namespace protodown::serialize
