#include "goldens.hpp"

#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "protodown/ingest.hpp"

using namespace protodown;

namespace golden {

namespace {

struct Expect {
  std::string file;
  ingest::IngestConfig config;
  std::vector<std::string> rows;
  std::vector<std::string> cols;
  std::set<std::pair<std::size_t, std::size_t>> missing;
  std::map<std::size_t, std::set<ProteinFlag>> flags;
  std::map<std::size_t, double> first_value;  // row -> value at column 0
  std::map<std::size_t, std::pair<std::optional<int>, std::optional<int>>> peptides;
  std::map<std::size_t, std::optional<int>> min_psm;
};

std::string path(const std::string& name) { return std::string(PROTODOWN_FIXTURES) + "/" + name; }

void compare(const Expect& e, ingest::IngestResult r, std::vector<std::string>& errs) {
  auto fail = [&](const std::string& what) { errs.push_back(e.file + ": " + what); };
  if (r.matrix.row_ids() != e.rows) fail("row ids differ");
  if (r.matrix.col_ids() != e.cols) fail("sample names differ");
  if (r.matrix.scale() != Scale::linear) fail("not linear scale");
  if (r.table.size() != e.rows.size()) fail("table size differs");
  if (!errs.empty() && errs.back().starts_with(e.file)) return;
  for (std::size_t i = 0; i < r.matrix.rows(); ++i) {
    for (std::size_t j = 0; j < r.matrix.cols(); ++j) {
      const bool want_missing = e.missing.count({i, j}) > 0;
      if (r.matrix.observed(i, j) == want_missing) {
        fail("cell (" + std::to_string(i) + "," + std::to_string(j) + ") missingness");
      }
      if (r.matrix.observed(i, j) && r.matrix.value(i, j) <= 0) fail("non-positive stored value");
    }
    std::set<ProteinFlag> want;
    if (auto it = e.flags.find(i); it != e.flags.end()) want = it->second;
    if (r.table.records[i].flags != want) fail("flags of row " + std::to_string(i));
  }
  for (const auto& [row, v] : e.first_value) {
    if (r.matrix.get(row, 0) != v) fail("value at row " + std::to_string(row));
  }
  for (const auto& [row, pc] : e.peptides) {
    const auto& rec = r.table.records[row];
    if (rec.peptide_count != pc.first || rec.unique_peptide_count != pc.second) {
      fail("peptide counts of row " + std::to_string(row));
    }
  }
  for (const auto& [row, m] : e.min_psm) {
    if (r.table.records[row].min_psm_count != m) fail("min psm count of row " + std::to_string(row));
  }
}

ingest::IngestResult parse_file(const Expect& e, const std::string* report = nullptr) {
  const auto main = oracle::read_file(path(e.file));
  if (report) return ingest::parse(main, std::string_view(*report), e.config);
  return ingest::parse(main, std::nullopt, e.config);
}

}  // namespace

std::vector<std::string> check_parsers() {
  std::vector<std::string> errs;
  using F = ProteinFlag;

  Expect mq;
  mq.file = "maxquant_proteinGroups.txt";
  mq.config.platform = ingest::PlatformKind::maxquant;
  mq.rows = {"P10001", "P10002", "REV__P10003", "CON__P10004", "P10005"};
  mq.cols = {"ctrl_1", "ctrl_2", "trt_1", "trt_2"};
  mq.missing = {{1, 1}, {4, 0}, {4, 1}};
  mq.flags = {{2, {F::reverse}}, {3, {F::contaminant}}};
  mq.first_value = {{0, 1000.0}, {1, 500.0}};
  mq.peptides = {{0, {12, 10}}, {4, {3, 2}}};
  mq.min_psm = {{0, 12}, {1, 4}, {4, 7}};

  Expect mf;
  mf.file = "msfragger_combined_protein.tsv";
  mf.config.platform = ingest::PlatformKind::msfragger;
  mf.rows = {"sp|Q90001|ONE_HUMAN",        "sp|Q90002|TWO_HUMAN", "rev_sp|Q90003|THR_HUMAN",
             "contam_sp|P04264|K2C1_HUMAN", "sp|Q90005|FIV_HUMAN", "sp|Q90006|SIX_HUMAN"};
  mf.cols = {"A_1", "A_2", "A_3", "B_1", "B_2", "B_3"};
  mf.missing = {{1, 1}, {4, 2}, {4, 3}};
  mf.flags = {{2, {F::reverse}}, {3, {F::contaminant}}};
  mf.first_value = {{0, 1e6}, {5, 2e4}};
  mf.peptides = {{0, {9, 7}}, {4, {7, 3}}};
  mf.min_psm = {{0, 10}, {1, 3}, {4, 6}};

  Expect dn;
  dn.file = "diann_report.pg_matrix.tsv";
  dn.config.platform = ingest::PlatformKind::diann;
  dn.rows = {"O00001", "O00002;O00003", "O00004", "O00005", "O00006"};
  dn.cols = {"ctrl_01", "ctrl_02", "trt_01", "trt_02"};
  dn.missing = {{1, 1}, {2, 2}, {3, 0}, {3, 1}};
  dn.first_value = {{0, 5000.0}, {4, 42000.0}};
  dn.peptides = {{0, {3, 2}}, {1, {2, 1}}, {2, {3, 3}}, {3, {1, 0}}, {4, {2, 1}}};

  Expect pd;
  pd.file = "pd_proteins.txt";
  pd.config.platform = ingest::PlatformKind::proteome_discoverer;
  pd.config.generic_mapping = ingest::GenericMapping::proteome_discoverer();
  for (int i = 1; i <= 10; ++i) {
    char id[8];
    std::snprintf(id, sizeof id, "A%05d", i);
    pd.rows.push_back(id);
  }
  pd.cols = {"F1: Sample, ctrl", "F2: Sample, trt", "F3: Sample, trt"};
  pd.missing = {{3, 1}};
  pd.first_value = {{0, 1000.0}, {9, 10000.0}};
  pd.peptides = {{0, {2, 1}}, {9, {11, 10}}};
  pd.min_psm = {{0, 6}, {9, 33}};

  Expect gw;
  gw.file = "generic_wide.csv";
  gw.config.platform = ingest::PlatformKind::generic_wide;
  gw.config.generic_mapping = ingest::GenericMapping{"id", "gene", "desc", "Abundance", "", "", "psms"};
  gw.rows = {"X1", "X2", "X3", "X4", "X5"};
  gw.cols = {"s1", "s2", "s3", "s4"};
  gw.missing = {{0, 2}, {2, 1}, {4, 0}};
  gw.first_value = {{0, 10.5}, {3, 40.0}};
  gw.peptides = {{0, {std::nullopt, std::nullopt}}};
  gw.min_psm = {{0, 7}, {4, std::nullopt}};

  for (auto* e : {&mq, &mf, &pd, &gw}) {
    try {
      compare(*e, parse_file(*e), errs);
    } catch (const std::exception& ex) {
      errs.push_back(e->file + ": threw " + ex.what());
    }
  }
  try {
    const auto report = oracle::read_file(path("diann_report.tsv"));
    compare(dn, parse_file(dn, &report), errs);
  } catch (const std::exception& ex) {
    errs.push_back(dn.file + ": threw " + ex.what());
  }
  return errs;
}

std::vector<std::string> check_diann_counts() {
  std::vector<std::string> errs;
  const auto report = oracle::read_file(path("diann_report.tsv"));
  // group-by straight off the text
  std::istringstream in(report);
  std::string line;
  std::getline(in, line);
  std::vector<std::string> header;
  {
    std::istringstream h(line);
    std::string cell;
    while (std::getline(h, cell, '\t')) header.push_back(cell);
  }
  std::size_t gcol = 0, scol = 0;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == "Protein.Group") gcol = i;
    if (header[i] == "Stripped.Sequence") scol = i;
  }
  std::map<std::string, std::set<std::string>> by_group;
  std::map<std::string, std::set<std::string>> by_seq;
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::istringstream l(line);
    std::string cell;
    while (std::getline(l, cell, '\t')) f.push_back(cell);
    by_group[f[gcol]].insert(f[scol]);
    by_seq[f[scol]].insert(f[gcol]);
  }

  ingest::IngestConfig cfg;
  cfg.platform = ingest::PlatformKind::diann;
  const auto r = ingest::parse(oracle::read_file(path("diann_report.pg_matrix.tsv")), std::string_view(report), cfg);
  for (const auto& rec : r.table.records) {
    int total = 0, unique = 0;
    for (const auto& s : by_group[rec.protein_id]) {
      ++total;
      if (by_seq[s].size() == 1) ++unique;
    }
    if (rec.peptide_count != total || rec.unique_peptide_count != unique) {
      errs.push_back("diann counts differ for " + rec.protein_id);
    }
  }
  return errs;
}

}  // namespace golden
