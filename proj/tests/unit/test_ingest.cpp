#include <doctest.h>

#include "goldens.hpp"
#include "oracles.hpp"
#include "protodown/ingest.hpp"

using namespace protodown;
using namespace protodown::ingest;

namespace {
std::string fixture(const std::string& name) { return oracle::read_file(std::string(PROTODOWN_FIXTURES) + "/" + name); }
}  // namespace

TEST_CASE("golden fixtures for all five platforms") {
  const auto errs = golden::check_parsers();
  for (const auto& e : errs) MESSAGE(e);
  CHECK(errs.empty());
}

TEST_CASE("DIA-NN counts equal a group-by over the report") {
  const auto errs = golden::check_diann_counts();
  for (const auto& e : errs) MESSAGE(e);
  CHECK(errs.empty());
}

TEST_CASE("read_delimited basics") {
  auto t = read_delimited("a\tb\n1\t2\n", '\t');
  CHECK(t.header == std::vector<std::string>{"a", "b"});
  REQUIRE(t.rows.size() == 1);
  CHECK(t.rows[0] == std::vector<std::string>{"1", "2"});

  t = read_delimited("\xEF\xBB\xBFx\ty\r\n1\t2\r\n", '\t');
  CHECK(t.header[0] == "x");
  CHECK(t.rows[0][1] == "2");

  t = read_delimited("a\tb\tc\n1\t2\n", '\t');
  CHECK(t.rows[0].size() == 3);
  CHECK(t.rows[0][2].empty());
  CHECK(t.warnings.size() == 1);

  CHECK_THROWS_AS(read_delimited("", '\t'), FormatError);
}

TEST_CASE("comma files honour quotes") {
  auto t = read_delimited("id,desc\nA,\"x, y\"\nB,\"say \"\"hi\"\"\"\nC,\"two\nlines\"\n", ',');
  REQUIRE(t.rows.size() == 3);
  CHECK(t.rows[0][1] == "x, y");
  CHECK(t.rows[1][1] == "say \"hi\"");
  CHECK(t.rows[2][1] == "two\nlines");
  CHECK(sniff_delimiter("a,b\n1,2\n") == ',');
  CHECK(sniff_delimiter("a\tb,c\n") == '\t');
}

TEST_CASE("maxquant specifics") {
  IngestConfig cfg;
  cfg.platform = PlatformKind::maxquant;
  const auto r = parse(fixture("maxquant_proteinGroups.txt"), std::nullopt, cfg);
  CHECK(r.table.records[0].display_id() == "P10001");
  CHECK(r.table.records[0].gene_names == "GENA");

  cfg.quantification = Quantification::spectral_count;
  const auto sc = parse(fixture("maxquant_proteinGroups.txt"), std::nullopt, cfg);
  CHECK(sc.matrix.cols() == 4);
  CHECK(*sc.matrix.get(0, 0) == 12.0);

  cfg.quantification = Quantification::reporter;
  CHECK_THROWS_AS(parse(fixture("maxquant_proteinGroups.txt"), std::nullopt, cfg), FormatError);
}

TEST_CASE("msfragger mode selection") {
  IngestConfig cfg;
  cfg.platform = PlatformKind::msfragger;
  cfg.quantification = Quantification::intensity;
  const auto r = parse(fixture("msfragger_combined_protein.tsv"), std::nullopt, cfg);
  CHECK(r.matrix.col_ids() == std::vector<std::string>{"A_1", "A_2", "A_3", "B_1", "B_2", "B_3"});
  CHECK(*r.matrix.get(0, 0) == doctest::Approx(1.3e6));

  const std::string no_sc = "Protein\tA MaxLFQ Intensity\nP1\t10\n";
  cfg.quantification = Quantification::spectral_count;
  CHECK_THROWS_AS(parse(no_sc, std::nullopt, cfg), FormatError);
}

TEST_CASE("diann without report warns and leaves counts absent") {
  IngestConfig cfg;
  cfg.platform = PlatformKind::diann;
  const auto r = parse(fixture("diann_report.pg_matrix.tsv"), std::nullopt, cfg);
  CHECK(r.matrix.rows() == 5);
  CHECK_FALSE(r.table.records[0].peptide_count.has_value());
  bool warned = false;
  for (const auto& w : r.warnings) warned = warned || w.find("report") != std::string::npos;
  CHECK(warned);
  CHECK_THROWS_AS(parse("Genes\trun1\nX\t1\n", std::nullopt, cfg), FormatError);
}

TEST_CASE("diann report enumeration example") {
  IngestConfig cfg;
  cfg.platform = PlatformKind::diann;
  const std::string pg = "Protein.Group\trun.raw\nG1\t10\nG2\t20\n";
  const std::string rep = "Protein.Group\tStripped.Sequence\nG1\tPEPA\nG1\tPEPB\nG2\tPEPB\n";
  const auto r = parse(pg, std::string_view(rep), cfg);
  CHECK(r.table.records[0].peptide_count == 2);
  CHECK(r.table.records[0].unique_peptide_count == 1);
  CHECK(r.table.records[1].peptide_count == 1);
  CHECK(r.table.records[1].unique_peptide_count == 0);
}

TEST_CASE("run basenames") {
  CHECK(run_basename("C:/data/run1.raw") == "run1");
  CHECK(run_basename("C:\\data\\run2.raw") == "run2");
  CHECK(run_basename("run3") == "run3");
  CHECK(run_basename("/x/y/run.4.mzML") == "run.4");
}

TEST_CASE("generic parser") {
  IngestConfig cfg;
  cfg.platform = PlatformKind::generic_wide;
  cfg.generic_mapping = GenericMapping{"id", "gene", "desc", "Abundance", "", "", ""};
  const auto r = parse(fixture("generic_wide.csv"), std::nullopt, cfg);
  CHECK(r.table.records[1].description == "say \"hi\"");
  CHECK(r.table.records[0].psm_counts.empty());
  CHECK_FALSE(r.table.records[0].min_psm_count.has_value());

  cfg.generic_mapping->id = "nope";
  CHECK_THROWS_AS(parse(fixture("generic_wide.csv"), std::nullopt, cfg), FormatError);

  cfg.generic_mapping = GenericMapping{"id", "", "", "Abundance: ", "", "", ""};
  const auto pd = parse("id\tAbundance: F1: Sample\nA\t5\n", std::nullopt, cfg);
  CHECK(pd.matrix.col_ids() == std::vector<std::string>{"F1: Sample"});
}

TEST_CASE("config validation ties mapping to platform") {
  IngestConfig cfg;
  cfg.platform = PlatformKind::generic_wide;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.platform = PlatformKind::maxquant;
  cfg.generic_mapping = GenericMapping{};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  CHECK_THROWS_AS(parse_platform("excel"), ConfigError);
}

TEST_CASE("zero, empty and NaN cells become missing; bad numbers are errors") {
  IngestConfig cfg;
  cfg.platform = PlatformKind::maxquant;
  const auto r = parse("Protein IDs\tLFQ intensity a\tLFQ intensity b\tLFQ intensity c\nP\t0\t\tNaN\nQ\t1e3\t2.5E2\t7\n",
                       std::nullopt, cfg);
  CHECK(r.matrix.observed_count() == 3);
  CHECK(*r.matrix.get(1, 0) == 1000.0);
  CHECK_THROWS_AS(parse("Protein IDs\tLFQ intensity a\nP\t1,5\n", std::nullopt, cfg), FormatError);
}

TEST_CASE("parsing is deterministic") {
  IngestConfig cfg;
  cfg.platform = PlatformKind::msfragger;
  const auto bytes = fixture("msfragger_combined_protein.tsv");
  const auto a = parse(bytes, std::nullopt, cfg);
  const auto b = parse(bytes, std::nullopt, cfg);
  CHECK(a.matrix == b.matrix);
  CHECK(a.table == b.table);
  CHECK(a.warnings == b.warnings);
}

TEST_CASE("duplicate and empty ids are skipped with warnings") {
  IngestConfig cfg;
  cfg.platform = PlatformKind::maxquant;
  const auto r = parse("Protein IDs\tLFQ intensity a\nP\t1\nP\t2\n\t3\n", std::nullopt, cfg);
  CHECK(r.matrix.rows() == 1);
  CHECK(r.warnings.size() == 2);
}

TEST_CASE("select_groups") {
  const std::vector<std::string> cols = {"ctrl_1", "ctrl_2", "trt_1"};
  const auto d = select_groups(cols, {{"C", "^ctrl"}, {"T", "^trt"}});
  REQUIRE(d.groups.size() == 2);
  CHECK(d.groups[0].columns == std::vector<std::string>{"ctrl_1", "ctrl_2"});
  CHECK(d.groups[1].columns == std::vector<std::string>{"trt_1"});
  CHECK_THROWS_AS(select_groups(cols, {{"X", "x$"}}), DesignError);
  try {
    select_groups(cols, {{"C", "ctrl"}, {"O", "_1"}});
    FAIL("expected ambiguity");
  } catch (const DesignError& e) {
    CHECK(std::string(e.what()).find("ctrl_1") != std::string::npos);
  }
  CHECK_THROWS_AS(select_groups(cols, {{"B", "(unclosed"}}), SyntaxError);
}

TEST_CASE("group spec strings") {
  const auto p = parse_group_spec("ctrl=^ctrl;trt=^trt");
  REQUIRE(p.size() == 2);
  CHECK(p[1].name == "trt");
  CHECK(p[1].regex == "^trt");
}
