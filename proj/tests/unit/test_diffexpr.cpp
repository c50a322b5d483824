#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "protodown/diffexpr.hpp"
#include "protodown/stats.hpp"
#include "sim.hpp"

using namespace protodown;
using namespace protodown::diffexpr;

namespace {

GroupDesign ab(std::size_t na, std::size_t nb) {
  GroupDesign d{{{"A", "", {}}, {"B", "", {}}}};
  for (std::size_t j = 0; j < na; ++j) d.groups[0].columns.push_back("S" + std::to_string(j));
  for (std::size_t j = 0; j < nb; ++j) d.groups[1].columns.push_back("S" + std::to_string(na + j));
  return d;
}

ExpressionMatrix one_row(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<std::string> c;
  for (std::size_t j = 0; j < a.size() + b.size(); ++j) c.push_back("S" + std::to_string(j));
  ExpressionMatrix m({"r"}, c, Scale::log2);
  for (std::size_t j = 0; j < a.size(); ++j) m.set(0, j, a[j]);
  for (std::size_t j = 0; j < b.size(); ++j) m.set(0, a.size() + j, b[j]);
  return m;
}

bool close(double got, double want, double tol) { return std::abs(got - want) <= tol * std::max(1.0, std::abs(want)); }

// variances drawn as sigma^2 * chi2_d / d with sigma^2 from a scaled inverse chi-square prior
std::vector<double> simulate_variances(std::size_t n, double d0, double s0_sq, double d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::chi_squared_distribution<double> prior(d0), sample(d);
  std::vector<double> out(n);
  for (auto& v : out) v = (s0_sq * d0 / prior(rng)) * sample(rng) / d;
  return out;
}

}  // namespace

TEST_CASE("group means and fold change") {
  auto m = one_row({3, 3, 3}, {1, 1, 1});
  const Comparison c{"A", "B"};
  CHECK(*group_means_fc(m, ab(3, 3), c)[0].log2fc == 2.0);
  CHECK(*group_means_fc(m, ab(3, 3), Comparison{"B", "A"})[0].log2fc == -2.0);
  m = one_row({1, 2, 3}, {1, 2, 3});
  CHECK(*group_means_fc(m, ab(3, 3), c)[0].log2fc == 0.0);
  CHECK_THROWS_AS(group_means_fc(m, ab(3, 3), Comparison{"A", "Z"}), DesignError);
}

TEST_CASE("pooled t worked example") {
  const std::vector<double> a = {1, 2, 3}, b = {4, 5, 6};
  const auto s = pooled_test(a, b);
  CHECK(*s.t == doctest::Approx(-3.6742).epsilon(1e-4));
  CHECK(*s.df == 4.0);
  CHECK(*s.p == doctest::Approx(0.02131).epsilon(1e-4));
  const auto same = welch_test(a, a);
  CHECK(*same.t == 0.0);
  CHECK(*same.p == 1.0);
}

TEST_CASE("Welch degrees of freedom shrink with unequal variances") {
  const std::vector<double> a = {1, 2}, b = {1, 2, 3, 100};
  CHECK(*welch_test(a, b).df < 4.0);
}

TEST_CASE("ordinary tests agree with the frozen reference table") {
  const auto cases = oracle::load_ttest_reference(std::string(PROTODOWN_FIXTURES) + "/ttest_reference.csv");
  REQUIRE(cases.size() == 1000);
  int bad = 0;
  for (const auto& c : cases) {
    const auto s = c.kind == "welch" ? welch_test(c.a, c.b) : c.kind == "pooled" ? pooled_test(c.a, c.b) : paired_test(c.a, c.b);
    if (!close(*s.t, c.t, 1e-9) || !close(*s.df, c.df, 1e-9) || std::abs(*s.p - c.p) > 1e-10) ++bad;
  }
  CHECK(bad == 0);
}

TEST_CASE("paired test pairs by design order and needs equal sizes") {
  std::vector<std::string> c = {"S0", "S1", "S2", "S3", "S4"};
  ExpressionMatrix m({"r"}, c, Scale::log2);
  for (std::size_t j = 0; j < 5; ++j) m.set(0, j, double(j));
  TestConfig cfg;
  cfg.method = TestMethod::ordinary_t;
  cfg.paired = true;
  cfg.comparison = {"A", "B"};
  CHECK_THROWS_AS(ordinary_t(m, ab(2, 3), cfg), ConfigError);
}

TEST_CASE("eBayes: identical variances hit the cap") {
  std::vector<double> v(200, 0.25), d(200, 50.0);
  const auto f = fit_ebayes(v, d);
  CHECK(f.d0 == kDfCap);
  // identical s2 imply a slightly larger sigma^2: E[ln s2] = ln sigma^2 + digamma(d/2) - ln(d/2)
  const double sigma2 = 0.25 * std::exp(std::log(25.0) - stats::digamma(25.0));
  CHECK(std::abs(f.s0_sq - sigma2) / sigma2 < 1e-5);
}

TEST_CASE("eBayes recovers simulated hyperparameters") {
  const auto v = simulate_variances(5000, 4.0, 0.09, 4.0, 2024);
  const std::vector<double> d(5000, 4.0);
  const auto f = fit_ebayes(v, d);
  CHECK(std::abs(f.d0 - 4.0) / 4.0 < 0.15);
  CHECK(std::abs(f.s0_sq - 0.09) / 0.09 < 0.10);

  auto shuffled = v;
  std::shuffle(shuffled.begin(), shuffled.end(), std::mt19937_64(5));
  const auto g = fit_ebayes(shuffled, d);
  CHECK(g.d0 == doctest::Approx(f.d0).epsilon(1e-12));
  CHECK(g.s0_sq == doctest::Approx(f.s0_sq).epsilon(1e-12));
}

TEST_CASE("eBayes rejects all-zero variances") {
  std::vector<double> v(20, 0.0), d(20, 4.0);
  CHECK_THROWS_AS(fit_ebayes(v, d), DegenerateDataError);
}

TEST_CASE("moderated t limits") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> nd(0, 1);
  int worst_zero = 0;
  for (int i = 0; i < 200; ++i) {
    std::vector<double> a(3), b(4);
    for (auto& x : a) x = nd(rng) + 0.5;
    for (auto& x : b) x = nd(rng);
    const auto m = one_row(a, b);
    const auto rows = pooled_rows(m, ab(3, 4), Comparison{"A", "B"});
    const auto z = moderated_row(rows[0], 0.0, 0.3);
    const auto ref = oracle::pooled_t(a, b);
    if (!close(*z.t, ref.t, 1e-12)) ++worst_zero;
    CHECK(*z.df == ref.df);

    const auto cap = moderated_row(rows[0], kDfCap, 0.3);
    CHECK(std::abs(*cap.posterior_var - 0.3) / 0.3 < 1e-3);

    const auto mid = moderated_row(rows[0], 4.0, 0.3);
    const double s2 = *rows[0].s2;
    CHECK(*mid.posterior_var > std::min(s2, 0.3));
    CHECK(*mid.posterior_var < std::max(s2, 0.3));
    CHECK(*mid.df == 4.0 + rows[0].d);

    const auto fixed = moderated_row(rows[0], 7.0, s2);
    CHECK(*fixed.posterior_var == doctest::Approx(s2).epsilon(1e-14));
  }
  CHECK(worst_zero == 0);
}

TEST_CASE("PSM prior") {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> cnt(1, 60);
  std::chi_squared_distribution<double> chi(4.0);
  const std::size_t n = 5000;
  std::vector<double> d(n, 4.0);

  SUBCASE("flat when variance ignores counts") {
    const auto v = simulate_variances(n, 6.0, 0.1, 4.0, 3);
    std::vector<std::optional<double>> c(n);
    for (auto& x : c) x = cnt(rng);
    std::vector<double> xs, zs;
    for (std::size_t i = 0; i < n; ++i) {
      xs.push_back(std::log2(*c[i] + 1.0));
      zs.push_back(std::log(v[i]));
    }
    const LoessCurve curve(xs, zs);
    const double mz = stats::mean(zs);
    double worst = 0;
    for (double f : curve.fitted_at_knots()) worst = std::max(worst, std::abs(f - mz));
    CHECK(worst < 0.1);
  }
  SUBCASE("decreasing when variance falls with counts") {
    std::vector<double> v(n);
    std::vector<std::optional<double>> c(n);
    std::vector<double> cd(n);
    for (std::size_t i = 0; i < n; ++i) {
      c[i] = cnt(rng);
      cd[i] = *c[i];
      v[i] = (0.5 / *c[i]) * chi(rng) / 4.0;
    }
    const auto f = fit_psm_prior(v, d, c);
    REQUIRE(f.prior_var.size() == n);
    CHECK(stats::spearman(f.prior_var, cd) < -0.9);
  }
  SUBCASE("constant counts fall back to the global prior") {
    const auto v = simulate_variances(n, 6.0, 0.1, 4.0, 9);
    std::vector<std::optional<double>> c(n, 5.0);
    const auto f = fit_psm_prior(v, d, c);
    const auto g = fit_ebayes(v, d);
    for (double p : f.prior_var) CHECK(std::abs(p - g.s0_sq) < 1e-6);
    CHECK_FALSE(f.warnings.empty());
  }
  SUBCASE("too few counts is an error") {
    const auto v = simulate_variances(100, 6.0, 0.1, 4.0, 10);
    std::vector<double> dd(100, 4.0);
    std::vector<std::optional<double>> c(100);
    for (std::size_t i = 0; i < 50; ++i) c[i] = 3.0;
    CHECK_THROWS_AS(fit_psm_prior(v, dd, c), PreconditionError);
  }
}

TEST_CASE("Benjamini-Hochberg") {
  const std::vector<double> p = {0.01, 0.02, 0.03, 0.04};
  CHECK(bh_adjust(p) == std::vector<double>{0.04, 0.04, 0.04, 0.04});
  const std::vector<double> one = {0.3};
  CHECK(bh_adjust(one)[0] == 0.3);
  const std::vector<double> bad = {1.2};
  CHECK_THROWS_AS(bh_adjust(bad), ValidationError);

  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> v(1 + rng() % 60);
    for (auto& x : v) x = rng() % 5 == 0 ? std::pow(u(rng), 6) : u(rng);
    if (t % 7 == 0) v.push_back(v[0]);
    const auto got = bh_adjust(v);
    CHECK(got == oracle::bh(v));
    for (std::size_t i = 0; i < v.size(); ++i) {
      CHECK(got[i] >= v[i]);
      CHECK(got[i] <= 1.0);
      for (std::size_t j = 0; j < v.size(); ++j)
        if (v[i] < v[j]) CHECK(got[i] <= got[j]);
    }
  }

  std::vector<std::optional<double>> holes = {0.01, std::nullopt, 0.02};
  const auto h = bh_adjust(std::span<const std::optional<double>>(holes));
  CHECK_FALSE(h[1]);
  CHECK(*h[0] == 0.02);
}

TEST_CASE("classification rules") {
  TestConfig cfg;
  cfg.fc_threshold = 1.0;
  cfg.p_threshold = 0.05;
  cfg.use_adjusted = false;
  std::vector<DiffRow> rows(4);
  rows[0].log2fc = 0.5;
  rows[0].p = rows[0].p_adj = 0.01;
  rows[1].log2fc = -1.2;
  rows[1].p = rows[1].p_adj = 0.01;
  rows[2].log2fc = 3;  // exclusive by mask
  rows[3].log2fc = 2;   // untested, no p
  const std::vector<std::pair<int, int>> counts = {{3, 3}, {3, 3}, {3, 0}, {1, 1}};
  classify(rows, counts, cfg, 2);
  CHECK(rows[0].status == Status::not_significant);
  CHECK(rows[1].status == Status::down);
  CHECK(rows[2].status == Status::exclusive_a);
  CHECK_FALSE(rows[2].p);
  CHECK(rows[3].status == Status::untested);
}

TEST_CASE("volcano data") {
  std::vector<DiffRow> rows(3);
  rows[0].log2fc = 1.5;
  rows[0].p = 0.05;
  rows[0].p_adj = 0.1;
  rows[0].status = Status::not_significant;
  rows[1].status = Status::exclusive_b;
  rows[1].protein_id = "X";
  rows[2].status = Status::untested;
  TestConfig cfg;
  cfg.use_adjusted = false;
  const auto v = volcano_data(rows, cfg);
  REQUIRE(v.points.size() == 1);
  CHECK(std::round(v.points[0].y * 1e4) / 1e4 == 1.3010);
  REQUIRE(v.exclusives.size() == 1);
  CHECK(v.exclusives[0].first == "X");
  CHECK(v.y_threshold == doctest::Approx(-std::log10(0.05)));
}

TEST_CASE("export table round trip and quoting") {
  std::vector<DiffRow> rows(2);
  rows[0].protein_id = "P1;P2";
  rows[0].gene_names = "A,B";
  rows[0].log2fc = 0.1 + 0.2;
  rows[0].t_stat = -1.0 / 3.0;
  rows[0].df = 4;
  rows[0].p = 1e-300;
  rows[0].p_adj = 2.5e-17;
  rows[0].posterior_var = 0.123456789012345678;
  rows[0].n_a = 3;
  rows[0].n_b = 2;
  rows[0].status = Status::up;
  rows[1].protein_id = "Q\"x";
  rows[1].status = Status::exclusive_a;
  const auto text = export_table(rows);
  CHECK(text.find("\"A,B\"") != std::string::npos);
  std::size_t lines = 0;
  for (char c : text) lines += c == '\n';
  CHECK(lines == 3);
  const auto back = parse_table(text);
  REQUIRE(back.size() == 2);
  CHECK(back[0].log2fc == rows[0].log2fc);
  CHECK(back[0].t_stat == rows[0].t_stat);
  CHECK(back[0].p == rows[0].p);
  CHECK(back[0].p_adj == rows[0].p_adj);
  CHECK(back[0].posterior_var == rows[0].posterior_var);
  CHECK(back[0].gene_names == "A,B");
  CHECK(back[1].protein_id == "Q\"x");
  CHECK_FALSE(back[1].p);
  CHECK(back[1].status == Status::exclusive_a);
}

namespace {

struct Fixture {
  ExpressionMatrix m;
  ProteinTable t;
  GroupDesign d;
};

Fixture random_run(std::size_t rows, std::uint64_t seed, double missing = 0.0) {
  Fixture f{sim::random_log2(rows, 6, missing, seed), {}, ab(3, 3)};
  for (const auto& id : f.m.row_ids()) f.t.records.push_back(ProteinRecord{id});
  return f;
}

}  // namespace

TEST_CASE("swapping the comparison is antisymmetric") {
  const auto f = random_run(300, 41);
  for (auto method : {TestMethod::ordinary_t, TestMethod::moderated_t}) {
    TestConfig cfg;
    cfg.method = method;
    cfg.comparison = {"A", "B"};
    const auto x = run(f.m, f.m.mask(), f.t, f.d, cfg, 2);
    cfg.comparison = {"B", "A"};
    const auto y = run(f.m, f.m.mask(), f.t, f.d, cfg, 2);
    for (std::size_t i = 0; i < x.rows.size(); ++i) {
      CHECK(std::abs(*x.rows[i].log2fc + *y.rows[i].log2fc) <= 1e-12);
      CHECK(std::abs(*x.rows[i].t_stat + *y.rows[i].t_stat) <= 1e-12);
      CHECK(std::abs(*x.rows[i].p - *y.rows[i].p) <= 1e-12);
      CHECK(std::abs(*x.rows[i].p_adj - *y.rows[i].p_adj) <= 1e-12);
    }
  }
}

TEST_CASE("null simulation keeps the false-positive rate near nominal") {
  const auto f = random_run(2000, 99);
  for (auto method : {TestMethod::ordinary_t, TestMethod::moderated_t}) {
    TestConfig cfg;
    cfg.method = method;
    cfg.comparison = {"A", "B"};
    const auto r = run(f.m, f.m.mask(), f.t, f.d, cfg, 2);
    int hits = 0, tested = 0;
    for (const auto& row : r.rows) {
      if (!row.p) continue;
      ++tested;
      hits += *row.p <= 0.05;
    }
    const double rate = double(hits) / tested;
    CHECK(rate >= 0.03);
    CHECK(rate <= 0.07);
  }
}

TEST_CASE("row invariants hold after a full run") {
  const auto f = random_run(400, 5, 0.25);
  for (auto method : {TestMethod::ordinary_t, TestMethod::moderated_t}) {
    TestConfig cfg;
    cfg.method = method;
    cfg.fc_threshold = 0.5;
    cfg.comparison = {"A", "B"};
    const auto r = run(f.m, f.m.mask(), f.t, f.d, cfg, 2);
    CHECK(r.rows.size() == f.m.rows());
    for (const auto& row : r.rows) {
      if (row.p) {
        CHECK(*row.p >= 0.0);
        CHECK(*row.p <= 1.0);
        CHECK(*row.p_adj >= *row.p - 1e-15);
      }
      if (row.status == Status::exclusive_a || row.status == Status::exclusive_b) CHECK_FALSE(row.p);
      if (row.status == Status::up) CHECK(*row.log2fc >= cfg.fc_threshold);
      if (row.status == Status::down) CHECK(*row.log2fc <= -cfg.fc_threshold);
    }
  }
}

TEST_CASE("test config validation") {
  TestConfig cfg;
  cfg.p_threshold = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg = {};
  cfg.fc_threshold = -1;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg = {};
  cfg.comparison = {"A", "Z"};
  const auto d = ab(3, 3);
  CHECK_THROWS(cfg.validate(&d));
}
