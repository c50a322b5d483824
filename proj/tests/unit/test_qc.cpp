#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "protodown/qc.hpp"
#include "protodown/stats.hpp"
#include "sim.hpp"

using namespace protodown;
using namespace protodown::qc;

namespace {

ExpressionMatrix columns(const std::vector<std::vector<double>>& cols) {
  std::vector<std::string> r, c;
  for (std::size_t i = 0; i < cols[0].size(); ++i) r.push_back("r" + std::to_string(i));
  for (std::size_t j = 0; j < cols.size(); ++j) c.push_back("c" + std::to_string(j));
  ExpressionMatrix m(r, c, Scale::log2);
  for (std::size_t j = 0; j < cols.size(); ++j)
    for (std::size_t i = 0; i < cols[j].size(); ++i)
      if (!std::isnan(cols[j][i])) m.set(i, j, cols[j][i]);
  return m;
}

}  // namespace

TEST_CASE("box statistics") {
  auto b = box_stats("x", {1, 2, 3, 4, 5});
  CHECK(b.q1 == 2);
  CHECK(b.median == 3);
  CHECK(b.q3 == 4);
  CHECK(b.outliers.empty());
  CHECK(b.lower_whisker == 1);
  CHECK(b.upper_whisker == 5);

  b = box_stats("x", {2, 2, 2});
  CHECK(b.q1 == b.q3);
  CHECK(b.outliers.empty());

  b = box_stats("x", {1, 2, 3, 4, 100});
  CHECK(b.outliers == std::vector<double>{100});
  CHECK(b.upper_whisker == 4);

  const auto m = columns({{1, 2, NAN}, {NAN, NAN, NAN}});
  CHECK_THROWS_AS(boxplot_stats(m), Error);
}

TEST_CASE("histogram conservation and degenerate cases") {
  const auto m = sim::random_log2(300, 1, 0.1, 4);
  const auto v = m.observed_in_column(0);
  const auto h = histogram(v);
  double total = 0;
  for (double c : h.counts) total += c;
  CHECK(total == double(v.size()));
  CHECK(h.edges.size() == h.counts.size() + 1);

  const std::vector<double> one = {4.2};
  const auto s = histogram(one);
  CHECK(s.counts.size() == 1);
  CHECK(s.counts[0] == 1);
  CHECK(s.edges.front() <= 4.2);
  CHECK(s.edges.back() >= 4.2);

  const std::vector<double> flat = {1, 1, 1, 1};
  CHECK(histogram(flat).counts == std::vector<double>{4});
  const std::vector<double> spiky = {1, 1, 1, 1, 1, 1, 5};
  CHECK(histogram(spiky).counts.size() == 10);
}

TEST_CASE("uniform draws give a flat Freedman-Diaconis histogram") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(10000);
  for (auto& x : v) x = u(rng);
  const auto h = histogram(v);
  const auto [lo, hi] = std::minmax_element(h.counts.begin(), h.counts.end());
  CHECK(*hi / *lo < 1.5);
}

TEST_CASE("q-q points") {
  std::vector<double> v;
  for (int i = 0; i < 200; ++i) v.push_back(stats::normal_quantile((i + 0.5) / 200.0));
  auto q = qq_points(v);
  // standardisation rescales slightly; compare after removing the sample sd
  double mean = 0, ss = 0;
  for (double x : v) mean += x;
  mean /= 200;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / 199);
  double worst = 0;
  for (std::size_t i = 0; i < 200; ++i) worst = std::max(worst, std::abs(q.sample[i] * sd - q.theoretical[i]));
  CHECK(worst < 1e-6);

  const std::vector<double> three = {1, 2, 4};
  q = qq_points(three);
  CHECK(q.theoretical[0] == doctest::Approx(stats::normal_quantile(1.0 / 6)));
  CHECK(q.theoretical[1] == doctest::Approx(0.0));
  CHECK(q.theoretical[0] == doctest::Approx(-q.theoretical[2]));

  const std::vector<double> flat = {3, 3, 3};
  CHECK_THROWS_AS(qq_points(flat), Error);
}

TEST_CASE("normal quantile accuracy") {
  CHECK(stats::normal_quantile(0.5) == doctest::Approx(0.0));
  CHECK(std::abs(stats::normal_quantile(0.975) - 1.959963984540054) < 1e-8);
  CHECK(std::abs(stats::normal_quantile(1e-6) + 4.753424308822899) < 1e-8);
}

TEST_CASE("imputation overlay splits cells by the mask") {
  const auto raw = sim::random_log2(100, 4, 0.2, 9);
  auto filled = raw;
  for (std::size_t i = 0; i < raw.rows(); ++i)
    for (std::size_t j = 0; j < raw.cols(); ++j)
      if (!raw.observed(i, j)) filled.set(i, j, 15.0);
  const auto o = imputation_overlay(filled, raw.mask());
  double obs = 0, imp = 0;
  for (double c : o.observed) obs += c;
  for (double c : o.imputed) imp += c;
  CHECK(obs == double(raw.observed_count()));
  CHECK(imp == double(400 - raw.observed_count()));
}

TEST_CASE("correlation") {
  const auto m = columns({{1, 2, 3, 4}, {3, 5, 7, 9}, {-1, -2, -3, -4}});
  const auto r = correlation_matrix(m);
  CHECK(r[0][0] == 1.0);
  CHECK(r[0][1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r[0][2] == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(r[1][2] == r[2][1]);

  const auto thin = columns({{1, 2, NAN, NAN}, {NAN, 1, 2, 3}});
  CHECK_THROWS_AS(correlation_matrix(thin), Error);
}

TEST_CASE("correlation on complete data is positive semidefinite") {
  const auto m = sim::random_log2(60, 6, 0.0, 13);
  const auto r = correlation_matrix(m);
  Eigen::MatrixXd e(6, 6);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) e(i, j) = r[i][j];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(e);
  CHECK(es.eigenvalues().minCoeff() >= -1e-9);
}

TEST_CASE("pca") {
  SUBCASE("rank one") {
    const auto m = columns({{0, 0}, {2, 2}});
    const auto p = pca(m);
    CHECK(p.variance_explained[0] == doctest::Approx(1.0));
  }
  SUBCASE("reconstruction, orthogonality, sign convention") {
    const auto m = sim::random_log2(50, 6, 0.0, 23);
    const auto p = pca(m);
    double sum = 0;
    for (double v : p.variance_explained) sum += v;
    CHECK(std::abs(sum - 1.0) < 1e-9);
    const auto k = p.variance_explained.size();
    double worst = 0;
    for (std::size_t s = 0; s < 6; ++s) {
      for (std::size_t f = 0; f < 50; ++f) {
        double mean = 0;
        for (std::size_t t = 0; t < 6; ++t) mean += m.value(f, t);
        mean /= 6;
        double rec = 0;
        for (std::size_t c = 0; c < k; ++c) rec += p.scores[s][c] * p.loadings[f][c];
        worst = std::max(worst, std::abs(rec - (m.value(f, s) - mean)));
      }
    }
    CHECK(worst < 1e-8);
    double trace = 0;
    for (std::size_t c = 0; c < k; ++c)
      for (std::size_t s = 0; s < 6; ++s) trace += p.scores[s][c] * p.scores[s][c];
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t b = a + 1; b < k; ++b) {
        double dot = 0;
        for (std::size_t s = 0; s < 6; ++s) dot += p.scores[s][a] * p.scores[s][b];
        CHECK(std::abs(dot) < 1e-8 * trace);
      }
    }
    for (std::size_t c = 0; c < k; ++c) {
      double best = 0;
      for (std::size_t f = 0; f < 50; ++f)
        if (std::abs(p.loadings[f][c]) > std::abs(best)) best = p.loadings[f][c];
      CHECK(best > 0);
    }
  }
  SUBCASE("missing values") {
    const auto m = sim::random_log2(20, 4, 0.2, 2);
    CHECK_THROWS_AS(pca(m), StateError);
    CHECK_NOTHROW(pca(m, true));
  }
}

TEST_CASE("dispersion") {
  const auto m = columns({{2, 1, 5}, {2, 3, NAN}, {2, NAN, NAN}});
  const auto d = dispersion_stats(m);
  REQUIRE(d.size() == 2);
  CHECK(d[0].sd == 0.0);
  CHECK(d[1].mean == 2.0);
  CHECK(d[1].sd == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("plot payloads are finite") {
  const auto m = sim::random_log2(80, 4, 0.0, 3);
  CHECK_NOTHROW(to_plot(boxplot_stats(m)).validate());
  const auto col = m.observed_in_column(0);
  CHECK_NOTHROW(to_plot(histogram(col), "c").validate());
  CHECK_NOTHROW(to_plot(qq_points(col), "c").validate());
  CHECK_NOTHROW(to_plot(dispersion_stats(m)).validate());
  CHECK_NOTHROW(to_plot(scatter(m, "S0", "S1")).validate());
  CHECK_NOTHROW(correlation_plot(correlation_matrix(m), m.col_ids()).validate());
  CHECK_NOTHROW(to_plot(pca(m), nullptr).validate());

  PlotData bad{PlotKind::scatter, {{"x", {1.0, NAN}}}, {}, {}};
  CHECK_THROWS_AS(bad.validate(), StateError);
}

TEST_CASE("scatter skips rows missing in either column") {
  const auto m = columns({{1, 2, NAN}, {4, NAN, 6}});
  const auto s = scatter(m, "c0", "c1");
  CHECK(s.ids == std::vector<std::string>{"r0"});
  CHECK_THROWS_AS(scatter(m, "c0", "zz"), Error);
}
