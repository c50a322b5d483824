#include "protodown/qc.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SVD>

#include "protodown/stats.hpp"

namespace protodown::qc {

std::string_view to_string(PlotKind k) {
  switch (k) {
    case PlotKind::boxplot: return "boxplot";
    case PlotKind::histogram: return "histogram";
    case PlotKind::qq: return "qq";
    case PlotKind::imputation_overlay: return "imputation_overlay";
    case PlotKind::dispersion: return "dispersion";
    case PlotKind::scatter: return "scatter";
    case PlotKind::correlation_matrix: return "correlation_matrix";
    case PlotKind::pca: return "pca";
  }
  return "";
}

const std::vector<double>& PlotData::get(const std::string& name) const {
  for (const auto& [n, v] : series) {
    if (n == name) return v;
  }
  throw NotFoundError("plot series not found: " + name);
}

void PlotData::validate() const {
  for (const auto& [name, values] : series) {
    for (double v : values) {
      if (!std::isfinite(v)) throw StateError("non-finite value in plot series " + name);
    }
  }
}

// ---------------------------------------------------------------------------

BoxStats box_stats(std::string column, std::vector<double> values) {
  if (values.empty()) throw DegenerateDataError("column has no observed values: " + column, column);
  std::sort(values.begin(), values.end());
  BoxStats b;
  b.column = std::move(column);
  b.min = values.front();
  b.max = values.back();
  b.q1 = stats::quantile_sorted(values, 0.25);
  b.median = stats::quantile_sorted(values, 0.5);
  b.q3 = stats::quantile_sorted(values, 0.75);
  const double iqr = b.q3 - b.q1;
  const double lo = b.q1 - 1.5 * iqr;
  const double hi = b.q3 + 1.5 * iqr;
  b.lower_whisker = b.q1;
  b.upper_whisker = b.q3;
  for (double v : values) {
    if (v < lo || v > hi) {
      b.outliers.push_back(v);
      continue;
    }
    b.lower_whisker = std::min(b.lower_whisker, v);
    b.upper_whisker = std::max(b.upper_whisker, v);
  }
  return b;
}

std::vector<BoxStats> boxplot_stats(const ExpressionMatrix& matrix) {
  if (matrix.scale() != Scale::log2) throw StateError("boxplot expects a log2-scale matrix");
  std::vector<BoxStats> out;
  for (std::size_t c = 0; c < matrix.cols(); ++c) out.push_back(box_stats(matrix.col_ids()[c], matrix.observed_in_column(c)));
  return out;
}

// ---------------------------------------------------------------------------

std::vector<double> bin_counts(std::span<const double> values, std::span<const double> edges) {
  if (edges.size() < 2) throw ValidationError("histogram needs at least one bin");
  std::vector<double> counts(edges.size() - 1, 0.0);
  for (double v : values) {
    if (v < edges.front() || v > edges.back()) continue;
    auto it = std::upper_bound(edges.begin(), edges.end(), v);
    auto bin = static_cast<std::size_t>(it - edges.begin());
    bin = bin == 0 ? 0 : bin - 1;
    if (bin >= counts.size()) bin = counts.size() - 1;
    counts[bin] += 1.0;
  }
  return counts;
}

namespace {

std::vector<double> make_edges(std::span<const double> values, std::size_t bins) {
  if (values.empty()) throw DegenerateDataError("histogram needs at least one observed value");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double lo = sorted.front();
  const double hi = sorted.back();
  const double range = hi - lo;
  if (!(range > 0.0)) return {lo - 0.5, lo + 0.5};
  if (bins == 0) {
    const double iqr = stats::quantile_sorted(sorted, 0.75) - stats::quantile_sorted(sorted, 0.25);
    if (iqr > 0.0) {
      const double width = 2.0 * iqr / std::cbrt(static_cast<double>(sorted.size()));
      bins = static_cast<std::size_t>(std::ceil(range / width));
      bins = std::clamp<std::size_t>(bins, 1, 1000);
    } else {
      bins = 10;
    }
  }
  std::vector<double> edges(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) edges[i] = lo + range * static_cast<double>(i) / static_cast<double>(bins);
  edges.back() = hi;
  return edges;
}

}  // namespace

Histogram histogram(std::span<const double> values, std::size_t bins) {
  Histogram h;
  h.edges = make_edges(values, bins);
  h.counts = bin_counts(values, h.edges);
  return h;
}

// ---------------------------------------------------------------------------

QQPoints qq_points(std::span<const double> values) {
  if (values.size() < 3) throw DegenerateDataError("Q-Q plot needs at least 3 observed values");
  const double m = stats::mean(values);
  const double sd = std::sqrt(stats::variance(values));
  if (!(sd > 0.0)) throw DegenerateDataError("Q-Q plot needs a non-zero standard deviation");
  QQPoints out;
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    out.theoretical.push_back(stats::normal_quantile((static_cast<double>(i) + 0.5) / n));
    out.sample.push_back((sorted[i] - m) / sd);
  }
  return out;
}

ImputationOverlay imputation_overlay(const ExpressionMatrix& imputed, const MissingnessMask& mask) {
  if (mask.rows() != imputed.rows() || mask.cols() != imputed.cols()) {
    throw StateError("mask shape does not match the imputed matrix");
  }
  std::vector<double> observed;
  std::vector<double> filled;
  for (std::size_t r = 0; r < imputed.rows(); ++r) {
    for (std::size_t c = 0; c < imputed.cols(); ++c) {
      if (!imputed.observed(r, c)) continue;
      (mask.observed(r, c) ? observed : filled).push_back(imputed.value(r, c));
    }
  }
  std::vector<double> all = observed;
  all.insert(all.end(), filled.begin(), filled.end());
  ImputationOverlay out;
  out.edges = make_edges(all, 0);
  out.observed = bin_counts(observed, out.edges);
  out.imputed = filled.empty() ? std::vector<double>{} : bin_counts(filled, out.edges);
  return out;
}

// ---------------------------------------------------------------------------

std::vector<std::vector<double>> correlation_matrix(const ExpressionMatrix& matrix) {
  const auto n = matrix.cols();
  std::vector<std::vector<double>> r(n, std::vector<double>(n, 1.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      std::vector<double> x;
      std::vector<double> y;
      for (std::size_t k = 0; k < matrix.rows(); ++k) {
        if (matrix.observed(k, i) && matrix.observed(k, j)) {
          x.push_back(matrix.value(k, i));
          y.push_back(matrix.value(k, j));
        }
      }
      const std::string pair = matrix.col_ids()[i] + " / " + matrix.col_ids()[j];
      if (x.size() < 3) throw DegenerateDataError("fewer than 3 shared observations for " + pair, pair);
      const double v = stats::pearson(x, y);
      if (!std::isfinite(v)) throw DegenerateDataError("zero variance within shared observations for " + pair, pair);
      r[i][j] = r[j][i] = std::clamp(v, -1.0, 1.0);
    }
  }
  return r;
}

// ---------------------------------------------------------------------------

PcaResult pca(const ExpressionMatrix& matrix, bool drop_incomplete, bool scale) {
  std::vector<std::size_t> features;
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    bool complete = true;
    for (std::size_t c = 0; c < matrix.cols(); ++c) complete = complete && matrix.observed(r, c);
    if (complete) {
      features.push_back(r);
    } else if (!drop_incomplete) {
      throw StateError("PCA needs a complete matrix; impute first or drop incomplete rows");
    }
  }
  const auto samples = matrix.cols();
  if (samples < 2 || features.size() < 2) throw DegenerateDataError("PCA needs at least 2 samples and 2 proteins");

  Eigen::MatrixXd x(static_cast<Eigen::Index>(samples), static_cast<Eigen::Index>(features.size()));
  for (std::size_t f = 0; f < features.size(); ++f) {
    for (std::size_t s = 0; s < samples; ++s) {
      x(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(f)) = matrix.value(features[f], s);
    }
  }
  for (Eigen::Index f = 0; f < x.cols(); ++f) {
    x.col(f).array() -= x.col(f).mean();
    if (scale) {
      const double sd = std::sqrt(x.col(f).squaredNorm() / static_cast<double>(samples - 1));
      if (sd > 0.0) x.col(f) /= sd;
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd sv = svd.singularValues();
  Eigen::MatrixXd scores = svd.matrixU() * sv.asDiagonal();
  Eigen::MatrixXd loadings = svd.matrixV();
  const double total = sv.squaredNorm();
  if (!(total > 0.0)) throw DegenerateDataError("PCA input has zero variance");

  for (Eigen::Index k = 0; k < loadings.cols(); ++k) {
    Eigen::Index arg = 0;
    loadings.col(k).cwiseAbs().maxCoeff(&arg);
    if (loadings(arg, k) < 0.0) {
      loadings.col(k) *= -1.0;
      scores.col(k) *= -1.0;
    }
  }

  PcaResult out;
  out.samples = matrix.col_ids();
  for (auto f : features) out.features.push_back(matrix.row_ids()[f]);
  out.scores.assign(samples, std::vector<double>(static_cast<std::size_t>(scores.cols())));
  for (std::size_t s = 0; s < samples; ++s) {
    for (Eigen::Index k = 0; k < scores.cols(); ++k) out.scores[s][static_cast<std::size_t>(k)] = scores(static_cast<Eigen::Index>(s), k);
  }
  out.loadings.assign(features.size(), std::vector<double>(static_cast<std::size_t>(loadings.cols())));
  for (std::size_t f = 0; f < features.size(); ++f) {
    for (Eigen::Index k = 0; k < loadings.cols(); ++k) out.loadings[f][static_cast<std::size_t>(k)] = loadings(static_cast<Eigen::Index>(f), k);
  }
  for (Eigen::Index k = 0; k < sv.size(); ++k) out.variance_explained.push_back(sv(k) * sv(k) / total);
  return out;
}

// ---------------------------------------------------------------------------

std::vector<DispersionRow> dispersion_stats(const ExpressionMatrix& matrix) {
  if (matrix.scale() != Scale::log2) throw StateError("dispersion expects a log2-scale matrix");
  std::vector<DispersionRow> out;
  const double ln2 = std::log(2.0);
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    const auto v = matrix.observed_in_row(r);
    if (v.size() < 2) continue;
    const double sd = std::sqrt(stats::variance(v));
    const double s = sd * ln2;
    out.push_back({matrix.row_ids()[r], stats::mean(v), sd, std::sqrt(std::expm1(s * s))});
  }
  return out;
}

ScatterData scatter(const ExpressionMatrix& matrix, const std::string& x_column, const std::string& y_column) {
  const auto xi = matrix.column_index(x_column);
  const auto yi = matrix.column_index(y_column);
  ScatterData out{x_column, y_column, {}, {}, {}};
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    if (!matrix.observed(r, xi) || !matrix.observed(r, yi)) continue;
    out.ids.push_back(matrix.row_ids()[r]);
    out.x.push_back(matrix.value(r, xi));
    out.y.push_back(matrix.value(r, yi));
  }
  return out;
}

// ---------------------------------------------------------------------------
// PlotData converters

PlotData to_plot(const std::vector<BoxStats>& boxes) {
  PlotData p{PlotKind::boxplot, {}, {}, {{"x_label", "sample"}, {"y_label", "log2 intensity"}}};
  std::vector<std::string> names;
  std::vector<double> mn, q1, md, q3, mx, lw, uw, out_x, out_y;
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const auto& b = boxes[i];
    names.push_back(b.column);
    mn.push_back(b.min);
    q1.push_back(b.q1);
    md.push_back(b.median);
    q3.push_back(b.q3);
    mx.push_back(b.max);
    lw.push_back(b.lower_whisker);
    uw.push_back(b.upper_whisker);
    for (double o : b.outliers) {
      out_x.push_back(static_cast<double>(i));
      out_y.push_back(o);
    }
  }
  p.series = {{"min", mn}, {"q1", q1}, {"median", md}, {"q3", q3}, {"max", mx}, {"lower_whisker", lw},
              {"upper_whisker", uw}, {"outlier_index", out_x}, {"outlier_value", out_y}};
  p.labels = {{"samples", names}};
  return p;
}

PlotData to_plot(const Histogram& h, const std::string& title) {
  PlotData p{PlotKind::histogram, {{"edges", h.edges}, {"counts", h.counts}}, {}, {}};
  p.meta = {{"title", title}, {"x_label", "log2 intensity"}, {"y_label", "count"}};
  return p;
}

PlotData to_plot(const QQPoints& q, const std::string& column) {
  PlotData p{PlotKind::qq, {{"theoretical", q.theoretical}, {"sample", q.sample}}, {}, {}};
  p.meta = {{"column", column}, {"x_label", "theoretical quantile"}, {"y_label", "standardized sample quantile"}};
  return p;
}

PlotData to_plot(const ImputationOverlay& o) {
  PlotData p{PlotKind::imputation_overlay, {{"edges", o.edges}, {"observed", o.observed}, {"imputed", o.imputed}}, {}, {}};
  p.meta = {{"x_label", "log2 intensity"}, {"y_label", "count"}};
  return p;
}

PlotData to_plot(const std::vector<DispersionRow>& rows) {
  PlotData p{PlotKind::dispersion, {}, {}, {{"x_label", "mean log2 intensity"}, {"y_label", "SD of log2 intensity"}}};
  std::vector<std::string> ids;
  std::vector<double> mean, sd, cv;
  for (const auto& r : rows) {
    ids.push_back(r.protein_id);
    mean.push_back(r.mean);
    sd.push_back(r.sd);
    cv.push_back(r.cv);
  }
  p.series = {{"mean", mean}, {"sd", sd}, {"cv", cv}};
  p.labels = {{"protein_id", ids}};
  return p;
}

PlotData to_plot(const ScatterData& s) {
  PlotData p{PlotKind::scatter, {{"x", s.x}, {"y", s.y}}, {{"protein_id", s.ids}}, {}};
  p.meta = {{"x_label", s.x_column}, {"y_label", s.y_column}};
  return p;
}

PlotData correlation_plot(const std::vector<std::vector<double>>& r, const std::vector<std::string>& samples) {
  PlotData p{PlotKind::correlation_matrix, {}, {{"samples", samples}}, {}};
  std::vector<double> flat;
  for (const auto& row : r) flat.insert(flat.end(), row.begin(), row.end());
  p.series = {{"r", flat}};
  p.meta = {{"n", std::to_string(samples.size())}};
  return p;
}

PlotData to_plot(const PcaResult& pc, const GroupDesign* design) {
  PlotData p{PlotKind::pca, {}, {{"samples", pc.samples}}, {}};
  const auto k = pc.variance_explained.size();
  for (std::size_t c = 0; c < k; ++c) {
    std::vector<double> col;
    for (const auto& s : pc.scores) col.push_back(s[c]);
    p.series.emplace_back("PC" + std::to_string(c + 1), std::move(col));
  }
  p.series.emplace_back("variance_explained", pc.variance_explained);
  if (design) {
    std::vector<std::string> groups;
    for (const auto& s : pc.samples) {
      std::string name;
      for (const auto& g : design->groups) {
        if (std::find(g.columns.begin(), g.columns.end(), s) != g.columns.end()) name = g.name;
      }
      groups.push_back(name);
    }
    p.labels.emplace_back("groups", std::move(groups));
  }
  p.meta = {{"x_label", "PC1"}, {"y_label", "PC2"}};
  return p;
}

}  // namespace protodown::qc
