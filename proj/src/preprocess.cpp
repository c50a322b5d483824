#include "protodown/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace protodown::preprocess {

std::string_view to_string(ValidMode m) { return m == ValidMode::each_group ? "each_group" : "at_least_one_group"; }

std::string_view to_string(Normalization n) {
  switch (n) {
    case Normalization::none: return "none";
    case Normalization::mean: return "mean";
    case Normalization::median: return "median";
    case Normalization::trimmed_mean: return "trimmed_mean";
    case Normalization::vsn_glog: return "vsn_glog";
  }
  return "";
}

std::string_view to_string(Imputation i) {
  switch (i) {
    case Imputation::none: return "none";
    case Imputation::normal_downshift: return "normal_downshift";
    case Imputation::knn: return "knn";
  }
  return "";
}

ValidMode parse_valid_mode(std::string_view text) {
  if (text == "each_group") return ValidMode::each_group;
  if (text == "at_least_one_group") return ValidMode::at_least_one_group;
  throw ValidationError("unknown valid-value mode: " + std::string(text));
}

Normalization parse_normalization(std::string_view text) {
  for (auto n : {Normalization::none, Normalization::mean, Normalization::median, Normalization::trimmed_mean,
                 Normalization::vsn_glog}) {
    if (text == to_string(n)) return n;
  }
  if (text == "vsn") return Normalization::vsn_glog;
  throw ValidationError("unknown normalization: " + std::string(text));
}

Imputation parse_imputation(std::string_view text) {
  for (auto i : {Imputation::none, Imputation::normal_downshift, Imputation::knn}) {
    if (text == to_string(i)) return i;
  }
  if (text == "downshift") return Imputation::normal_downshift;
  throw ValidationError("unknown imputation: " + std::string(text));
}

void PreprocessParams::validate() const {
  if (min_valid < 0) throw ValidationError("min_valid must be >= 0");
  if (min_unique_peptides < 0) throw ValidationError("min_unique_peptides must be >= 0");
  if (!(trim_fraction >= 0.0 && trim_fraction < 0.5)) throw ValidationError("trim_fraction must lie in [0, 0.5)");
  if (knn_k < 1) throw ValidationError("knn_k must be >= 1");
  if (!std::isfinite(downshift_shift)) throw ValidationError("downshift_shift must be finite");
  if (!std::isfinite(downshift_width) || downshift_width < 0.0) {
    throw ValidationError("downshift_width must be finite and >= 0");
  }
}

// ---------------------------------------------------------------------------

FilterResult filter_rows(const ProteinTable& table, const ExpressionMatrix& matrix, const GroupDesign& design,
                         const PreprocessParams& params) {
  if (table.size() != matrix.rows()) throw DesignError("protein table and matrix have different row counts");
  const auto counts = valid_values_per_group(matrix, design);

  FilterResult out;
  std::size_t missing_unique = 0;
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    const auto& rec = table.records[r];
    const bool flagged = std::any_of(rec.flags.begin(), rec.flags.end(),
                                     [&](ProteinFlag f) { return params.drop_flagged.count(f) > 0; });
    if (flagged) continue;

    if (params.min_unique_peptides > 0) {
      if (!rec.unique_peptide_count) {
        ++missing_unique;
      } else if (*rec.unique_peptide_count < params.min_unique_peptides) {
        continue;
      }
    }

    bool valid = params.valid_mode == ValidMode::each_group;
    for (std::size_t g = 0; g < counts.groups; ++g) {
      const bool ok = counts.at(r, g) >= params.min_valid;
      if (params.valid_mode == ValidMode::each_group) {
        valid = valid && ok;
      } else {
        valid = valid || ok;
      }
    }
    if (!valid) continue;
    out.kept_rows.push_back(r);
  }
  if (missing_unique > 0) {
    out.warnings.push_back(std::to_string(missing_unique) +
                           " rows lack unique peptide counts and passed the unique-peptide filter");
  }
  out.table = table.select_rows(out.kept_rows);
  out.matrix = matrix.select_rows(out.kept_rows);
  out.mask = out.matrix.mask();
  return out;
}

ExpressionMatrix log2_transform(const ExpressionMatrix& matrix) {
  if (matrix.scale() != Scale::linear) throw StateError("log2_transform expects a linear-scale matrix");
  ExpressionMatrix out(matrix.row_ids(), matrix.col_ids(), Scale::log2);
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    for (std::size_t c = 0; c < matrix.cols(); ++c) {
      if (matrix.observed(r, c)) out.set(r, c, std::log2(matrix.value(r, c)));
    }
  }
  return out;
}

double glog2(double y) {
  // y + sqrt(y^2 + 1) loses everything to cancellation for large negative y;
  // use the odd symmetry of asinh there.
  if (y < 0.0) return -glog2(-y);
  return std::log2(y + std::hypot(y, 1.0));
}

double column_location(std::vector<double> values, Normalization method, double trim_fraction) {
  if (values.empty()) throw NormalizationError("no observed values");
  std::sort(values.begin(), values.end());
  const auto n = values.size();
  if (method == Normalization::median) {
    return n % 2 == 1 ? values[n / 2] : (values[n / 2 - 1] + values[n / 2]) / 2.0;
  }
  // mean is the zero-trim case, so trim_fraction = 0 reproduces it exactly
  const auto cut = method == Normalization::trimmed_mean
                       ? static_cast<std::size_t>(std::floor(trim_fraction * static_cast<double>(n)))
                       : std::size_t{0};
  double sum = 0.0;
  for (std::size_t i = cut; i < n - cut; ++i) sum += values[i];
  return sum / static_cast<double>(n - 2 * cut);
}

namespace {

double mad(std::vector<double> values) {
  const double med = column_location(values, Normalization::median, 0.0);
  for (auto& v : values) v = std::abs(v - med);
  return column_location(std::move(values), Normalization::median, 0.0);
}

ExpressionMatrix normalize_vsn_glog(const ExpressionMatrix& matrix) {
  if (matrix.scale() != Scale::linear) throw StateError("vsn_glog normalization expects the linear matrix");
  std::vector<double> spread(matrix.cols());
  for (std::size_t c = 0; c < matrix.cols(); ++c) {
    auto values = matrix.observed_in_column(c);
    if (values.empty()) throw NormalizationError("column has no observed values: " + matrix.col_ids()[c]);
    spread[c] = mad(std::move(values));
    if (!(spread[c] > 0.0)) throw NormalizationError("column has zero spread: " + matrix.col_ids()[c]);
  }
  ExpressionMatrix out(matrix.row_ids(), matrix.col_ids(), Scale::log2);
  for (std::size_t c = 0; c < matrix.cols(); ++c) {
    // affine calibration: offset 0, scale so the column's MAD matches column 0
    const double b = spread[c] / spread[0];
    for (std::size_t r = 0; r < matrix.rows(); ++r) {
      if (matrix.observed(r, c)) out.set(r, c, glog2(matrix.value(r, c) / b));
    }
  }
  return out;
}

}  // namespace

ExpressionMatrix normalize(const ExpressionMatrix& matrix, Normalization method, double trim_fraction) {
  if (method == Normalization::none) return matrix;
  if (method == Normalization::vsn_glog) return normalize_vsn_glog(matrix);
  if (matrix.scale() != Scale::log2) throw StateError("normalization expects a log2-scale matrix");
  if (!(trim_fraction >= 0.0 && trim_fraction < 0.5)) throw ValidationError("trim_fraction must lie in [0, 0.5)");

  std::vector<double> location(matrix.cols());
  for (std::size_t c = 0; c < matrix.cols(); ++c) {
    auto values = matrix.observed_in_column(c);
    if (values.empty()) throw NormalizationError("column has no observed values: " + matrix.col_ids()[c]);
    location[c] = column_location(std::move(values), method, trim_fraction);
  }
  const double grand = std::accumulate(location.begin(), location.end(), 0.0) / static_cast<double>(location.size());

  ExpressionMatrix out(matrix.row_ids(), matrix.col_ids(), Scale::log2);
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    for (std::size_t c = 0; c < matrix.cols(); ++c) {
      if (matrix.observed(r, c)) out.set(r, c, matrix.value(r, c) - location[c] + grand);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

std::uint64_t cell_seed(std::uint64_t seed, std::size_t col, std::size_t row) {
  auto mix = [](std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(seed) ^ static_cast<std::uint64_t>(col)) ^ static_cast<std::uint64_t>(row));
}

ExpressionMatrix impute_normal_downshift(const ExpressionMatrix& matrix, double shift, double width,
                                         std::uint64_t seed) {
  if (matrix.scale() != Scale::log2) throw StateError("imputation expects a log2-scale matrix");
  ExpressionMatrix out = matrix;
  for (std::size_t c = 0; c < matrix.cols(); ++c) {
    const auto values = matrix.observed_in_column(c);
    if (values.empty()) throw ImputationError("column has no observed values: " + matrix.col_ids()[c]);
    const double n = static_cast<double>(values.size());
    const double mu = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double sd = 0.0;
    if (values.size() >= 2) {
      double ss = 0.0;
      for (double v : values) ss += (v - mu) * (v - mu);
      sd = std::sqrt(ss / (n - 1.0));
    }
    const double center = mu - shift * sd;
    const double spread = width * sd;
    for (std::size_t r = 0; r < matrix.rows(); ++r) {
      if (matrix.observed(r, c)) continue;
      if (!(spread > 0.0)) {
        out.set(r, c, center);
        continue;
      }
      std::mt19937_64 engine(cell_seed(seed, c, r));
      std::normal_distribution<double> normal(center, spread);
      out.set(r, c, normal(engine));
    }
  }
  return out;
}

KnnResult impute_knn(const ExpressionMatrix& matrix, int k) {
  if (k < 1) throw ValidationError("knn k must be >= 1");
  if (matrix.scale() != Scale::log2) throw StateError("imputation expects a log2-scale matrix");
  const auto rows = matrix.rows();
  const auto cols = matrix.cols();

  KnnResult out{matrix, {}};
  std::vector<double> column_mean(cols, 0.0);
  std::vector<bool> column_has_mean(cols, false);
  for (std::size_t c = 0; c < cols; ++c) {
    const auto v = matrix.observed_in_column(c);
    if (!v.empty()) {
      column_mean[c] = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
      column_has_mean[c] = true;
    }
  }

  struct Candidate {
    double distance;
    std::size_t row;
  };
  std::vector<std::size_t> missing;
  std::vector<Candidate> candidates;
  std::size_t fallback_rows = 0;

  for (std::size_t r = 0; r < rows; ++r) {
    missing.clear();
    for (std::size_t c = 0; c < cols; ++c) {
      if (!matrix.observed(r, c)) missing.push_back(c);
    }
    if (missing.empty()) continue;

    candidates.clear();
    for (std::size_t s = 0; s < rows; ++s) {
      if (s == r) continue;
      const bool covers = std::all_of(missing.begin(), missing.end(), [&](std::size_t c) { return matrix.observed(s, c); });
      if (!covers) continue;
      double sum = 0.0;
      std::size_t overlap = 0;
      for (std::size_t c = 0; c < cols; ++c) {
        if (matrix.observed(r, c) && matrix.observed(s, c)) {
          const double d = matrix.value(r, c) - matrix.value(s, c);
          sum += d * d;
          ++overlap;
        }
      }
      if (overlap == 0) continue;
      candidates.push_back({std::sqrt(sum) / std::sqrt(static_cast<double>(overlap)), s});
    }

    if (candidates.empty()) {
      ++fallback_rows;
      for (auto c : missing) {
        if (!column_has_mean[c]) throw ImputationError("column has no observed values: " + matrix.col_ids()[c]);
        out.matrix.set(r, c, column_mean[c]);
      }
      continue;
    }
    const auto take = std::min(candidates.size(), static_cast<std::size_t>(k));
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(take), candidates.end(),
                      [](const Candidate& a, const Candidate& b) {
                        return a.distance < b.distance || (a.distance == b.distance && a.row < b.row);
                      });
    for (auto c : missing) {
      double weighted = 0.0;
      double total = 0.0;
      for (std::size_t i = 0; i < take; ++i) {
        const double w = 1.0 / (candidates[i].distance + 1e-12);
        weighted += w * matrix.value(candidates[i].row, c);
        total += w;
      }
      out.matrix.set(r, c, weighted / total);
    }
  }
  if (fallback_rows > 0) {
    out.warnings.push_back(std::to_string(fallback_rows) +
                           " rows had no eligible neighbour and were imputed with column means");
  }
  return out;
}

// ---------------------------------------------------------------------------

VennResult venn_sets(const MissingnessMask& mask, const ExpressionMatrix& ids, const GroupDesign& design,
                     int min_valid) {
  const auto g = design.groups.size();
  if (g < 2) throw UnsupportedError("Venn diagrams need at least 2 groups");
  if (g > 4) throw UnsupportedError("Venn diagrams support at most 4 groups");
  const auto counts = valid_values_per_group(mask, ids, design);
  // a protein with no observation is never a member
  const int threshold = std::max(1, min_valid);

  VennResult out;
  out.sets.resize(g);
  out.regions.assign((std::size_t{1} << g) - 1, 0);
  for (const auto& grp : design.groups) out.groups.push_back(grp.name);
  for (std::size_t r = 0; r < counts.rows; ++r) {
    std::size_t bits = 0;
    for (std::size_t j = 0; j < g; ++j) {
      if (counts.at(r, j) >= threshold) {
        bits |= std::size_t{1} << j;
        out.sets[j].push_back(ids.row_ids()[r]);
      }
    }
    if (bits != 0) ++out.regions[bits - 1];
  }
  return out;
}

// ---------------------------------------------------------------------------

PreprocessResult run(const ProteinTable& table, const ExpressionMatrix& linear, const GroupDesign& design,
                     const PreprocessParams& params) {
  params.validate();
  if (linear.scale() != Scale::linear) throw StateError("preprocess expects the linear ingest matrix");
  auto filtered = filter_rows(table, linear, design, params);
  if (filtered.matrix.rows() == 0) throw DegenerateDataError("no protein passed the filters");

  PreprocessResult out;
  out.table = std::move(filtered.table);
  out.mask = std::move(filtered.mask);
  out.warnings = std::move(filtered.warnings);
  out.log2 = log2_transform(filtered.matrix);
  out.normalized = params.normalization == Normalization::vsn_glog
                       ? normalize(filtered.matrix, Normalization::vsn_glog)
                       : normalize(out.log2, params.normalization, params.trim_fraction);
  switch (params.imputation) {
    case Imputation::none: out.imputed = out.normalized; break;
    case Imputation::normal_downshift:
      out.imputed = impute_normal_downshift(out.normalized, params.downshift_shift, params.downshift_width,
                                            params.rng_seed);
      break;
    case Imputation::knn: {
      auto knn = impute_knn(out.normalized, params.knn_k);
      out.imputed = std::move(knn.matrix);
      out.warnings.insert(out.warnings.end(), knn.warnings.begin(), knn.warnings.end());
      break;
    }
  }
  return out;
}

}  // namespace protodown::preprocess
