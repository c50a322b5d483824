#include "protodown/diffexpr.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "protodown/ingest.hpp"
#include "protodown/stats.hpp"

namespace protodown::diffexpr {

std::string_view to_string(TestMethod m) {
  switch (m) {
    case TestMethod::ordinary_t: return "ordinary_t";
    case TestMethod::moderated_t: return "moderated_t";
    case TestMethod::moderated_t_psm: return "moderated_t_psm";
  }
  return "";
}

std::string_view to_string(Status s) {
  switch (s) {
    case Status::up: return "up";
    case Status::down: return "down";
    case Status::not_significant: return "not_significant";
    case Status::exclusive_a: return "exclusive_a";
    case Status::exclusive_b: return "exclusive_b";
    case Status::untested: return "untested";
  }
  return "";
}

TestMethod parse_method(std::string_view text) {
  for (auto m : {TestMethod::ordinary_t, TestMethod::moderated_t, TestMethod::moderated_t_psm}) {
    if (text == to_string(m)) return m;
  }
  throw ValidationError("unknown test method: " + std::string(text));
}

Status parse_status(std::string_view text) {
  for (auto s : {Status::up, Status::down, Status::not_significant, Status::exclusive_a, Status::exclusive_b,
                 Status::untested}) {
    if (text == to_string(s)) return s;
  }
  throw FormatError("unknown status: " + std::string(text));
}

void TestConfig::validate(const GroupDesign* design) const {
  if (!(fc_threshold >= 0.0) || !std::isfinite(fc_threshold)) throw ValidationError("fc_threshold must be >= 0");
  if (!(p_threshold > 0.0 && p_threshold <= 1.0)) throw ValidationError("p_threshold must lie in (0, 1]");
  if (paired && method != TestMethod::ordinary_t) {
    throw ConfigError("paired tests are only available with ordinary_t; moderated tests use pooled variance");
  }
  if (!comparison.configured()) return;
  if (comparison.group_a == comparison.group_b) throw ConfigError("comparison needs two different groups");
  if (design) {
    const auto& a = design->group(comparison.group_a);
    const auto& b = design->group(comparison.group_b);
    if (paired && a.columns.size() != b.columns.size()) {
      throw ConfigError("paired test needs equal group sizes (" + std::to_string(a.columns.size()) + " vs " +
                        std::to_string(b.columns.size()) + ")");
    }
  }
}

// ---------------------------------------------------------------------------

namespace {

struct ComparisonColumns {
  std::vector<std::size_t> a;
  std::vector<std::size_t> b;
};

ComparisonColumns comparison_columns(const ExpressionMatrix& matrix, const GroupDesign& design,
                                     const Comparison& comparison) {
  if (!comparison.configured()) throw StateError("comparison not configured");
  const auto sub = design.subset({comparison.group_a, comparison.group_b});
  auto cols = resolve_columns(matrix, sub);
  return {std::move(cols[0]), std::move(cols[1])};
}

std::vector<double> observed(const ExpressionMatrix& m, std::size_t r, const std::vector<std::size_t>& cols) {
  std::vector<double> out;
  out.reserve(cols.size());
  for (auto c : cols) {
    if (m.observed(r, c)) out.push_back(m.value(r, c));
  }
  return out;
}

TestStat finish(double t, double df, double se) {
  TestStat s;
  s.t = t;
  s.df = df;
  s.se = se;
  s.p = stats::t_two_sided_p(t, df);
  return s;
}

}  // namespace

std::vector<GroupMeans> group_means_fc(const ExpressionMatrix& matrix, const GroupDesign& design,
                                       const Comparison& comparison) {
  if (matrix.scale() != Scale::log2) throw StateError("group means expect a log2-scale matrix");
  const auto cols = comparison_columns(matrix, design, comparison);
  std::vector<GroupMeans> out(matrix.rows());
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    const auto a = observed(matrix, r, cols.a);
    const auto b = observed(matrix, r, cols.b);
    auto& g = out[r];
    g.n_a = static_cast<int>(a.size());
    g.n_b = static_cast<int>(b.size());
    if (!a.empty()) g.mean_a = stats::mean(a);
    if (!b.empty()) g.mean_b = stats::mean(b);
    if (g.mean_a && g.mean_b) g.log2fc = *g.mean_a - *g.mean_b;
  }
  return out;
}

TestStat welch_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) return {};
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double qa = stats::variance(a) / na;
  const double qb = stats::variance(b) / nb;
  const double se = std::sqrt(qa + qb);
  if (!(se > 0.0)) return {};
  const double df = (qa + qb) * (qa + qb) / (qa * qa / (na - 1.0) + qb * qb / (nb - 1.0));
  return finish((stats::mean(a) - stats::mean(b)) / se, df, se);
}

TestStat pooled_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) return {};
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double df = na + nb - 2.0;
  const double s2 = ((na - 1.0) * stats::variance(a) + (nb - 1.0) * stats::variance(b)) / df;
  const double se = std::sqrt(s2 * (1.0 / na + 1.0 / nb));
  if (!(se > 0.0)) return {};
  return finish((stats::mean(a) - stats::mean(b)) / se, df, se);
}

TestStat paired_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) return {};
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  const double n = static_cast<double>(d.size());
  const double se = std::sqrt(stats::variance(d) / n);
  if (!(se > 0.0)) return {};
  return finish(stats::mean(d) / se, n - 1.0, se);
}

std::vector<TestStat> ordinary_t(const ExpressionMatrix& matrix, const GroupDesign& design, const TestConfig& cfg) {
  cfg.validate(&design);
  const auto cols = comparison_columns(matrix, design, cfg.comparison);
  std::vector<TestStat> out(matrix.rows());
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    if (cfg.paired) {
      std::vector<double> a;
      std::vector<double> b;
      bool complete = true;
      for (std::size_t i = 0; i < cols.a.size(); ++i) {
        if (!matrix.observed(r, cols.a[i]) || !matrix.observed(r, cols.b[i])) {
          complete = false;
          break;
        }
        a.push_back(matrix.value(r, cols.a[i]));
        b.push_back(matrix.value(r, cols.b[i]));
      }
      if (complete) out[r] = paired_test(a, b);
      continue;
    }
    const auto a = observed(matrix, r, cols.a);
    const auto b = observed(matrix, r, cols.b);
    out[r] = cfg.equal_variance ? pooled_test(a, b) : welch_test(a, b);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Empirical Bayes

namespace {

struct PriorMoments {
  double d0;
  double mean_e;
};

/// d0 from var(residual) - mean trigamma(d/2).
double estimate_d0(std::span<const double> residuals, std::span<const double> dfs) {
  const double var_e = stats::variance(residuals);
  double mean_tri = 0.0;
  for (double d : dfs) mean_tri += stats::trigamma(d / 2.0);
  mean_tri /= static_cast<double>(dfs.size());
  const double rhs = var_e - mean_tri;
  if (rhs <= 1e-12) return kDfCap;
  return std::min(2.0 * stats::trigamma_inverse(rhs), kDfCap);
}

/// log-scale correction turning E[ln sigma^2] into the scale parameter of a
/// scaled inverse chi-square with d0 degrees of freedom.
double prior_scale_shift(double d0) { return stats::digamma(d0 / 2.0) - std::log(d0 / 2.0); }

}  // namespace

EBayesFit fit_ebayes(std::span<const double> variances, std::span<const double> dfs) {
  if (variances.size() != dfs.size()) throw ValidationError("variances and dfs differ in length");
  std::vector<double> e;
  std::vector<double> d;
  for (std::size_t i = 0; i < variances.size(); ++i) {
    const double s2 = variances[i];
    const double dg = dfs[i];
    if (!(std::isfinite(s2) && s2 > 0.0 && std::isfinite(dg) && dg > 0.0)) continue;
    e.push_back(std::log(s2) - stats::digamma(dg / 2.0) + std::log(dg / 2.0));
    d.push_back(dg);
  }
  if (e.empty()) throw DegenerateDataError("all variances are zero or undefined");
  if (e.size() < 10) {
    throw DegenerateDataError("empirical Bayes needs at least 10 rows with positive variance, got " +
                              std::to_string(e.size()));
  }
  EBayesFit fit;
  fit.d0 = estimate_d0(e, d);
  fit.s0_sq = std::exp(stats::mean(e) + prior_scale_shift(fit.d0));
  return fit;
}

std::vector<PooledRow> pooled_rows(const ExpressionMatrix& matrix, const GroupDesign& design,
                                   const Comparison& comparison) {
  const auto cols = comparison_columns(matrix, design, comparison);
  std::vector<PooledRow> out(matrix.rows());
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    const auto a = observed(matrix, r, cols.a);
    const auto b = observed(matrix, r, cols.b);
    auto& row = out[r];
    row.n_a = static_cast<int>(a.size());
    row.n_b = static_cast<int>(b.size());
    if (a.empty() || b.empty()) continue;
    row.log2fc = stats::mean(a) - stats::mean(b);
    row.d = static_cast<double>(a.size() + b.size()) - 2.0;
    if (row.d < 1.0) continue;
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    row.s2 = ((na - 1.0) * stats::variance(a) + (nb - 1.0) * stats::variance(b)) / row.d;
  }
  return out;
}

TestStat moderated_row(const PooledRow& row, double d0, double prior_var) {
  if (!row.log2fc || !row.s2 || row.d < 1.0) return {};
  const double post = (d0 * prior_var + row.d * *row.s2) / (d0 + row.d);
  if (!(post > 0.0) || !std::isfinite(post)) return {};
  const double se = std::sqrt(post) * std::sqrt(1.0 / row.n_a + 1.0 / row.n_b);
  TestStat s = finish(*row.log2fc / se, std::min(d0 + row.d, kDfCap), se);
  s.posterior_var = post;
  return s;
}

std::vector<TestStat> moderated_t(std::span<const PooledRow> rows, const EBayesFit& fit) {
  std::vector<TestStat> out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) out[i] = moderated_row(rows[i], fit.d0, fit.prior_for(i));
  return out;
}

// ---------------------------------------------------------------------------
// PSM-count prior

LoessCurve::LoessCurve(std::span<const double> x, std::span<const double> y, double span) {
  if (x.size() != y.size() || x.empty()) throw ValidationError("loess needs equally sized, non-empty inputs");
  const auto n = x.size();
  const auto q = std::clamp<std::size_t>(static_cast<std::size_t>(std::floor(span * static_cast<double>(n))), 2, n);
  std::set<double> distinct(x.begin(), x.end());
  knots_.assign(distinct.begin(), distinct.end());
  fitted_.reserve(knots_.size());

  std::vector<double> dist(n);
  for (double x0 : knots_) {
    for (std::size_t i = 0; i < n; ++i) dist[i] = std::abs(x[i] - x0);
    std::vector<double> tmp = dist;
    std::nth_element(tmp.begin(), tmp.begin() + static_cast<std::ptrdiff_t>(q - 1), tmp.end());
    const double h = tmp[q - 1];

    double sw = 0.0, swx = 0.0, swy = 0.0, swxx = 0.0, swxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double w = 0.0;
      if (h > 0.0) {
        const double u = dist[i] / h;
        if (u < 1.0) {
          const double c = 1.0 - u * u * u;
          w = c * c * c;
        }
      } else if (dist[i] == 0.0) {
        w = 1.0;
      }
      if (w == 0.0) continue;
      const double xi = x[i] - x0;
      sw += w;
      swx += w * xi;
      swy += w * y[i];
      swxx += w * xi * xi;
      swxy += w * xi * y[i];
    }
    const double mx = swx / sw;
    const double sxx = swxx - swx * mx;
    // local intercept at x0 (centered coordinates)
    if (sxx > 1e-12 * std::max(1.0, swxx)) {
      const double slope = (swxy - swx * swy / sw) / sxx;
      fitted_.push_back(swy / sw - slope * mx);
    } else {
      fitted_.push_back(swy / sw);
    }
  }
}

double LoessCurve::operator()(double x) const {
  if (x <= knots_.front()) return fitted_.front();
  if (x >= knots_.back()) return fitted_.back();
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
  const auto hi = static_cast<std::size_t>(it - knots_.begin());
  const auto lo = hi - 1;
  const double f = (x - knots_[lo]) / (knots_[hi] - knots_[lo]);
  return fitted_[lo] + f * (fitted_[hi] - fitted_[lo]);
}

EBayesFit fit_psm_prior(std::span<const double> variances, std::span<const double> dfs,
                        std::span<const std::optional<double>> min_psm_counts) {
  if (variances.size() != dfs.size() || variances.size() != min_psm_counts.size()) {
    throw ValidationError("variances, dfs and counts differ in length");
  }
  EBayesFit global = fit_ebayes(variances, dfs);

  std::vector<std::size_t> usable;
  std::size_t tested = 0;
  for (std::size_t i = 0; i < variances.size(); ++i) {
    if (!(std::isfinite(variances[i]) && variances[i] > 0.0 && std::isfinite(dfs[i]) && dfs[i] > 0.0)) continue;
    ++tested;
    if (min_psm_counts[i] && *min_psm_counts[i] >= 0.0) usable.push_back(i);
  }
  if (static_cast<double>(usable.size()) < 0.8 * static_cast<double>(tested)) {
    throw PreconditionError("PSM counts available for only " + std::to_string(usable.size()) + " of " +
                            std::to_string(tested) + " tested rows (need 80%); use peptide counts instead");
  }

  std::vector<double> x;
  std::vector<double> z;
  std::vector<double> d;
  for (auto i : usable) {
    x.push_back(std::log2(*min_psm_counts[i] + 1.0));
    z.push_back(std::log(variances[i]));
    d.push_back(dfs[i]);
  }
  const std::set<double> distinct(x.begin(), x.end());
  if (distinct.size() < 5) {
    global.warnings.push_back("fewer than 5 distinct PSM counts; using the global prior variance");
    global.prior_var.assign(variances.size(), global.s0_sq);
    return global;
  }

  const LoessCurve curve(x, z);
  std::vector<double> residual(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) residual[j] = z[j] - curve(x[j]);

  EBayesFit fit;
  fit.d0 = estimate_d0(residual, d);
  fit.s0_sq = global.s0_sq;
  const double d_mean = stats::mean(d);
  // E[ln s^2] = ln sigma^2 + digamma(d/2) - ln(d/2); undo that bias, then
  // shift to the scale parameter of the prior as in fit_ebayes.
  const double shift = -stats::digamma(d_mean / 2.0) + std::log(d_mean / 2.0) + prior_scale_shift(fit.d0);
  fit.prior_var.assign(variances.size(), global.s0_sq);
  for (auto i : usable) fit.prior_var[i] = std::exp(curve(std::log2(*min_psm_counts[i] + 1.0)) + shift);
  return fit;
}

// ---------------------------------------------------------------------------

std::vector<std::optional<double>> bh_adjust(std::span<const std::optional<double>> pvals) {
  std::vector<std::size_t> present;
  for (std::size_t i = 0; i < pvals.size(); ++i) {
    if (!pvals[i]) continue;
    const double p = *pvals[i];
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("p-value outside [0, 1]: " + format_double(p));
    present.push_back(i);
  }
  std::vector<std::optional<double>> out(pvals.size());
  if (present.empty()) return out;
  std::stable_sort(present.begin(), present.end(), [&](std::size_t a, std::size_t b) { return *pvals[a] < *pvals[b]; });
  const double m = static_cast<double>(present.size());
  double running = 1.0;
  for (std::size_t k = present.size(); k-- > 0;) {
    const double q = *pvals[present[k]] * m / static_cast<double>(k + 1);
    running = std::min(running, q);
    // p * m / m may round below p
    out[present[k]] = std::max(running, *pvals[present[k]]);
  }
  return out;
}

std::vector<double> bh_adjust(std::span<const double> pvals) {
  std::vector<std::optional<double>> in(pvals.begin(), pvals.end());
  const auto adj = bh_adjust(std::span<const std::optional<double>>(in));
  std::vector<double> out(adj.size());
  for (std::size_t i = 0; i < adj.size(); ++i) out[i] = *adj[i];
  return out;
}

// ---------------------------------------------------------------------------

void classify(std::vector<DiffRow>& rows, std::span<const std::pair<int, int>> mask_counts, const TestConfig& cfg,
              int min_valid) {
  if (rows.size() != mask_counts.size()) throw ValidationError("rows and mask counts differ in length");
  const int threshold = std::max(1, min_valid);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto& row = rows[i];
    const auto [ca, cb] = mask_counts[i];
    if (cfg.include_exclusives && ((ca >= threshold && cb == 0) || (cb >= threshold && ca == 0))) {
      row.status = ca > 0 ? Status::exclusive_a : Status::exclusive_b;
      row.t_stat.reset();
      row.df.reset();
      row.p.reset();
      row.p_adj.reset();
      row.se.reset();
      row.posterior_var.reset();
      continue;
    }
    const auto& p = cfg.use_adjusted ? row.p_adj : row.p;
    if (!p || !row.log2fc) {
      row.status = Status::untested;
      continue;
    }
    const double fc = *row.log2fc;
    if (*p <= cfg.p_threshold && std::abs(fc) >= cfg.fc_threshold && fc != 0.0) {
      row.status = fc > 0.0 ? Status::up : Status::down;
    } else {
      row.status = Status::not_significant;
    }
  }
}

DiffResult run(const ExpressionMatrix& matrix, const MissingnessMask& mask, const ProteinTable& table,
               const GroupDesign& design, const TestConfig& cfg, int min_valid) {
  cfg.validate(&design);
  if (matrix.scale() != Scale::log2) throw StateError("differential analysis expects a log2-scale matrix");
  if (table.size() != matrix.rows() || mask.rows() != matrix.rows()) {
    throw AlignmentError("matrix, mask and protein table differ in row count");
  }
  const auto sub = design.subset({cfg.comparison.group_a, cfg.comparison.group_b});
  const auto counts = valid_values_per_group(mask, matrix, sub);
  std::vector<std::pair<int, int>> mask_counts(matrix.rows());
  const int threshold = std::max(1, min_valid);
  std::vector<bool> exclusive(matrix.rows(), false);
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    mask_counts[r] = {counts.at(r, 0), counts.at(r, 1)};
    const auto [ca, cb] = mask_counts[r];
    exclusive[r] = cfg.include_exclusives && ((ca >= threshold && cb == 0) || (cb >= threshold && ca == 0));
  }

  DiffResult out;
  const auto means = group_means_fc(matrix, design, cfg.comparison);
  std::vector<TestStat> tests;
  auto method = cfg.method;

  std::vector<PooledRow> pooled;
  if (method != TestMethod::ordinary_t) {
    pooled = pooled_rows(matrix, design, cfg.comparison);
    std::vector<double> variances(pooled.size(), std::numeric_limits<double>::quiet_NaN());
    std::vector<double> dfs(pooled.size(), 0.0);
    for (std::size_t r = 0; r < pooled.size(); ++r) {
      if (exclusive[r] || !pooled[r].s2) continue;
      variances[r] = *pooled[r].s2;
      dfs[r] = pooled[r].d;
    }
    try {
      if (method == TestMethod::moderated_t_psm) {
        std::vector<std::optional<double>> covariate(matrix.rows());
        std::size_t with_psm = 0;
        std::size_t with_pep = 0;
        for (std::size_t r = 0; r < matrix.rows(); ++r) {
          with_psm += table.records[r].min_psm_count ? 1 : 0;
          with_pep += table.records[r].peptide_count ? 1 : 0;
        }
        const bool use_peptides = with_psm < with_pep;
        if (use_peptides) out.warnings.push_back("PSM counts unavailable; peptide counts used as the variance covariate");
        for (std::size_t r = 0; r < matrix.rows(); ++r) {
          const auto& rec = table.records[r];
          const auto& c = use_peptides ? rec.peptide_count : rec.min_psm_count;
          if (c) covariate[r] = static_cast<double>(*c);
        }
        out.fit = fit_psm_prior(variances, dfs, covariate);
      } else {
        out.fit = fit_ebayes(variances, dfs);
      }
      out.warnings.insert(out.warnings.end(), out.fit->warnings.begin(), out.fit->warnings.end());
      tests = moderated_t(pooled, *out.fit);
    } catch (const DegenerateDataError& e) {
      out.warnings.push_back(std::string("empirical Bayes fit failed (") + e.what() + "); falling back to ordinary t-test");
      out.fit.reset();
      method = TestMethod::ordinary_t;
    }
  }
  if (method == TestMethod::ordinary_t) tests = ordinary_t(matrix, design, cfg);

  std::vector<std::optional<double>> pvals(matrix.rows());
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    if (!exclusive[r]) pvals[r] = tests[r].p;
  }
  const auto adjusted = bh_adjust(pvals);

  out.rows.resize(matrix.rows());
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    auto& row = out.rows[r];
    row.protein_id = table.records[r].protein_id;
    row.gene_names = table.records[r].gene_names;
    row.log2fc = means[r].log2fc;
    row.n_a = mask_counts[r].first;
    row.n_b = mask_counts[r].second;
    if (!exclusive[r] && tests[r].p) {
      row.t_stat = tests[r].t;
      row.df = tests[r].df;
      row.p = tests[r].p;
      row.p_adj = adjusted[r];
      row.se = tests[r].se;
      row.posterior_var = tests[r].posterior_var;
    }
  }
  classify(out.rows, mask_counts, cfg, min_valid);
  return out;
}

// ---------------------------------------------------------------------------

VolcanoData volcano_data(std::span<const DiffRow> rows, const TestConfig& cfg) {
  VolcanoData out;
  out.fc_threshold = cfg.fc_threshold;
  out.y_threshold = -std::log10(cfg.p_threshold);
  out.adjusted = cfg.use_adjusted;
  for (const auto& row : rows) {
    if (row.status == Status::exclusive_a || row.status == Status::exclusive_b) {
      out.exclusives.emplace_back(row.protein_id, row.status);
      continue;
    }
    if (row.status == Status::untested) continue;
    const double p = cfg.use_adjusted ? *row.p_adj : *row.p;
    out.points.push_back({row.protein_id, *row.log2fc,
                          -std::log10(std::max(p, std::numeric_limits<double>::min())), row.status});
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

namespace {

std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

std::optional<double> parse_opt(const std::string& cell) {
  if (cell.empty()) return std::nullopt;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) throw FormatError("invalid number: " + cell);
  return v;
}

}  // namespace

std::string export_table(std::span<const DiffRow> rows) {
  std::string out = "protein_id,gene_names,log2fc,t_stat,df,p,p_adj,n_a,n_b,posterior_var,status\n";
  for (const auto& r : rows) {
    out += csv_field(r.protein_id) + ',' + csv_field(r.gene_names) + ',' + opt(r.log2fc) + ',' + opt(r.t_stat) + ',' +
           opt(r.df) + ',' + opt(r.p) + ',' + opt(r.p_adj) + ',' + std::to_string(r.n_a) + ',' +
           std::to_string(r.n_b) + ',' + opt(r.posterior_var) + ',' + std::string(to_string(r.status)) + '\n';
  }
  return out;
}

std::vector<DiffRow> parse_table(std::string_view csv) {
  const auto raw = ingest::read_delimited(csv, ',');
  static const std::vector<std::string> expected = {"protein_id", "gene_names", "log2fc", "t_stat",
                                                    "df",         "p",          "p_adj",  "n_a",
                                                    "n_b",        "posterior_var", "status"};
  if (raw.header != expected) throw FormatError("unexpected differential table header");
  std::vector<DiffRow> out;
  out.reserve(raw.rows.size());
  for (const auto& cells : raw.rows) {
    DiffRow r;
    r.protein_id = cells[0];
    r.gene_names = cells[1];
    r.log2fc = parse_opt(cells[2]);
    r.t_stat = parse_opt(cells[3]);
    r.df = parse_opt(cells[4]);
    r.p = parse_opt(cells[5]);
    r.p_adj = parse_opt(cells[6]);
    r.n_a = static_cast<int>(parse_opt(cells[7]).value_or(0));
    r.n_b = static_cast<int>(parse_opt(cells[8]).value_or(0));
    r.posterior_var = parse_opt(cells[9]);
    r.status = parse_status(cells[10]);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace protodown::diffexpr
