#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "protodown/core.hpp"

namespace protodown::diffexpr {

enum class TestMethod { ordinary_t, moderated_t, moderated_t_psm };
enum class Status { up, down, not_significant, exclusive_a, exclusive_b, untested };

std::string_view to_string(TestMethod m);
std::string_view to_string(Status s);
TestMethod parse_method(std::string_view text);
Status parse_status(std::string_view text);

/// Degrees of freedom standing in for "infinite".
inline constexpr double kDfCap = 1e6;

struct Comparison {
  std::string group_a;
  std::string group_b;

  bool configured() const { return !group_a.empty() && !group_b.empty(); }
  friend bool operator==(const Comparison&, const Comparison&) = default;
};

struct TestConfig {
  TestMethod method = TestMethod::moderated_t;
  bool paired = false;
  bool equal_variance = false;
  double fc_threshold = 1.0;
  double p_threshold = 0.05;
  bool use_adjusted = true;
  bool include_exclusives = true;
  Comparison comparison;

  /// Throws ValidationError / ConfigError; checks groups against `design`
  /// when given.
  void validate(const GroupDesign* design = nullptr) const;

  friend bool operator==(const TestConfig&, const TestConfig&) = default;
};

struct GroupMeans {
  std::optional<double> mean_a;
  std::optional<double> mean_b;
  std::optional<double> log2fc;
  int n_a = 0;
  int n_b = 0;
};

std::vector<GroupMeans> group_means_fc(const ExpressionMatrix& matrix, const GroupDesign& design,
                                       const Comparison& comparison);

struct TestStat {
  std::optional<double> t;
  std::optional<double> df;
  std::optional<double> p;
  std::optional<double> se;
  std::optional<double> posterior_var;
};

/// Welch, pooled (equal_variance) or paired test on one row's values.
TestStat welch_test(std::span<const double> a, std::span<const double> b);
TestStat pooled_test(std::span<const double> a, std::span<const double> b);
TestStat paired_test(std::span<const double> a, std::span<const double> b);

std::vector<TestStat> ordinary_t(const ExpressionMatrix& matrix, const GroupDesign& design, const TestConfig& cfg);

struct EBayesFit {
  double d0 = kDfCap;
  double s0_sq = 0.0;
  /// Per-row prior variance (PSM mode only; empty otherwise).
  std::vector<double> prior_var;
  std::vector<std::string> warnings;

  double prior_for(std::size_t row) const { return prior_var.empty() ? s0_sq : prior_var[row]; }
};

/// Moment-matching estimate of the prior (d0, s0^2) from residual
/// variances with their degrees of freedom. Entries with non-positive or
/// non-finite variance or df are ignored.
EBayesFit fit_ebayes(std::span<const double> variances, std::span<const double> dfs);

/// Pooled within-group variance per row, the input to the moderated tests.
struct PooledRow {
  std::optional<double> log2fc;
  std::optional<double> s2;  // absent when d < 1
  double d = 0.0;
  int n_a = 0;
  int n_b = 0;
};

std::vector<PooledRow> pooled_rows(const ExpressionMatrix& matrix, const GroupDesign& design,
                                   const Comparison& comparison);

/// Posterior-variance t for one row.
TestStat moderated_row(const PooledRow& row, double d0, double prior_var);
std::vector<TestStat> moderated_t(std::span<const PooledRow> rows, const EBayesFit& fit);

/// Local linear regression with tricube weights, evaluated at every
/// distinct x and linearly interpolated in between.
class LoessCurve {
 public:
  LoessCurve(std::span<const double> x, std::span<const double> y, double span = 0.75);
  double operator()(double x) const;
  const std::vector<double>& knots() const { return knots_; }
  const std::vector<double>& fitted_at_knots() const { return fitted_; }

 private:
  std::vector<double> knots_;
  std::vector<double> fitted_;
};

/// PSM-count dependent prior. `min_psm_counts[g]` may be absent; those rows
/// get the global s0^2. Rows with unusable variance keep the global prior.
EBayesFit fit_psm_prior(std::span<const double> variances, std::span<const double> dfs,
                        std::span<const std::optional<double>> min_psm_counts);

/// Benjamini-Hochberg step-up; absent entries pass through.
std::vector<std::optional<double>> bh_adjust(std::span<const std::optional<double>> pvals);
std::vector<double> bh_adjust(std::span<const double> pvals);

struct DiffRow {
  std::string protein_id;
  std::string gene_names;
  std::optional<double> log2fc;
  std::optional<double> t_stat;
  std::optional<double> df;
  std::optional<double> p;
  std::optional<double> p_adj;
  std::optional<double> se;
  std::optional<double> posterior_var;
  int n_a = 0;
  int n_b = 0;
  Status status = Status::untested;

  friend bool operator==(const DiffRow&, const DiffRow&) = default;
};

/// Assigns status. `mask_counts[i]` = (observed in a, observed in b) on the
/// pre-imputation mask.
void classify(std::vector<DiffRow>& rows, std::span<const std::pair<int, int>> mask_counts, const TestConfig& cfg,
              int min_valid);

struct DiffResult {
  std::vector<DiffRow> rows;
  std::optional<EBayesFit> fit;
  std::vector<std::string> warnings;
};

/// Full differential analysis on the imputed matrix; exclusives come from
/// the pre-imputation mask.
DiffResult run(const ExpressionMatrix& matrix, const MissingnessMask& mask, const ProteinTable& table,
               const GroupDesign& design, const TestConfig& cfg, int min_valid);

struct VolcanoPoint {
  std::string protein_id;
  double x;
  double y;
  Status status;
};

struct VolcanoData {
  std::vector<VolcanoPoint> points;
  std::vector<std::pair<std::string, Status>> exclusives;
  double fc_threshold;
  double y_threshold;
  bool adjusted;
};

VolcanoData volcano_data(std::span<const DiffRow> rows, const TestConfig& cfg);

/// CSV table, RFC-4180 quoting, shortest round-trip numbers.
std::string export_table(std::span<const DiffRow> rows);
/// Parses export_table output back (used by round-trip checks and clients).
std::vector<DiffRow> parse_table(std::string_view csv);

std::string format_double(double v);
/// Quotes a CSV cell when it holds a comma, quote or line break.
std::string csv_field(std::string_view s);

}  // namespace protodown::diffexpr
