#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "protodown/core.hpp"

namespace protodown::qc {

enum class PlotKind { boxplot, histogram, qq, imputation_overlay, dispersion, scatter, correlation_matrix, pca };

std::string_view to_string(PlotKind k);

/// Presentation-free plot payload: named numeric series plus labels.
struct PlotData {
  PlotKind kind;
  std::vector<std::pair<std::string, std::vector<double>>> series;
  std::vector<std::pair<std::string, std::vector<std::string>>> labels;
  std::map<std::string, std::string> meta;

  const std::vector<double>& get(const std::string& name) const;
  /// Throws StateError if any series holds a non-finite number.
  void validate() const;
};

struct BoxStats {
  std::string column;
  double min;
  double q1;
  double median;
  double q3;
  double max;
  double lower_whisker;
  double upper_whisker;
  std::vector<double> outliers;
};

BoxStats box_stats(std::string column, std::vector<double> values);
std::vector<BoxStats> boxplot_stats(const ExpressionMatrix& matrix);

struct Histogram {
  std::vector<double> edges;  // bins + 1 entries
  std::vector<double> counts;
};

/// bins = 0 selects Freedman-Diaconis (10 bins when IQR = 0).
Histogram histogram(std::span<const double> values, std::size_t bins = 0);
/// Counts values into fixed edges (last bin closed).
std::vector<double> bin_counts(std::span<const double> values, std::span<const double> edges);

struct QQPoints {
  std::vector<double> theoretical;
  std::vector<double> sample;
};

QQPoints qq_points(std::span<const double> values);

struct ImputationOverlay {
  std::vector<double> edges;
  std::vector<double> observed;
  std::vector<double> imputed;
};

ImputationOverlay imputation_overlay(const ExpressionMatrix& imputed, const MissingnessMask& mask);

std::vector<std::vector<double>> correlation_matrix(const ExpressionMatrix& matrix);

struct PcaResult {
  std::vector<std::string> samples;
  /// samples x components
  std::vector<std::vector<double>> scores;
  /// proteins x components
  std::vector<std::vector<double>> loadings;
  std::vector<double> variance_explained;
  std::vector<std::string> features;
};

/// Samples are observations, proteins are features. Missing values are an
/// error unless drop_incomplete removes those proteins first.
PcaResult pca(const ExpressionMatrix& matrix, bool drop_incomplete = false, bool scale = false);

struct DispersionRow {
  std::string protein_id;
  double mean;
  double sd;
  /// CV on the linear scale implied by the log2 SD: sqrt(2^(sd^2 ln 2) - 1).
  double cv;
};

std::vector<DispersionRow> dispersion_stats(const ExpressionMatrix& matrix);

struct ScatterData {
  std::string x_column;
  std::string y_column;
  std::vector<std::string> ids;
  std::vector<double> x;
  std::vector<double> y;
};

ScatterData scatter(const ExpressionMatrix& matrix, const std::string& x_column, const std::string& y_column);

PlotData to_plot(const std::vector<BoxStats>& boxes);
PlotData to_plot(const Histogram& h, const std::string& title);
PlotData to_plot(const QQPoints& q, const std::string& column);
PlotData to_plot(const ImputationOverlay& o);
PlotData to_plot(const std::vector<DispersionRow>& rows);
PlotData to_plot(const ScatterData& s);
PlotData correlation_plot(const std::vector<std::vector<double>>& r, const std::vector<std::string>& samples);
PlotData to_plot(const PcaResult& p, const GroupDesign* design);

}  // namespace protodown::qc
