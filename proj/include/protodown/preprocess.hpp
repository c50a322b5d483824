#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "protodown/core.hpp"

namespace protodown::preprocess {

enum class ValidMode { each_group, at_least_one_group };
enum class Normalization { none, mean, median, trimmed_mean, vsn_glog };
enum class Imputation { none, normal_downshift, knn };

std::string_view to_string(ValidMode m);
std::string_view to_string(Normalization n);
std::string_view to_string(Imputation i);
ValidMode parse_valid_mode(std::string_view text);
Normalization parse_normalization(std::string_view text);
Imputation parse_imputation(std::string_view text);

struct PreprocessParams {
  int min_valid = 2;
  ValidMode valid_mode = ValidMode::at_least_one_group;
  int min_unique_peptides = 0;
  std::set<ProteinFlag> drop_flagged = {ProteinFlag::reverse, ProteinFlag::contaminant, ProteinFlag::only_by_site};
  Normalization normalization = Normalization::median;
  double trim_fraction = 0.2;
  Imputation imputation = Imputation::normal_downshift;
  double downshift_shift = 1.8;
  double downshift_width = 0.3;
  int knn_k = 10;
  std::uint64_t rng_seed = 42;

  /// Throws ValidationError on out-of-range values.
  void validate() const;

  friend bool operator==(const PreprocessParams&, const PreprocessParams&) = default;
};

struct FilterResult {
  ProteinTable table;
  ExpressionMatrix matrix;
  MissingnessMask mask;
  std::vector<std::size_t> kept_rows;
  std::vector<std::string> warnings;
};

/// Keeps rows passing the flag, unique-peptide and valid-value rules.
/// `design` should hold only the groups under comparison.
FilterResult filter_rows(const ProteinTable& table, const ExpressionMatrix& matrix, const GroupDesign& design,
                         const PreprocessParams& params);

ExpressionMatrix log2_transform(const ExpressionMatrix& matrix);

/// log2(y + sqrt(y^2 + 1)).
double glog2(double y);

/// Column location statistic used by the mean/median/trimmed_mean
/// normalizations. `values` need not be sorted.
double column_location(std::vector<double> values, Normalization method, double trim_fraction);

/// mean/median/trimmed_mean need a log2 matrix; vsn_glog needs the linear
/// matrix and returns log2 scale; none returns the input unchanged.
ExpressionMatrix normalize(const ExpressionMatrix& matrix, Normalization method, double trim_fraction = 0.2);

/// Seed for the cell at (row, col); every missing cell owns one stream.
std::uint64_t cell_seed(std::uint64_t seed, std::size_t col, std::size_t row);

ExpressionMatrix impute_normal_downshift(const ExpressionMatrix& matrix, double shift, double width,
                                         std::uint64_t seed);

struct KnnResult {
  ExpressionMatrix matrix;
  std::vector<std::string> warnings;
};

KnnResult impute_knn(const ExpressionMatrix& matrix, int k);

struct VennResult {
  std::vector<std::string> groups;
  std::vector<std::vector<std::string>> sets;
  /// regions[m - 1] counts proteins whose membership bit pattern is exactly
  /// m (bit g = member of groups[g]), for m = 1 .. 2^g - 1.
  std::vector<std::size_t> regions;
};

VennResult venn_sets(const MissingnessMask& mask, const ExpressionMatrix& ids, const GroupDesign& design,
                     int min_valid);

struct PreprocessResult {
  ProteinTable table;
  MissingnessMask mask;
  ExpressionMatrix log2;        // filtered, log2, before normalization
  ExpressionMatrix normalized;  // before imputation
  ExpressionMatrix imputed;     // pipeline head
  std::vector<std::string> warnings;
};

/// filter -> log2 -> normalize -> impute.
PreprocessResult run(const ProteinTable& table, const ExpressionMatrix& linear, const GroupDesign& design,
                     const PreprocessParams& params);

}  // namespace protodown::preprocess
