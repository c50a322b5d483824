#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "protodown/error.hpp"

namespace protodown {

enum class Scale { linear, log2 };

std::string_view to_string(Scale scale);

/// Per-cell observation flags, true = observed before imputation.
class MissingnessMask {
 public:
  MissingnessMask() = default;
  MissingnessMask(std::size_t rows, std::size_t cols, std::vector<std::uint8_t> observed);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool observed(std::size_t r, std::size_t c) const { return observed_[r * cols_ + c] != 0; }
  std::size_t observed_count() const;

  MissingnessMask select_rows(std::span<const std::size_t> rows) const;

  friend bool operator==(const MissingnessMask&, const MissingnessMask&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::uint8_t> observed_;
};

/// Proteins x samples matrix with an explicit missing marker. Stored
/// values are always finite; linear-scale values are always > 0.
class ExpressionMatrix {
 public:
  ExpressionMatrix() = default;
  /// All cells start missing.
  ExpressionMatrix(std::vector<std::string> row_ids, std::vector<std::string> col_ids, Scale scale);

  std::size_t rows() const noexcept { return row_ids_.size(); }
  std::size_t cols() const noexcept { return col_ids_.size(); }
  Scale scale() const noexcept { return scale_; }
  const std::vector<std::string>& row_ids() const noexcept { return row_ids_; }
  const std::vector<std::string>& col_ids() const noexcept { return col_ids_; }

  bool observed(std::size_t r, std::size_t c) const { return present_[index(r, c)] != 0; }
  /// Value of an observed cell; the cell must be observed.
  double value(std::size_t r, std::size_t c) const { return values_[index(r, c)]; }
  std::optional<double> get(std::size_t r, std::size_t c) const;

  void set(std::size_t r, std::size_t c, double v);
  void clear(std::size_t r, std::size_t c);

  std::vector<double> observed_in_row(std::size_t r) const;
  std::vector<double> observed_in_column(std::size_t c) const;
  std::size_t observed_count() const;
  bool complete() const;

  std::optional<std::size_t> find_column(const std::string& name) const;
  std::size_t column_index(const std::string& name) const;  // throws DesignError

  MissingnessMask mask() const;
  ExpressionMatrix select_rows(std::span<const std::size_t> rows) const;
  ExpressionMatrix select_columns(std::span<const std::size_t> cols) const;
  /// Same ids and values, new scale tag. Values are re-validated.
  ExpressionMatrix with_scale(Scale scale) const;

  friend bool operator==(const ExpressionMatrix&, const ExpressionMatrix&) = default;

 private:
  std::size_t index(std::size_t r, std::size_t c) const { return r * col_ids_.size() + c; }

  std::vector<std::string> row_ids_;
  std::vector<std::string> col_ids_;
  std::vector<double> values_;
  std::vector<std::uint8_t> present_;
  Scale scale_ = Scale::linear;
};

enum class ProteinFlag : std::uint8_t { reverse, contaminant, only_by_site };

std::string_view to_string(ProteinFlag flag);
std::optional<ProteinFlag> parse_protein_flag(std::string_view text);

struct ProteinRecord {
  std::string protein_id;
  std::string gene_names;
  std::string description;
  std::optional<int> peptide_count;
  std::optional<int> unique_peptide_count;
  std::map<std::string, int> psm_counts;
  std::optional<int> min_psm_count;
  std::set<ProteinFlag> flags;

  /// First accession of the protein group (split on ';').
  std::string display_id() const;

  friend bool operator==(const ProteinRecord&, const ProteinRecord&) = default;
};

/// Sets min_psm_count from psm_counts restricted to samples where the
/// protein is quantified in `matrix` row `row`.
void update_min_psm_count(ProteinRecord& record, const ExpressionMatrix& matrix, std::size_t row);

struct ProteinTable {
  std::vector<ProteinRecord> records;

  std::size_t size() const noexcept { return records.size(); }
  ProteinTable select_rows(std::span<const std::size_t> rows) const;

  friend bool operator==(const ProteinTable&, const ProteinTable&) = default;
};

struct Group {
  std::string name;
  std::string pattern;
  std::vector<std::string> columns;

  friend bool operator==(const Group&, const Group&) = default;
};

struct GroupDesign {
  std::vector<Group> groups;

  const Group& group(const std::string& name) const;  // throws DesignError
  bool contains(const std::string& name) const;
  /// Restricts to the named groups, in the given order.
  GroupDesign subset(const std::vector<std::string>& names) const;
  /// Throws DesignError when names repeat, a group is empty, or any
  /// two groups share a column.
  void validate() const;

  friend bool operator==(const GroupDesign&, const GroupDesign&) = default;
};

/// rows x groups table of non-missing counts.
struct GroupCounts {
  std::size_t rows = 0;
  std::size_t groups = 0;
  std::vector<int> counts;

  int at(std::size_t r, std::size_t g) const { return counts[r * groups + g]; }
};

/// Column indices of each design group inside `matrix`.
std::vector<std::vector<std::size_t>> resolve_columns(const ExpressionMatrix& matrix, const GroupDesign& design);

GroupCounts valid_values_per_group(const ExpressionMatrix& matrix, const GroupDesign& design);
GroupCounts valid_values_per_group(const MissingnessMask& mask, const ExpressionMatrix& ids, const GroupDesign& design);

/// Reorders `table` to the row order of `matrix`. Throws AlignmentError
/// listing ids present on only one side.
std::pair<ProteinTable, ExpressionMatrix> align(const ProteinTable& table, const ExpressionMatrix& matrix);

}  // namespace protodown
