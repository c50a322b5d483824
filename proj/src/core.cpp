#include "protodown/core.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

namespace protodown {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::design: return "design_error";
    case ErrorCode::alignment: return "alignment_error";
    case ErrorCode::format: return "format_error";
    case ErrorCode::syntax: return "syntax_error";
    case ErrorCode::state: return "state_error";
    case ErrorCode::normalization: return "normalization_error";
    case ErrorCode::imputation: return "imputation_error";
    case ErrorCode::config: return "config_error";
    case ErrorCode::degenerate_data: return "degenerate_data";
    case ErrorCode::precondition: return "precondition_error";
    case ErrorCode::transport: return "transport_error";
    case ErrorCode::unsupported: return "unsupported_error";
    case ErrorCode::validation: return "validation_error";
    case ErrorCode::not_found: return "not_found";
  }
  return "error";
}

std::string_view to_string(Scale scale) { return scale == Scale::linear ? "linear" : "log2"; }

std::string_view to_string(ProteinFlag flag) {
  switch (flag) {
    case ProteinFlag::reverse: return "reverse";
    case ProteinFlag::contaminant: return "contaminant";
    case ProteinFlag::only_by_site: return "only_by_site";
  }
  return "";
}

std::optional<ProteinFlag> parse_protein_flag(std::string_view text) {
  if (text == "reverse") return ProteinFlag::reverse;
  if (text == "contaminant") return ProteinFlag::contaminant;
  if (text == "only_by_site") return ProteinFlag::only_by_site;
  return std::nullopt;
}

// ---------------------------------------------------------------------------

MissingnessMask::MissingnessMask(std::size_t rows, std::size_t cols, std::vector<std::uint8_t> observed)
    : rows_(rows), cols_(cols), observed_(std::move(observed)) {
  if (observed_.size() != rows * cols) throw StateError("mask size does not match its shape");
}

std::size_t MissingnessMask::observed_count() const {
  return static_cast<std::size_t>(std::count(observed_.begin(), observed_.end(), std::uint8_t{1}));
}

MissingnessMask MissingnessMask::select_rows(std::span<const std::size_t> rows) const {
  std::vector<std::uint8_t> out;
  out.reserve(rows.size() * cols_);
  for (auto r : rows) {
    out.insert(out.end(), observed_.begin() + static_cast<std::ptrdiff_t>(r * cols_),
               observed_.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols_));
  }
  return MissingnessMask(rows.size(), cols_, std::move(out));
}

// ---------------------------------------------------------------------------

namespace {

void require_unique(const std::vector<std::string>& ids, const char* what) {
  std::unordered_set<std::string> seen;
  for (const auto& id : ids) {
    if (!seen.insert(id).second) throw DesignError(std::string("duplicate ") + what + " id: " + id, id);
  }
}

}  // namespace

ExpressionMatrix::ExpressionMatrix(std::vector<std::string> row_ids, std::vector<std::string> col_ids, Scale scale)
    : row_ids_(std::move(row_ids)), col_ids_(std::move(col_ids)), scale_(scale) {
  require_unique(row_ids_, "row");
  require_unique(col_ids_, "column");
  values_.assign(row_ids_.size() * col_ids_.size(), 0.0);
  present_.assign(values_.size(), 0);
}

std::optional<double> ExpressionMatrix::get(std::size_t r, std::size_t c) const {
  if (!observed(r, c)) return std::nullopt;
  return value(r, c);
}

void ExpressionMatrix::set(std::size_t r, std::size_t c, double v) {
  if (!std::isfinite(v)) throw StateError("non-finite value cannot be stored; use clear() for missing cells");
  if (scale_ == Scale::linear && v <= 0.0) throw StateError("linear-scale values must be > 0");
  values_[index(r, c)] = v;
  present_[index(r, c)] = 1;
}

void ExpressionMatrix::clear(std::size_t r, std::size_t c) {
  values_[index(r, c)] = 0.0;
  present_[index(r, c)] = 0;
}

std::vector<double> ExpressionMatrix::observed_in_row(std::size_t r) const {
  std::vector<double> out;
  for (std::size_t c = 0; c < cols(); ++c) {
    if (observed(r, c)) out.push_back(value(r, c));
  }
  return out;
}

std::vector<double> ExpressionMatrix::observed_in_column(std::size_t c) const {
  std::vector<double> out;
  for (std::size_t r = 0; r < rows(); ++r) {
    if (observed(r, c)) out.push_back(value(r, c));
  }
  return out;
}

std::size_t ExpressionMatrix::observed_count() const {
  return static_cast<std::size_t>(std::count(present_.begin(), present_.end(), std::uint8_t{1}));
}

bool ExpressionMatrix::complete() const { return observed_count() == present_.size(); }

std::optional<std::size_t> ExpressionMatrix::find_column(const std::string& name) const {
  auto it = std::find(col_ids_.begin(), col_ids_.end(), name);
  if (it == col_ids_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - col_ids_.begin());
}

std::size_t ExpressionMatrix::column_index(const std::string& name) const {
  auto idx = find_column(name);
  if (!idx) throw DesignError("unknown column: " + name, name);
  return *idx;
}

MissingnessMask ExpressionMatrix::mask() const { return MissingnessMask(rows(), cols(), present_); }

ExpressionMatrix ExpressionMatrix::select_rows(std::span<const std::size_t> rows) const {
  std::vector<std::string> ids;
  ids.reserve(rows.size());
  for (auto r : rows) ids.push_back(row_ids_.at(r));
  ExpressionMatrix out(std::move(ids), col_ids_, scale_);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t c = 0; c < cols(); ++c) {
      out.values_[out.index(i, c)] = values_[index(rows[i], c)];
      out.present_[out.index(i, c)] = present_[index(rows[i], c)];
    }
  }
  return out;
}

ExpressionMatrix ExpressionMatrix::select_columns(std::span<const std::size_t> cols) const {
  std::vector<std::string> ids;
  ids.reserve(cols.size());
  for (auto c : cols) ids.push_back(col_ids_.at(c));
  ExpressionMatrix out(row_ids_, std::move(ids), scale_);
  for (std::size_t r = 0; r < rows(); ++r) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      out.values_[out.index(r, j)] = values_[index(r, cols[j])];
      out.present_[out.index(r, j)] = present_[index(r, cols[j])];
    }
  }
  return out;
}

ExpressionMatrix ExpressionMatrix::with_scale(Scale scale) const {
  ExpressionMatrix out = *this;
  out.scale_ = scale;
  if (scale == Scale::linear) {
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (present_[i] && values_[i] <= 0.0) throw StateError("linear-scale values must be > 0");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

std::string ProteinRecord::display_id() const {
  auto pos = protein_id.find(';');
  return pos == std::string::npos ? protein_id : protein_id.substr(0, pos);
}

void update_min_psm_count(ProteinRecord& record, const ExpressionMatrix& matrix, std::size_t row) {
  record.min_psm_count.reset();
  if (record.psm_counts.empty()) return;
  for (const auto& [sample, count] : record.psm_counts) {
    auto c = matrix.find_column(sample);
    if (!c || !matrix.observed(row, *c)) continue;
    if (!record.min_psm_count || count < *record.min_psm_count) record.min_psm_count = count;
  }
  // min_psm_count is >= 1 by definition; a quantified sample with 0 PSMs
  // carries no usable covariate.
  if (record.min_psm_count && *record.min_psm_count < 1) record.min_psm_count.reset();
}

ProteinTable ProteinTable::select_rows(std::span<const std::size_t> rows) const {
  ProteinTable out;
  out.records.reserve(rows.size());
  for (auto r : rows) out.records.push_back(records.at(r));
  return out;
}

// ---------------------------------------------------------------------------

const Group& GroupDesign::group(const std::string& name) const {
  for (const auto& g : groups) {
    if (g.name == name) return g;
  }
  throw DesignError("unknown group: " + name, name);
}

bool GroupDesign::contains(const std::string& name) const {
  return std::any_of(groups.begin(), groups.end(), [&](const Group& g) { return g.name == name; });
}

GroupDesign GroupDesign::subset(const std::vector<std::string>& names) const {
  GroupDesign out;
  for (const auto& n : names) out.groups.push_back(group(n));
  return out;
}

void GroupDesign::validate() const {
  std::unordered_set<std::string> names;
  std::unordered_map<std::string, std::string> owner;
  for (const auto& g : groups) {
    if (!names.insert(g.name).second) throw DesignError("duplicate group name: " + g.name, g.name);
    if (g.columns.empty()) throw DesignError("group has no columns: " + g.name, g.name);
    for (const auto& c : g.columns) {
      auto [it, inserted] = owner.emplace(c, g.name);
      if (!inserted) {
        throw DesignError("column " + c + " belongs to groups " + it->second + " and " + g.name, c);
      }
    }
  }
}

std::vector<std::vector<std::size_t>> resolve_columns(const ExpressionMatrix& matrix, const GroupDesign& design) {
  std::vector<std::vector<std::size_t>> out;
  out.reserve(design.groups.size());
  for (const auto& g : design.groups) {
    std::vector<std::size_t> idx;
    idx.reserve(g.columns.size());
    for (const auto& c : g.columns) idx.push_back(matrix.column_index(c));
    out.push_back(std::move(idx));
  }
  return out;
}

GroupCounts valid_values_per_group(const ExpressionMatrix& matrix, const GroupDesign& design) {
  return valid_values_per_group(matrix.mask(), matrix, design);
}

GroupCounts valid_values_per_group(const MissingnessMask& mask, const ExpressionMatrix& ids, const GroupDesign& design) {
  if (mask.rows() != ids.rows() || mask.cols() != ids.cols()) throw DesignError("mask shape does not match matrix");
  const auto columns = resolve_columns(ids, design);
  GroupCounts out{mask.rows(), columns.size(), std::vector<int>(mask.rows() * columns.size(), 0)};
  for (std::size_t r = 0; r < mask.rows(); ++r) {
    for (std::size_t g = 0; g < columns.size(); ++g) {
      int n = 0;
      for (auto c : columns[g]) n += mask.observed(r, c) ? 1 : 0;
      out.counts[r * out.groups + g] = n;
    }
  }
  return out;
}

std::pair<ProteinTable, ExpressionMatrix> align(const ProteinTable& table, const ExpressionMatrix& matrix) {
  std::unordered_map<std::string, std::size_t> by_id;
  for (std::size_t i = 0; i < table.size(); ++i) by_id.emplace(table.records[i].protein_id, i);

  std::vector<std::string> offending;
  std::vector<std::size_t> order;
  order.reserve(matrix.rows());
  std::unordered_set<std::string> matrix_ids;
  for (const auto& id : matrix.row_ids()) {
    matrix_ids.insert(id);
    auto it = by_id.find(id);
    if (it == by_id.end()) {
      offending.push_back(id);
    } else {
      order.push_back(it->second);
    }
  }
  for (const auto& rec : table.records) {
    if (!matrix_ids.count(rec.protein_id)) offending.push_back(rec.protein_id);
  }
  if (!offending.empty() || table.size() != matrix.rows()) {
    std::string list;
    for (const auto& id : offending) list += (list.empty() ? "" : ", ") + id;
    throw AlignmentError("protein table and matrix rows differ: " + list, list);
  }
  return {table.select_rows(order), matrix};
}

}  // namespace protodown
