#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "protodown/core.hpp"

namespace protodown::ingest {

enum class PlatformKind { maxquant, msfragger, diann, proteome_discoverer, generic_wide };
enum class LabelType { label_free, tmt, silac };
enum class Quantification { intensity, lfq, spectral_count, reporter };

std::string_view to_string(PlatformKind p);
std::string_view to_string(LabelType l);
std::string_view to_string(Quantification q);
PlatformKind parse_platform(std::string_view text);          // throws ConfigError
LabelType parse_label_type(std::string_view text);           // throws ConfigError
Quantification parse_quantification(std::string_view text);  // throws ConfigError

/// Column names for the config-mapped wide-table parser. Empty = unmapped.
struct GenericMapping {
  std::string id;
  std::string gene;
  std::string description;
  std::string abundance_prefix = "Abundance";
  std::string peptide_count;
  std::string unique_peptide_count;
  std::string psm_count;

  static GenericMapping proteome_discoverer();

  friend bool operator==(const GenericMapping&, const GenericMapping&) = default;
};

struct GroupPattern {
  std::string name;
  std::string regex;

  friend bool operator==(const GroupPattern&, const GroupPattern&) = default;
};

struct IngestConfig {
  PlatformKind platform = PlatformKind::maxquant;
  LabelType label_type = LabelType::label_free;
  Quantification quantification = Quantification::lfq;
  std::string organism;
  std::vector<GroupPattern> group_patterns;
  std::optional<GenericMapping> generic_mapping;

  /// Throws ConfigError when generic_mapping presence does not match the platform.
  void validate() const;

  friend bool operator==(const IngestConfig&, const IngestConfig&) = default;
};

struct RawTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> warnings;

  std::optional<std::size_t> column(std::string_view name) const;
};

struct IngestResult {
  ProteinTable table;
  ExpressionMatrix matrix;
  std::vector<std::string> warnings;
};

/// Splits delimited UTF-8 text. Comma files honor RFC-4180 quoting; tab
/// files are split verbatim. Short rows are padded and reported.
RawTable read_delimited(std::string_view bytes, char delimiter);

/// Tab unless the first line has no tab but does contain a comma.
char sniff_delimiter(std::string_view bytes);

IngestResult parse_maxquant(const RawTable& raw, const IngestConfig& config);
IngestResult parse_msfragger(const RawTable& raw, const IngestConfig& config);
IngestResult parse_diann(const RawTable& pg_matrix, const RawTable* report, const IngestConfig& config);
IngestResult parse_generic(const RawTable& raw, const IngestConfig& config);

/// Dispatches on config.platform.
IngestResult parse(std::string_view main_bytes, std::optional<std::string_view> report_bytes, const IngestConfig& config);

/// Regex column selection (ECMAScript search semantics, case-sensitive).
GroupDesign select_groups(const ExpressionMatrix& matrix, const std::vector<GroupPattern>& patterns);
GroupDesign select_groups(const std::vector<std::string>& columns, const std::vector<GroupPattern>& patterns);

/// "ctrl=^ctrl;trt=^trt" -> [(ctrl, ^ctrl), (trt, ^trt)].
std::vector<GroupPattern> parse_group_spec(std::string_view spec);

/// Run path to sample name: basename without directory and extension.
std::string run_basename(std::string_view path);

}  // namespace protodown::ingest
