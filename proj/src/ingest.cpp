#include "protodown/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <regex>
#include <set>
#include <unordered_map>

namespace protodown::ingest {

std::string_view to_string(PlatformKind p) {
  switch (p) {
    case PlatformKind::maxquant: return "maxquant";
    case PlatformKind::msfragger: return "msfragger";
    case PlatformKind::diann: return "diann";
    case PlatformKind::proteome_discoverer: return "proteome_discoverer";
    case PlatformKind::generic_wide: return "generic_wide";
  }
  return "";
}

std::string_view to_string(LabelType l) {
  switch (l) {
    case LabelType::label_free: return "label_free";
    case LabelType::tmt: return "tmt";
    case LabelType::silac: return "silac";
  }
  return "";
}

std::string_view to_string(Quantification q) {
  switch (q) {
    case Quantification::intensity: return "intensity";
    case Quantification::lfq: return "lfq";
    case Quantification::spectral_count: return "spectral_count";
    case Quantification::reporter: return "reporter";
  }
  return "";
}

PlatformKind parse_platform(std::string_view text) {
  for (auto p : {PlatformKind::maxquant, PlatformKind::msfragger, PlatformKind::diann,
                 PlatformKind::proteome_discoverer, PlatformKind::generic_wide}) {
    if (text == to_string(p)) return p;
  }
  if (text == "proteoscape") return PlatformKind::generic_wide;
  throw ConfigError("unknown platform: " + std::string(text));
}

LabelType parse_label_type(std::string_view text) {
  for (auto l : {LabelType::label_free, LabelType::tmt, LabelType::silac}) {
    if (text == to_string(l)) return l;
  }
  throw ConfigError("unknown label type: " + std::string(text));
}

Quantification parse_quantification(std::string_view text) {
  for (auto q : {Quantification::intensity, Quantification::lfq, Quantification::spectral_count,
                 Quantification::reporter}) {
    if (text == to_string(q)) return q;
  }
  throw ConfigError("unknown quantification mode: " + std::string(text));
}

GenericMapping GenericMapping::proteome_discoverer() {
  GenericMapping m;
  m.id = "Accession";
  m.gene = "Gene Symbol";
  m.description = "Description";
  m.abundance_prefix = "Abundance";
  m.peptide_count = "# Peptides";
  m.unique_peptide_count = "# Unique Peptides";
  m.psm_count = "# PSMs";
  return m;
}

void IngestConfig::validate() const {
  const bool needs_mapping =
      platform == PlatformKind::proteome_discoverer || platform == PlatformKind::generic_wide;
  if (needs_mapping && !generic_mapping) {
    throw ConfigError("platform " + std::string(to_string(platform)) + " requires a generic column mapping");
  }
  if (!needs_mapping && generic_mapping) {
    throw ConfigError("generic column mapping is only accepted for proteome_discoverer and generic_wide");
  }
}

std::optional<std::size_t> RawTable::column(std::string_view name) const {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) return std::nullopt;
  return static_cast<std::size_t>(it - header.begin());
}

// ---------------------------------------------------------------------------
// Delimited text

namespace {

std::string_view strip_bom(std::string_view bytes) {
  if (bytes.size() >= 3 && static_cast<unsigned char>(bytes[0]) == 0xEF &&
      static_cast<unsigned char>(bytes[1]) == 0xBB && static_cast<unsigned char>(bytes[2]) == 0xBF) {
    bytes.remove_prefix(3);
  }
  return bytes;
}

std::vector<std::vector<std::string>> split_tab(std::string_view text) {
  std::vector<std::vector<std::string>> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = end + 1;
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      auto tab = line.find('\t', start);
      if (tab == std::string_view::npos) {
        cells.emplace_back(line.substr(start));
        break;
      }
      cells.emplace_back(line.substr(start, tab - start));
      start = tab + 1;
    }
    lines.push_back(std::move(cells));
  }
  return lines;
}

std::vector<std::vector<std::string>> split_csv(std::string_view text) {
  std::vector<std::vector<std::string>> lines;
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    any = true;
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          cell += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell += ch;
      }
      continue;
    }
    if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else if (ch == '\r' && i + 1 < text.size() && text[i + 1] == '\n') {
      // handled by the following '\n'
    } else if (ch == '\n') {
      cells.push_back(std::move(cell));
      cell.clear();
      lines.push_back(std::move(cells));
      cells.clear();
      any = false;
    } else {
      cell += ch;
    }
  }
  if (quoted) throw FormatError("unterminated quoted field at end of file");
  if (any) {
    cells.push_back(std::move(cell));
    lines.push_back(std::move(cells));
  }
  return lines;
}

bool blank(const std::vector<std::string>& cells) {
  return std::all_of(cells.begin(), cells.end(), [](const std::string& c) { return c.empty(); });
}

}  // namespace

char sniff_delimiter(std::string_view bytes) {
  bytes = strip_bom(bytes);
  auto first = bytes.substr(0, bytes.find('\n'));
  if (first.find('\t') == std::string_view::npos && first.find(',') != std::string_view::npos) return ',';
  return '\t';
}

RawTable read_delimited(std::string_view bytes, char delimiter) {
  if (delimiter != '\t' && delimiter != ',') throw ConfigError("delimiter must be tab or comma");
  bytes = strip_bom(bytes);
  auto lines = delimiter == '\t' ? split_tab(bytes) : split_csv(bytes);
  while (!lines.empty() && blank(lines.back())) lines.pop_back();
  if (lines.empty()) throw FormatError("empty file");

  RawTable raw;
  raw.header = std::move(lines.front());
  const auto width = raw.header.size();
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto& cells = lines[i];
    if (blank(cells) && cells.size() <= 1) continue;
    if (cells.size() < width) {
      raw.warnings.push_back("line " + std::to_string(i + 1) + ": " + std::to_string(cells.size()) +
                             " cells, expected " + std::to_string(width) + "; padded with empty cells");
      cells.resize(width);
    } else if (cells.size() > width) {
      raw.warnings.push_back("line " + std::to_string(i + 1) + ": " + std::to_string(cells.size()) +
                             " cells, expected " + std::to_string(width) + "; extra cells ignored");
      cells.resize(width);
    }
    raw.rows.push_back(std::move(cells));
  }
  return raw;
}

// ---------------------------------------------------------------------------
// Cell parsing

namespace {

std::string_view trim(std::string_view s, std::string_view chars = " \t\r\n") {
  const auto b = s.find_first_not_of(chars);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(chars);
  return s.substr(b, e - b + 1);
}

bool starts_with(std::string_view s, std::string_view prefix) { return s.substr(0, prefix.size()) == prefix; }
bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

std::string cell_context(std::size_t row, const std::string& column) {
  // header is line 1
  return "line " + std::to_string(row + 2) + ", column '" + column + "'";
}

/// Abundance cell: empty, 0, NaN/NA or non-positive -> missing.
std::optional<double> parse_abundance(std::string_view cell, std::size_t row, const std::string& column) {
  cell = trim(cell);
  if (cell.empty() || cell == "NaN" || cell == "nan" || cell == "NA" || cell == "N/A" || cell == "#N/A") {
    return std::nullopt;
  }
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw FormatError("non-numeric abundance '" + std::string(cell) + "' at " + cell_context(row, column),
                      cell_context(row, column));
  }
  if (!std::isfinite(v) || v <= 0.0) return std::nullopt;
  return v;
}

std::optional<int> parse_count(std::string_view cell, std::size_t row, const std::string& column) {
  cell = trim(cell);
  if (cell.empty() || cell == "NaN" || cell == "NA") return std::nullopt;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v) || v < 0.0) {
    throw FormatError("invalid count '" + std::string(cell) + "' at " + cell_context(row, column),
                      cell_context(row, column));
  }
  return static_cast<int>(std::lround(v));
}

struct AbundanceColumn {
  std::size_t index;
  std::string sample;
};

/// Assembles table + matrix from row metadata and abundance columns.
/// `record_of` fills all metadata except min_psm_count.
template <typename RecordOf>
IngestResult assemble(const RawTable& raw, std::size_t id_col, const std::vector<AbundanceColumn>& abundance,
                      RecordOf record_of) {
  IngestResult out;
  out.warnings = raw.warnings;
  std::vector<std::string> row_ids;
  std::vector<std::size_t> kept;
  std::set<std::string> seen;
  for (std::size_t r = 0; r < raw.rows.size(); ++r) {
    std::string id(trim(raw.rows[r][id_col]));
    if (id.empty()) {
      out.warnings.push_back(cell_context(r, raw.header[id_col]) + ": empty protein id, row skipped");
      continue;
    }
    if (!seen.insert(id).second) {
      out.warnings.push_back(cell_context(r, raw.header[id_col]) + ": duplicate protein id '" + id +
                             "', row skipped");
      continue;
    }
    row_ids.push_back(id);
    kept.push_back(r);
  }
  std::vector<std::string> samples;
  for (const auto& a : abundance) samples.push_back(a.sample);
  {
    std::set<std::string> unique(samples.begin(), samples.end());
    if (unique.size() != samples.size()) throw FormatError("abundance columns map to duplicate sample names");
  }

  out.matrix = ExpressionMatrix(row_ids, samples, Scale::linear);
  out.table.records.reserve(kept.size());
  for (std::size_t i = 0; i < kept.size(); ++i) {
    const auto r = kept[i];
    for (std::size_t j = 0; j < abundance.size(); ++j) {
      if (auto v = parse_abundance(raw.rows[r][abundance[j].index], r, raw.header[abundance[j].index])) {
        out.matrix.set(i, j, *v);
      }
    }
    ProteinRecord rec = record_of(r);
    rec.protein_id = row_ids[i];
    if (rec.peptide_count && rec.unique_peptide_count && *rec.unique_peptide_count > *rec.peptide_count) {
      out.warnings.push_back(cell_context(r, "unique peptides") + ": unique count exceeds peptide count, clamped");
      rec.unique_peptide_count = rec.peptide_count;
    }
    update_min_psm_count(rec, out.matrix, i);
    out.table.records.push_back(std::move(rec));
  }
  return out;
}

std::string cell_or_empty(const RawTable& raw, std::size_t row, std::optional<std::size_t> col) {
  return col ? std::string(trim(raw.rows[row][*col])) : std::string();
}

std::optional<int> count_or_absent(const RawTable& raw, std::size_t row, std::optional<std::size_t> col) {
  return col ? parse_count(raw.rows[row][*col], row, raw.header[*col]) : std::nullopt;
}

}  // namespace

// ---------------------------------------------------------------------------
// MaxQuant proteinGroups.txt

IngestResult parse_maxquant(const RawTable& raw, const IngestConfig& config) {
  auto id_col = raw.column("Majority protein IDs");
  if (!id_col) id_col = raw.column("Protein IDs");
  if (!id_col) throw FormatError("MaxQuant table lacks 'Majority protein IDs' / 'Protein IDs'");

  std::string prefix;
  switch (config.quantification) {
    case Quantification::lfq: prefix = "LFQ intensity "; break;
    case Quantification::intensity: prefix = "Intensity "; break;
    case Quantification::reporter: prefix = "Reporter intensity corrected"; break;
    case Quantification::spectral_count: prefix = "MS/MS count "; break;
  }
  std::vector<AbundanceColumn> abundance;
  for (std::size_t c = 0; c < raw.header.size(); ++c) {
    std::string_view h = raw.header[c];
    if (!starts_with(h, prefix)) continue;
    std::string sample(trim(h.substr(prefix.size())));
    if (sample.empty()) continue;
    abundance.push_back({c, sample});
  }
  if (abundance.empty()) throw FormatError("no abundance column starts with '" + prefix + "'", prefix);

  const auto gene = raw.column("Gene names");
  auto description = raw.column("Protein names");
  if (!description) description = raw.column("Fasta headers");
  const auto peptides = raw.column("Peptides");
  const auto unique = raw.column("Unique peptides");
  const auto reverse = raw.column("Reverse");
  auto contaminant = raw.column("Potential contaminant");
  if (!contaminant) contaminant = raw.column("Contaminant");
  const auto by_site = raw.column("Only identified by site");

  std::vector<std::pair<std::string, std::size_t>> psm_columns;
  for (const auto& a : abundance) {
    if (auto c = raw.column("MS/MS count " + a.sample)) psm_columns.emplace_back(a.sample, *c);
  }

  auto flag_set = [&](std::size_t r, std::optional<std::size_t> col) {
    return col && trim(raw.rows[r][*col]) == "+";
  };

  return assemble(raw, *id_col, abundance, [&](std::size_t r) {
    ProteinRecord rec;
    rec.gene_names = cell_or_empty(raw, r, gene);
    rec.description = cell_or_empty(raw, r, description);
    rec.peptide_count = count_or_absent(raw, r, peptides);
    rec.unique_peptide_count = count_or_absent(raw, r, unique);
    for (const auto& [sample, col] : psm_columns) {
      if (auto n = parse_count(raw.rows[r][col], r, raw.header[col])) rec.psm_counts[sample] = *n;
    }
    if (flag_set(r, reverse)) rec.flags.insert(ProteinFlag::reverse);
    if (flag_set(r, contaminant)) rec.flags.insert(ProteinFlag::contaminant);
    if (flag_set(r, by_site)) rec.flags.insert(ProteinFlag::only_by_site);
    return rec;
  });
}

// ---------------------------------------------------------------------------
// MSFragger combined_protein.tsv

IngestResult parse_msfragger(const RawTable& raw, const IngestConfig& config) {
  const auto id_col = raw.column("Protein");
  if (!id_col) throw FormatError("MSFragger table lacks 'Protein' column");

  std::string suffix;
  std::vector<std::string> excluded;  // longer suffixes sharing the tail
  switch (config.quantification) {
    case Quantification::lfq: suffix = " MaxLFQ Intensity"; break;
    case Quantification::intensity:
    case Quantification::reporter:
      suffix = " Intensity";
      excluded = {" MaxLFQ Intensity", " Unique Intensity", " Total Intensity", " Razor Intensity"};
      break;
    case Quantification::spectral_count:
      suffix = " Spectral Count";
      excluded = {" Unique Spectral Count", " Total Spectral Count", " Razor Spectral Count"};
      break;
  }
  auto is_sample_column = [&](std::string_view h, std::string_view sfx, const std::vector<std::string>& excl) {
    if (!ends_with(h, sfx) || h.size() == sfx.size() || starts_with(h, "Combined ")) return false;
    return std::none_of(excl.begin(), excl.end(), [&](const std::string& e) { return ends_with(h, e); });
  };

  std::vector<AbundanceColumn> abundance;
  for (std::size_t c = 0; c < raw.header.size(); ++c) {
    std::string_view h = raw.header[c];
    if (is_sample_column(h, suffix, excluded)) {
      abundance.push_back({c, std::string(h.substr(0, h.size() - suffix.size()))});
    }
  }
  if (abundance.empty()) throw FormatError("no abundance column ends with '" + suffix + "'", suffix);

  std::vector<std::pair<std::string, std::size_t>> spectral;
  for (const auto& a : abundance) {
    if (auto c = raw.column(a.sample + " Spectral Count")) spectral.emplace_back(a.sample, *c);
  }
  const auto gene = raw.column("Gene");
  const auto description = raw.column("Description");
  const auto peptides = raw.column("Combined Total Peptides");
  const auto unique = raw.column("Combined Unique Peptides");

  return assemble(raw, *id_col, abundance, [&](std::size_t r) {
    ProteinRecord rec;
    rec.gene_names = cell_or_empty(raw, r, gene);
    rec.description = cell_or_empty(raw, r, description);
    rec.peptide_count = count_or_absent(raw, r, peptides);
    rec.unique_peptide_count = count_or_absent(raw, r, unique);
    for (const auto& [sample, col] : spectral) {
      if (auto n = parse_count(raw.rows[r][col], r, raw.header[col])) rec.psm_counts[sample] = *n;
    }
    std::string_view id = raw.rows[r][*id_col];
    if (starts_with(id, "rev_")) rec.flags.insert(ProteinFlag::reverse);
    if (starts_with(id, "contam_")) rec.flags.insert(ProteinFlag::contaminant);
    return rec;
  });
}

// ---------------------------------------------------------------------------
// DIA-NN report.pg_matrix.tsv (+ report.tsv)

std::string run_basename(std::string_view path) {
  const auto slash = path.find_last_of("/\\");
  if (slash != std::string_view::npos) path.remove_prefix(slash + 1);
  const auto dot = path.find_last_of('.');
  if (dot != std::string_view::npos && dot > 0) path = path.substr(0, dot);
  return std::string(path);
}

IngestResult parse_diann(const RawTable& pg_matrix, const RawTable* report, const IngestConfig&) {
  const auto id_col = pg_matrix.column("Protein.Group");
  if (!id_col) throw FormatError("DIA-NN matrix lacks 'Protein.Group' column");

  static const std::set<std::string> annotation = {"Protein.Group", "Protein.Ids", "Protein.Names", "Genes",
                                                   "First.Protein.Description"};
  std::vector<AbundanceColumn> abundance;
  for (std::size_t c = 0; c < pg_matrix.header.size(); ++c) {
    if (annotation.count(pg_matrix.header[c])) continue;
    abundance.push_back({c, run_basename(pg_matrix.header[c])});
  }
  if (abundance.empty()) throw FormatError("DIA-NN matrix has no run columns");

  std::vector<std::string> warnings;
  std::unordered_map<std::string, std::set<std::string>> group_sequences;
  std::unordered_map<std::string, std::set<std::string>> sequence_groups;
  if (report) {
    const auto rg = report->column("Protein.Group");
    const auto rs = report->column("Stripped.Sequence");
    if (!rg || !rs) throw FormatError("DIA-NN report lacks 'Protein.Group' or 'Stripped.Sequence'");
    for (const auto& row : report->rows) {
      const std::string g(trim(row[*rg]));
      const std::string s(trim(row[*rs]));
      if (g.empty() || s.empty()) continue;
      group_sequences[g].insert(s);
      sequence_groups[s].insert(g);
    }
  } else {
    warnings.push_back("DIA-NN report.tsv not supplied; peptide and unique peptide counts are absent");
  }

  const auto genes = pg_matrix.column("Genes");
  auto description = pg_matrix.column("First.Protein.Description");
  if (!description) description = pg_matrix.column("Protein.Names");

  auto out = assemble(pg_matrix, *id_col, abundance, [&](std::size_t r) {
    ProteinRecord rec;
    rec.gene_names = cell_or_empty(pg_matrix, r, genes);
    rec.description = cell_or_empty(pg_matrix, r, description);
    if (report) {
      const std::string g(trim(pg_matrix.rows[r][*id_col]));
      int total = 0;
      int unique = 0;
      if (auto it = group_sequences.find(g); it != group_sequences.end()) {
        total = static_cast<int>(it->second.size());
        for (const auto& s : it->second) unique += sequence_groups[s].size() == 1 ? 1 : 0;
      }
      rec.peptide_count = total;
      rec.unique_peptide_count = unique;
    }
    return rec;
  });
  out.warnings.insert(out.warnings.end(), warnings.begin(), warnings.end());
  return out;
}

// ---------------------------------------------------------------------------
// Config-mapped wide table (Proteome Discoverer, ProteoScape, anything else)

IngestResult parse_generic(const RawTable& raw, const IngestConfig& config) {
  if (!config.generic_mapping) throw ConfigError("generic parser requires a column mapping");
  const auto& m = *config.generic_mapping;
  const auto id_col = raw.column(m.id);
  if (!id_col) throw FormatError("mapped id column '" + m.id + "' not found", m.id);
  if (m.abundance_prefix.empty()) throw ConfigError("mapping needs a non-empty abundance prefix");

  std::vector<AbundanceColumn> abundance;
  for (std::size_t c = 0; c < raw.header.size(); ++c) {
    std::string_view h = raw.header[c];
    if (!starts_with(h, m.abundance_prefix)) continue;
    std::string sample(trim(h.substr(m.abundance_prefix.size()), " \t:;,_-"));
    if (sample.empty()) continue;
    abundance.push_back({c, sample});
  }
  if (abundance.empty()) {
    throw FormatError("no abundance column starts with '" + m.abundance_prefix + "'", m.abundance_prefix);
  }

  auto optional_column = [&](const std::string& name) -> std::optional<std::size_t> {
    return name.empty() ? std::nullopt : raw.column(name);
  };
  const auto gene = optional_column(m.gene);
  const auto description = optional_column(m.description);
  const auto peptides = optional_column(m.peptide_count);
  const auto unique = optional_column(m.unique_peptide_count);
  // psm_count is either one protein-level column or a per-sample prefix.
  const auto psm_total = optional_column(m.psm_count);
  std::vector<std::pair<std::string, std::size_t>> psm_per_sample;
  if (!m.psm_count.empty() && !psm_total) {
    for (const auto& a : abundance) {
      if (auto c = raw.column(m.psm_count + a.sample)) psm_per_sample.emplace_back(a.sample, *c);
    }
  }

  return assemble(raw, *id_col, abundance, [&](std::size_t r) {
    ProteinRecord rec;
    rec.gene_names = cell_or_empty(raw, r, gene);
    rec.description = cell_or_empty(raw, r, description);
    rec.peptide_count = count_or_absent(raw, r, peptides);
    rec.unique_peptide_count = count_or_absent(raw, r, unique);
    if (psm_total) {
      if (auto n = parse_count(raw.rows[r][*psm_total], r, raw.header[*psm_total])) {
        for (const auto& a : abundance) rec.psm_counts[a.sample] = *n;
      }
    }
    for (const auto& [sample, col] : psm_per_sample) {
      if (auto n = parse_count(raw.rows[r][col], r, raw.header[col])) rec.psm_counts[sample] = *n;
    }
    return rec;
  });
}

IngestResult parse(std::string_view main_bytes, std::optional<std::string_view> report_bytes,
                   const IngestConfig& config) {
  config.validate();
  switch (config.platform) {
    case PlatformKind::maxquant: return parse_maxquant(read_delimited(main_bytes, '\t'), config);
    case PlatformKind::msfragger: return parse_msfragger(read_delimited(main_bytes, '\t'), config);
    case PlatformKind::diann: {
      const auto pg = read_delimited(main_bytes, '\t');
      if (report_bytes) {
        const auto report = read_delimited(*report_bytes, '\t');
        auto out = parse_diann(pg, &report, config);
        out.warnings.insert(out.warnings.end(), report.warnings.begin(), report.warnings.end());
        return out;
      }
      return parse_diann(pg, nullptr, config);
    }
    case PlatformKind::proteome_discoverer: return parse_generic(read_delimited(main_bytes, '\t'), config);
    case PlatformKind::generic_wide:
      return parse_generic(read_delimited(main_bytes, sniff_delimiter(main_bytes)), config);
  }
  throw ConfigError("unsupported platform");
}

// ---------------------------------------------------------------------------
// Group selection

GroupDesign select_groups(const ExpressionMatrix& matrix, const std::vector<GroupPattern>& patterns) {
  return select_groups(matrix.col_ids(), patterns);
}

GroupDesign select_groups(const std::vector<std::string>& columns, const std::vector<GroupPattern>& patterns) {
  if (patterns.empty()) throw DesignError("no group patterns supplied");
  GroupDesign design;
  std::map<std::string, std::vector<std::string>> matched_by;
  for (const auto& p : patterns) {
    std::regex re;
    try {
      re = std::regex(p.regex, std::regex::ECMAScript);
    } catch (const std::regex_error& e) {
      throw SyntaxError("invalid regular expression for group " + p.name + ": '" + p.regex + "' (" + e.what() + ")",
                        p.regex);
    }
    Group g{p.name, p.regex, {}};
    for (const auto& c : columns) {
      if (std::regex_search(c, re)) {
        g.columns.push_back(c);
        matched_by[c].push_back(p.name);
      }
    }
    if (g.columns.empty()) {
      throw DesignError("pattern '" + p.regex + "' for group " + p.name + " matches no column", p.regex);
    }
    design.groups.push_back(std::move(g));
  }
  std::string ambiguous;
  for (const auto& c : columns) {
    auto it = matched_by.find(c);
    if (it != matched_by.end() && it->second.size() > 1) ambiguous += (ambiguous.empty() ? "" : ", ") + c;
  }
  if (!ambiguous.empty()) throw DesignError("columns matched by more than one pattern: " + ambiguous, ambiguous);
  design.validate();
  return design;
}

std::vector<GroupPattern> parse_group_spec(std::string_view spec) {
  std::vector<GroupPattern> out;
  std::size_t pos = 0;
  while (pos <= spec.size()) {
    auto end = spec.find(';', pos);
    if (end == std::string_view::npos) end = spec.size();
    auto item = trim(spec.substr(pos, end - pos));
    pos = end + 1;
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string_view::npos || eq == 0 || eq + 1 == item.size()) {
      throw ConfigError("group spec entry must be name=regex: '" + std::string(item) + "'");
    }
    out.push_back({std::string(trim(item.substr(0, eq))), std::string(item.substr(eq + 1))});
  }
  if (out.empty()) throw ConfigError("empty group spec");
  return out;
}

}  // namespace protodown::ingest
