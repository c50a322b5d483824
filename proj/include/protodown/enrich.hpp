#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "protodown/transport.hpp"

namespace protodown::enrich {

struct AnnotationSet {
  std::string term_id;
  std::string term_name;
  std::string source;
  std::vector<std::string> members;  // sorted, unique
};

struct GmtResult {
  std::vector<AnnotationSet> sets;
  std::vector<std::string> warnings;
};

/// GMT: term_id \t description \t member... per line. A description of the
/// form "SOURCE|name" sets the source; otherwise it is the term_id prefix
/// before ':' (or "GMT").
GmtResult parse_gmt(std::string_view bytes);

enum class Correction { bh, bonferroni };
enum class QuerySelector { up, down, union_ };

std::string_view to_string(Correction c);
std::string_view to_string(QuerySelector s);
Correction parse_correction(std::string_view text);
QuerySelector parse_selector(std::string_view text);

struct EnrichmentRow {
  std::string term_id;
  std::string term_name;
  std::string source;
  std::size_t k = 0;
  std::size_t n = 0;
  std::size_t K = 0;
  std::size_t N = 0;
  double p = 1.0;
  double p_adj = 1.0;
  bool significant = false;
  std::vector<std::string> overlap_ids;

  friend bool operator==(const EnrichmentRow&, const EnrichmentRow&) = default;
};

struct OraOptions {
  std::size_t min_size = 3;
  std::size_t max_size = 500;
  Correction correction = Correction::bh;
  double sig_threshold = 0.05;
  friend bool operator==(const OraOptions&, const OraOptions&) = default;
};

struct OraResult {
  std::vector<EnrichmentRow> rows;
  std::vector<std::string> warnings;
};

/// P(X >= k) for X ~ Hypergeometric(N, K, n), summed in log space.
double hypergeometric_upper_tail(std::size_t k, std::size_t N, std::size_t K, std::size_t n);

OraResult ora(const std::set<std::string>& query, const std::set<std::string>& universe,
              const std::vector<AnnotationSet>& sets, const OraOptions& options = {});

struct DotPoint {
  std::string term_id;
  std::string term_name;
  std::string source;
  double gene_ratio;
  double size;
  double color;  // -log10 p_adj
};

struct BarItem {
  std::string term_id;
  std::string term_name;
  std::string source;
  double value;  // -log10 p_adj
};

struct ManhattanPoint {
  std::string term_id;
  std::string term_name;
  std::string source;
  double x;
  double y;
  bool significant;
};

struct EnrichPlots {
  std::vector<DotPoint> dot;
  std::vector<BarItem> bar;
  std::vector<ManhattanPoint> manhattan;
  int font_size = 12;
  std::string title;
};

double neg_log10(double p);

EnrichPlots enrich_plot_data(const std::vector<EnrichmentRow>& rows, int top_n, int font_size, std::string title);

/// CSV with source, term_id, term_name, k, n, K, N, p, p_adj, significant, overlap.
std::string export_table(const std::vector<EnrichmentRow>& rows);

struct RemoteOptions {
  std::string path = "/api/gost/profile/";
  std::string organism = "hsapiens";
  double threshold = 0.05;
};

/// Posts the query to a g:Profiler-style endpoint and maps the response.
std::vector<EnrichmentRow> remote_profile(const std::vector<std::string>& query, const RemoteOptions& options,
                                          transport::Transport& transport);

}  // namespace protodown::enrich
