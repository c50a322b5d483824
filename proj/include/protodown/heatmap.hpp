#pragma once

#include <span>
#include <string>
#include <vector>

#include "protodown/core.hpp"

namespace protodown::heatmap {

/// One agglomeration step. Node ids follow the usual convention: leaves
/// are 0..n-1, the cluster created at step k is n + k. `left` is the child
/// holding the smaller original index.
struct Merge {
  std::size_t left;
  std::size_t right;
  double height;
  std::size_t size;

  friend bool operator==(const Merge&, const Merge&) = default;
};

struct Dendrogram {
  std::vector<Merge> merges;
  std::vector<std::size_t> leaf_order;
};

/// Average-linkage agglomerative clustering on Euclidean distances. Ties
/// merge the pair whose (smaller original index, larger original index) is
/// lexicographically smallest.
Dendrogram average_linkage(const std::vector<std::vector<double>>& points);

/// Left-first traversal of the merge tree.
std::vector<std::size_t> leaf_order(std::size_t n, std::span<const Merge> merges);

struct HeatmapData {
  std::vector<std::string> row_ids;
  std::vector<std::string> col_ids;
  /// Row z-scores, rows x cols in input order.
  std::vector<std::vector<double>> z;
  Dendrogram rows;
  Dendrogram cols;
  std::vector<std::string> warnings;
  std::string notice;  // set when the payload is empty
  bool truncated = false;

  bool empty() const { return row_ids.empty(); }
};

inline constexpr std::size_t kMaxHeatmapRows = 2000;

/// Z-scores the selected rows of a complete matrix and clusters rows and
/// columns. Fewer than two rows -> empty payload with a notice.
HeatmapData heatmap_data(const ExpressionMatrix& matrix, std::span<const std::size_t> rows);

}  // namespace protodown::heatmap
