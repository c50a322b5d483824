#include "protodown/heatmap.hpp"

#include <cmath>
#include <limits>
#include <tuple>

#include "protodown/stats.hpp"

namespace protodown::heatmap {

namespace {

double euclidean(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

struct Best {
  double distance = std::numeric_limits<double>::infinity();
  std::size_t partner = std::numeric_limits<std::size_t>::max();
};

}  // namespace

std::vector<std::size_t> leaf_order(std::size_t n, std::span<const Merge> merges) {
  std::vector<std::size_t> out;
  if (n == 0) return out;
  if (merges.empty()) {
    for (std::size_t i = 0; i < n; ++i) out.push_back(i);
    return out;
  }
  std::vector<std::size_t> stack{n + merges.size() - 1};
  while (!stack.empty()) {
    const auto node = stack.back();
    stack.pop_back();
    if (node < n) {
      out.push_back(node);
      continue;
    }
    const auto& m = merges[node - n];
    stack.push_back(m.right);
    stack.push_back(m.left);
  }
  return out;
}

Dendrogram average_linkage(const std::vector<std::vector<double>>& points) {
  const auto n = points.size();
  Dendrogram out;
  if (n == 0) return out;

  // Clusters live in the slot of their smallest original index. `sum` holds
  // the total leaf-to-leaf distance between two clusters.
  std::vector<double> sum(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      sum[i * n + j] = sum[j * n + i] = euclidean(points[i], points[j]);
    }
  }
  std::vector<std::size_t> size(n, 1);
  std::vector<std::size_t> node(n);
  std::vector<bool> active(n, true);
  for (std::size_t i = 0; i < n; ++i) node[i] = i;

  auto dist = [&](std::size_t i, std::size_t j) {
    return sum[i * n + j] / static_cast<double>(size[i] * size[j]);
  };
  // candidate (i, j) precedes (k, l) at equal distance when its index pair
  // is lexicographically smaller; for a fixed slot that is "smaller partner"
  auto better = [](double d, std::size_t j, const Best& b) {
    return d < b.distance || (d == b.distance && j < b.partner);
  };
  std::vector<Best> best(n);
  auto refresh = [&](std::size_t i) {
    best[i] = Best{};
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i || !active[j]) continue;
      const double d = dist(i, j);
      if (better(d, j, best[i])) best[i] = {d, j};
    }
  };
  for (std::size_t i = 0; i < n; ++i) refresh(i);

  for (std::size_t step = 0; step + 1 < n; ++step) {
    std::size_t a = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (!active[i]) continue;
      if (a == n) {
        a = i;
        continue;
      }
      const std::size_t il = std::min(i, best[i].partner), ih = std::max(i, best[i].partner);
      const std::size_t al = std::min(a, best[a].partner), ah = std::max(a, best[a].partner);
      if (std::tie(best[i].distance, il, ih) < std::tie(best[a].distance, al, ah)) a = i;
    }
    // by value: best[a] is rewritten below
    const std::size_t lo = std::min(a, best[a].partner), hi = std::max(a, best[a].partner);
    const double height = best[a].distance;

    out.merges.push_back({node[lo], node[hi], height, size[lo] + size[hi]});
    for (std::size_t k = 0; k < n; ++k) {
      if (!active[k] || k == lo || k == hi) continue;
      sum[lo * n + k] = sum[k * n + lo] = sum[lo * n + k] + sum[hi * n + k];
    }
    size[lo] += size[hi];
    active[hi] = false;
    node[lo] = n + step;

    refresh(lo);
    for (std::size_t k = 0; k < n; ++k) {
      if (!active[k] || k == lo) continue;
      if (best[k].partner == lo || best[k].partner == hi) {
        refresh(k);
      } else {
        const double d = dist(k, lo);
        if (better(d, lo, best[k])) best[k] = {d, lo};
      }
    }
  }
  out.leaf_order = leaf_order(n, out.merges);
  return out;
}

HeatmapData heatmap_data(const ExpressionMatrix& matrix, std::span<const std::size_t> rows) {
  HeatmapData out;
  if (rows.size() < 2) {
    out.notice = "heatmap needs at least 2 significant proteins";
    return out;
  }
  if (matrix.cols() < 2) throw PreconditionError("heatmap needs at least 2 samples");
  std::span<const std::size_t> used = rows;
  if (used.size() > kMaxHeatmapRows) {
    used = used.first(kMaxHeatmapRows);
    out.truncated = true;
    out.warnings.push_back("heatmap truncated to the first " + std::to_string(kMaxHeatmapRows) + " rows");
  }
  out.col_ids = matrix.col_ids();
  std::size_t flat = 0;
  for (auto r : used) {
    std::vector<double> values(matrix.cols());
    for (std::size_t c = 0; c < matrix.cols(); ++c) {
      if (!matrix.observed(r, c)) {
        throw PreconditionError("heatmap rows must be complete (impute first): " + matrix.row_ids()[r]);
      }
      values[c] = matrix.value(r, c);
    }
    const double m = stats::mean(values);
    const double sd = std::sqrt(stats::variance(values));
    for (auto& v : values) v = sd > 0.0 ? (v - m) / sd : 0.0;
    if (!(sd > 0.0)) ++flat;
    out.row_ids.push_back(matrix.row_ids()[r]);
    out.z.push_back(std::move(values));
  }
  if (flat > 0) out.warnings.push_back(std::to_string(flat) + " constant rows shown as all-zero z-scores");

  out.rows = average_linkage(out.z);
  std::vector<std::vector<double>> columns(matrix.cols(), std::vector<double>(out.z.size()));
  for (std::size_t i = 0; i < out.z.size(); ++i) {
    for (std::size_t c = 0; c < matrix.cols(); ++c) columns[c][i] = out.z[i][c];
  }
  out.cols = average_linkage(columns);
  return out;
}

}  // namespace protodown::heatmap
