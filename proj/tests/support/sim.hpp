#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "protodown/core.hpp"

namespace sim {

/// log2-scale matrix, N(mu, sd) cells, each missing with probability `missing`.
protodown::ExpressionMatrix random_log2(std::size_t rows, std::size_t cols, double missing, std::uint64_t seed,
                                        double mu = 25.0, double sd = 2.0);

oracle::Grid to_grid(const protodown::ExpressionMatrix& m);

struct SpikeIn {
  std::string maxquant;              // proteinGroups.txt text
  std::vector<std::string> ids;      // row order
  std::vector<bool> spiked;          // true log2FC = 1 (trt over ctrl)
  double missing_fraction = 0.0;
};

/// 1000 proteins, ctrl_1..3 / trt_1..3, noise SD 0.3, 100 spiked rows,
/// about 15% of cells missing with a preference for low abundance.
SpikeIn spike_in(std::uint64_t seed, std::size_t proteins = 1000, std::size_t spiked = 100);

}  // namespace sim
