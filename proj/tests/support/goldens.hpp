#pragma once

#include <string>
#include <vector>

namespace golden {

/// Parses the five platform fixtures and compares them with hand-written
/// expectations. Returns one message per mismatch; empty means all match.
std::vector<std::string> check_parsers();

/// DIA-NN counts recomputed by a direct group-by over the fixture report.
std::vector<std::string> check_diann_counts();

}  // namespace golden
