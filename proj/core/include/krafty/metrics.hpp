#pragma once

#include "krafty/types.hpp"

#include <cstdint>
#include <vector>

namespace krafty {

/// Cross-tabulation of two assignments over the same items.
struct ContingencyTable {
  int rows = 0;  // clusters of a
  int cols = 0;  // clusters of b
  std::vector<std::int64_t> counts;  // row-major rows x cols
  std::int64_t n = 0;

  static ContingencyTable from(const Assignment& a, const Assignment& b);

  std::int64_t at(int i, int j) const {
    return counts[static_cast<std::size_t>(i) * static_cast<std::size_t>(cols) + static_cast<std::size_t>(j)];
  }
};

/// Hubert-Arabie Adjusted Rand Index in [-1, 1]. Pair counts are computed
/// with 128-bit integer intermediates, so there is no overflow at large n.
double adjusted_rand_index(const Assignment& a, const Assignment& b);

/// Minimum number of disagreements over injective matchings of cluster
/// labels, found by maximum-weight bipartite matching on the contingency
/// table (the smaller side is padded with empty classes).
std::int64_t misclustering_count(const Assignment& truth, const Assignment& est);

/// |k_hat - k_true|.
std::int64_t abs_error_k(std::int64_t k_hat, std::int64_t k_true);

}  // namespace krafty
