#pragma once

#include "krafty/types.hpp"

#include <cstdint>
#include <vector>

namespace krafty {

struct KMeansResult {
  Assignment assignment;
  Matrix centers;  // k x d
  double objective = 0.0;
  int iterations = 0;
  int restarts_used = 0;
  /// Objective after each Lloyd iteration of the winning restart;
  /// non-increasing.
  std::vector<double> objective_trace;
};

/// k-means++ seeding followed by Lloyd iterations, best objective over
/// `restarts` independent restarts. Each restart owns an RNG stream derived
/// from (seed, restart index), so results do not depend on scheduling.
/// Empty clusters are repaired by stealing the point farthest from its
/// current center.
KMeansResult kmeans(const Matrix& x, int k, int restarts = 10,
                    int max_iter = 100, std::uint64_t seed = 0);

/// Complete-linkage agglomeration record. Initial clusters carry ids
/// 0..n-1; the merge at step t (t = 2..n) creates id n + t - 2. The height
/// of a merge is the diameter of the newly formed cluster.
struct Dendrogram {
  struct Merge {
    int step;    // 2..n
    int left;    // smaller cluster id of the merged pair
    int right;   // larger cluster id
    int merged;  // id of the new cluster
    double height;
  };
  std::vector<Merge> merges;  // exactly n - 1 entries
  int n = 0;
};

/// Complete-linkage hierarchical clustering of the rows of x (Euclidean
/// distances), via Lance-Williams updates on a dissimilarity matrix.
/// Ties are broken toward the lexicographically smallest pair of current
/// cluster ids.
Dendrogram hierarchical_complete(const Matrix& x);

/// The partition after exactly n - k merges, labels renumbered by order of
/// first appearance over items 0..n-1.
Assignment cut_dendrogram(const Dendrogram& d, int k);

}  // namespace krafty
