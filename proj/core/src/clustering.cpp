#include "krafty/clustering.hpp"

#include "krafty/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <tuple>
#include <utility>

namespace krafty {

namespace {

double squared_distance(const Matrix& x, Index i, const Matrix& centers, Index c) {
  return (x.row(i) - centers.row(c)).squaredNorm();
}

// Ties go to the lowest center index.
int nearest_center(const Matrix& x, Index i, const Matrix& centers) {
  int best = 0;
  double best_d = squared_distance(x, i, centers, 0);
  for (Index c = 1; c < centers.rows(); ++c) {
    const double d = squared_distance(x, i, centers, c);
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  return best;
}

Matrix kmeanspp_seed(const Matrix& x, int k, Rng& rng) {
  const Index n = x.rows();
  Matrix centers(k, x.cols());
  const Index first = rng.uniform_int(0, n - 1);
  centers.row(0) = x.row(first);
  std::vector<double> d2(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) d2[static_cast<std::size_t>(i)] = squared_distance(x, i, centers, 0);
  for (int c = 1; c < k; ++c) {
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    Index pick;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double cum = 0.0;
      pick = n - 1;
      for (Index i = 0; i < n; ++i) {
        cum += d2[static_cast<std::size_t>(i)];
        if (cum > target) {
          pick = i;
          break;
        }
      }
    } else {
      // All points coincide with an existing center.
      pick = rng.uniform_int(0, n - 1);
    }
    centers.row(c) = x.row(pick);
    for (Index i = 0; i < n; ++i) {
      auto& d = d2[static_cast<std::size_t>(i)];
      d = std::min(d, squared_distance(x, i, centers, c));
    }
  }
  return centers;
}

struct LloydOutcome {
  std::vector<int> labels;
  Matrix centers;
  double objective = 0.0;
  int iterations = 0;
  std::vector<double> trace;
};

LloydOutcome lloyd(const Matrix& x, int k, int max_iter, Rng& rng) {
  const Index n = x.rows();
  LloydOutcome out;
  out.centers = kmeanspp_seed(x, k, rng);
  out.labels.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) out.labels[static_cast<std::size_t>(i)] = nearest_center(x, i, out.centers);

  auto objective_of = [&](const std::vector<int>& labels) {
    double obj = 0.0;
    for (Index i = 0; i < n; ++i) obj += squared_distance(x, i, out.centers, labels[static_cast<std::size_t>(i)]);
    return obj;
  };

  out.objective = objective_of(out.labels);
  out.trace.push_back(out.objective);

  for (int iter = 1; iter <= max_iter; ++iter) {
    // Update step.
    std::vector<std::int64_t> sizes(static_cast<std::size_t>(k), 0);
    Matrix sums = Matrix::Zero(k, x.cols());
    for (Index i = 0; i < n; ++i) {
      const int c = out.labels[static_cast<std::size_t>(i)];
      ++sizes[static_cast<std::size_t>(c)];
      sums.row(c) += x.row(i);
    }
    for (int c = 0; c < k; ++c) {
      if (sizes[static_cast<std::size_t>(c)] > 0) {
        out.centers.row(c) = sums.row(c) / static_cast<double>(sizes[static_cast<std::size_t>(c)]);
      }
    }
    // Repair empty clusters: steal the point farthest from its center,
    // skipping singleton clusters.
    for (int c = 0; c < k; ++c) {
      if (sizes[static_cast<std::size_t>(c)] > 0) continue;
      Index steal = -1;
      double worst = -1.0;
      for (Index i = 0; i < n; ++i) {
        const int owner = out.labels[static_cast<std::size_t>(i)];
        if (sizes[static_cast<std::size_t>(owner)] <= 1) continue;
        const double d = squared_distance(x, i, out.centers, owner);
        if (d > worst) {
          worst = d;
          steal = i;
        }
      }
      if (steal < 0) continue;  // nothing stealable; cluster stays empty this round
      const int owner = out.labels[static_cast<std::size_t>(steal)];
      --sizes[static_cast<std::size_t>(owner)];
      ++sizes[static_cast<std::size_t>(c)];
      out.labels[static_cast<std::size_t>(steal)] = c;
      out.centers.row(c) = x.row(steal);
      // Re-center the donor cluster.
      Matrix donor_sum = Matrix::Zero(1, x.cols());
      for (Index i = 0; i < n; ++i) {
        if (out.labels[static_cast<std::size_t>(i)] == owner) donor_sum.row(0) += x.row(i);
      }
      out.centers.row(owner) = donor_sum.row(0) / static_cast<double>(sizes[static_cast<std::size_t>(owner)]);
    }

    // Assign step.
    std::vector<int> next(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) next[static_cast<std::size_t>(i)] = nearest_center(x, i, out.centers);
    const bool converged = (next == out.labels);
    out.labels = std::move(next);
    out.objective = objective_of(out.labels);
    out.trace.push_back(out.objective);
    out.iterations = iter;
    if (converged) break;
  }
  return out;
}

}  // namespace

KMeansResult kmeans(const Matrix& x, int k, int restarts, int max_iter, std::uint64_t seed) {
  if (x.rows() < 1) throw input_error("kmeans: no points");
  if (k < 1 || k > x.rows()) {
    throw input_error("kmeans: k = " + std::to_string(k) + " outside [1, " +
                      std::to_string(x.rows()) + "]");
  }
  if (restarts < 1) throw input_error("kmeans: restarts must be >= 1");
  if (max_iter < 1) throw input_error("kmeans: max_iter must be >= 1");

  LloydOutcome best;
  bool have_best = false;
  for (int r = 0; r < restarts; ++r) {
    Rng rng(Rng::derive(seed, static_cast<std::uint64_t>(r)));
    LloydOutcome candidate = lloyd(x, k, max_iter, rng);
    if (!have_best || candidate.objective < best.objective) {
      best = std::move(candidate);
      have_best = true;
    }
  }

  // Empty clusters can survive only in degenerate duplicate-heavy inputs;
  // fold them out by compacting labels would break k, so fail loudly.
  std::vector<std::int64_t> sizes(static_cast<std::size_t>(k), 0);
  for (int label : best.labels) ++sizes[static_cast<std::size_t>(label)];
  for (int c = 0; c < k; ++c) {
    if (sizes[static_cast<std::size_t>(c)] == 0) {
      throw numeric_error("kmeans: could not populate " + std::to_string(k) +
                          " clusters (fewer distinct points than k)");
    }
  }

  return KMeansResult{Assignment(std::move(best.labels), k), std::move(best.centers),
                      best.objective, best.iterations, restarts, std::move(best.trace)};
}

Dendrogram hierarchical_complete(const Matrix& x) {
  const Index n = x.rows();
  if (n < 2) throw input_error("hierarchical_complete: need at least 2 points");

  std::vector<double> dist(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0.0);
  auto d_at = [&](Index i, Index j) -> double& {
    return dist[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)];
  };
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const double d = (x.row(i) - x.row(j)).norm();
      d_at(i, j) = d;
      d_at(j, i) = d;
    }
  }

  std::vector<Index> active(static_cast<std::size_t>(n));
  std::iota(active.begin(), active.end(), Index{0});
  std::vector<int> cluster_id(static_cast<std::size_t>(n));
  std::iota(cluster_id.begin(), cluster_id.end(), 0);

  Dendrogram out;
  out.n = static_cast<int>(n);
  out.merges.reserve(static_cast<std::size_t>(n - 1));

  for (Index t = 0; t + 1 < n; ++t) {
    // Global scan: minimize (distance, smaller id, larger id).
    double best_d = std::numeric_limits<double>::infinity();
    int best_lo = 0, best_hi = 0;
    std::size_t best_a = 0, best_b = 0;
    for (std::size_t a = 0; a + 1 < active.size(); ++a) {
      for (std::size_t b = a + 1; b < active.size(); ++b) {
        const double d = d_at(active[a], active[b]);
        int lo = cluster_id[static_cast<std::size_t>(active[a])];
        int hi = cluster_id[static_cast<std::size_t>(active[b])];
        if (lo > hi) std::swap(lo, hi);
        if (std::tie(d, lo, hi) < std::tie(best_d, best_lo, best_hi)) {
          best_d = d;
          best_lo = lo;
          best_hi = hi;
          best_a = a;
          best_b = b;
        }
      }
    }

    const Index slot_keep = active[best_a];
    const Index slot_drop = active[best_b];
    const int new_id = static_cast<int>(n + t);
    out.merges.push_back({static_cast<int>(t) + 2, best_lo, best_hi, new_id, best_d});

    // Lance-Williams complete linkage: d(new, s) = max(d(keep, s), d(drop, s)).
    for (Index s : active) {
      if (s == slot_keep || s == slot_drop) continue;
      const double d = std::max(d_at(slot_keep, s), d_at(slot_drop, s));
      d_at(slot_keep, s) = d;
      d_at(s, slot_keep) = d;
    }
    cluster_id[static_cast<std::size_t>(slot_keep)] = new_id;
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(best_b));
  }
  return out;
}

Assignment cut_dendrogram(const Dendrogram& d, int k) {
  const int n = d.n;
  if (k < 1 || k > n) {
    throw input_error("cut_dendrogram: k = " + std::to_string(k) + " outside [1, " +
                      std::to_string(n) + "]");
  }
  if (static_cast<int>(d.merges.size()) != n - 1) {
    throw input_error("cut_dendrogram: dendrogram has " + std::to_string(d.merges.size()) +
                      " merges for n = " + std::to_string(n));
  }
  std::vector<int> parent(static_cast<std::size_t>(2 * n - 1));
  std::iota(parent.begin(), parent.end(), 0);
  for (int m = 0; m < n - k; ++m) {
    parent[static_cast<std::size_t>(d.merges[static_cast<std::size_t>(m)].left)] = d.merges[static_cast<std::size_t>(m)].merged;
    parent[static_cast<std::size_t>(d.merges[static_cast<std::size_t>(m)].right)] = d.merges[static_cast<std::size_t>(m)].merged;
  }
  auto find_root = [&](int v) {
    while (parent[static_cast<std::size_t>(v)] != v) v = parent[static_cast<std::size_t>(v)];
    return v;
  };
  std::vector<int> labels(static_cast<std::size_t>(n));
  std::vector<int> relabel(static_cast<std::size_t>(2 * n - 1), -1);
  int next = 0;
  for (int i = 0; i < n; ++i) {
    const int root = find_root(i);
    if (relabel[static_cast<std::size_t>(root)] < 0) relabel[static_cast<std::size_t>(root)] = next++;
    labels[static_cast<std::size_t>(i)] = relabel[static_cast<std::size_t>(root)];
  }
  return Assignment(std::move(labels), next);
}

}  // namespace krafty
