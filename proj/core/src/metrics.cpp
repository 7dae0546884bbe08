#include "krafty/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace krafty {

namespace {

using int128 = __int128;

int128 choose2(std::int64_t v) {
  return static_cast<int128>(v) * (v - 1) / 2;
}

// Hungarian algorithm (potentials form), minimizing total cost over a
// perfect matching of an n x n matrix. O(n^3).
std::int64_t hungarian_min_cost(const std::vector<std::vector<std::int64_t>>& cost) {
  const int n = static_cast<int>(cost.size());
  const std::int64_t inf = std::numeric_limits<std::int64_t>::max() / 4;
  std::vector<std::int64_t> u(static_cast<std::size_t>(n) + 1, 0);
  std::vector<std::int64_t> v(static_cast<std::size_t>(n) + 1, 0);
  std::vector<int> match(static_cast<std::size_t>(n) + 1, 0);  // column -> row
  std::vector<int> way(static_cast<std::size_t>(n) + 1, 0);
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<std::int64_t> minv(static_cast<std::size_t>(n) + 1, inf);
    std::vector<char> used(static_cast<std::size_t>(n) + 1, 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const int i0 = match[static_cast<std::size_t>(j0)];
      std::int64_t delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const std::int64_t cur =
            cost[static_cast<std::size_t>(i0 - 1)][static_cast<std::size_t>(j - 1)] -
            u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(match[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (match[static_cast<std::size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<std::size_t>(j0)];
      match[static_cast<std::size_t>(j0)] = match[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }
  std::int64_t total = 0;
  for (int j = 1; j <= n; ++j) {
    total += cost[static_cast<std::size_t>(match[static_cast<std::size_t>(j)] - 1)][static_cast<std::size_t>(j - 1)];
  }
  return total;
}

}  // namespace

ContingencyTable ContingencyTable::from(const Assignment& a, const Assignment& b) {
  if (a.n() != b.n()) throw input_error("contingency: item counts differ");
  ContingencyTable t;
  t.rows = a.k();
  t.cols = b.k();
  t.n = a.n();
  t.counts.assign(static_cast<std::size_t>(t.rows) * static_cast<std::size_t>(t.cols), 0);
  for (int i = 0; i < a.n(); ++i) {
    ++t.counts[static_cast<std::size_t>(a[i]) * static_cast<std::size_t>(t.cols) + static_cast<std::size_t>(b[i])];
  }
  return t;
}

double adjusted_rand_index(const Assignment& a, const Assignment& b) {
  if (a.n() != b.n()) throw input_error("adjusted_rand_index: item counts differ");
  if (a.n() < 2) throw input_error("adjusted_rand_index: need at least two items");
  const auto t = ContingencyTable::from(a, b);

  int128 index = 0;
  for (const std::int64_t c : t.counts) index += choose2(c);
  int128 sum_a = 0;
  for (const std::int64_t c : a.cluster_sizes()) sum_a += choose2(c);
  int128 sum_b = 0;
  for (const std::int64_t c : b.cluster_sizes()) sum_b += choose2(c);
  const int128 pairs = choose2(t.n);

  // ARI = (pairs*index - sum_a*sum_b) / (pairs*(sum_a+sum_b)/2 - sum_a*sum_b).
  // Both sides are doubled so everything stays an exact 128-bit integer
  // until the final division.
  const int128 numerator = 2 * (pairs * index - sum_a * sum_b);
  const int128 denominator = pairs * (sum_a + sum_b) - 2 * sum_a * sum_b;
  if (denominator == 0) return 1.0;  // both partitions trivially identical
  return static_cast<double>(static_cast<long double>(numerator) /
                             static_cast<long double>(denominator));
}

std::int64_t misclustering_count(const Assignment& truth, const Assignment& est) {
  if (truth.n() != est.n()) throw input_error("misclustering_count: item counts differ");
  const auto t = ContingencyTable::from(truth, est);
  const int k = std::max(t.rows, t.cols);
  std::vector<std::vector<std::int64_t>> cost(
      static_cast<std::size_t>(k), std::vector<std::int64_t>(static_cast<std::size_t>(k), 0));
  for (int i = 0; i < t.rows; ++i) {
    for (int j = 0; j < t.cols; ++j) {
      cost[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = -t.at(i, j);
    }
  }
  const std::int64_t matched = -hungarian_min_cost(cost);
  return t.n - matched;
}

std::int64_t abs_error_k(std::int64_t k_hat, std::int64_t k_true) {
  return k_hat >= k_true ? k_hat - k_true : k_true - k_hat;
}

}  // namespace krafty
