#pragma once

// Shared planted-structure fixtures.

#include "krafty/joint.hpp"
#include "krafty/rng.hpp"
#include "krafty/types.hpp"

#include <utility>
#include <vector>

namespace fixtures {

using krafty::Assignment;
using krafty::ProjectionMatrix;
using krafty::Rng;

// Two 3-cluster views sharing cluster 0, with view-1 clusters 1 and 2
// scattered across view-2 clusters 1 and 2: five occupied cells
// (0,0) (1,1) (1,2) (2,1) (2,2) of the 3x3 grid, four empty.
struct TwoViewFiveJoint {
  Assignment joint;
  ProjectionMatrix proj1;
  ProjectionMatrix proj2;
  Assignment z1;
  Assignment z2;
};

inline TwoViewFiveJoint two_view_five_joint(int n) {
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) labels[static_cast<std::size_t>(i)] = i % 5;
  Assignment joint(std::move(labels), 5);
  ProjectionMatrix proj1(5, 3, {0, 1, 1, 2, 2});
  ProjectionMatrix proj2(5, 3, {0, 1, 2, 1, 2});
  Assignment z1 = project_assignment(joint, proj1);
  Assignment z2 = project_assignment(joint, proj2);
  return {std::move(joint), std::move(proj1), std::move(proj2), std::move(z1), std::move(z2)};
}

// Two independent uniform 3-cluster views; resamples until every one of
// the nine joint cells is occupied.
struct IndependentViews {
  Assignment z1;
  Assignment z2;
};

inline IndependentViews independent_uniform_views(int n, Rng& rng) {
  while (true) {
    std::vector<int> l1(static_cast<std::size_t>(n));
    std::vector<int> l2(static_cast<std::size_t>(n));
    std::vector<int> cell_count(9, 0);
    for (int i = 0; i < n; ++i) {
      l1[static_cast<std::size_t>(i)] = static_cast<int>(rng.uniform_int(0, 2));
      l2[static_cast<std::size_t>(i)] = static_cast<int>(rng.uniform_int(0, 2));
      ++cell_count[static_cast<std::size_t>(l1[static_cast<std::size_t>(i)] * 3 +
                                            l2[static_cast<std::size_t>(i)])];
    }
    bool full = true;
    for (const int c : cell_count) full = full && c > 0;
    if (full) return {Assignment(std::move(l1), 3), Assignment(std::move(l2), 3)};
  }
}

// Balanced joint structure with k cells covering every row and column of
// the k1 x k2 grid; labels round-robin so cluster sizes differ by at most 1.
struct PlantedGrid {
  Assignment joint;
  ProjectionMatrix proj1;
  ProjectionMatrix proj2;
  Assignment z1;
  Assignment z2;
};

inline PlantedGrid planted_grid(int n, int k1, int k2, int k, Rng& rng) {
  auto shuffled = [&](int count) {
    std::vector<int> order(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) order[static_cast<std::size_t>(i)] = i;
    for (int i = count - 1; i > 0; --i) {
      std::swap(order[static_cast<std::size_t>(i)],
                order[static_cast<std::size_t>(rng.uniform_int(0, i))]);
    }
    return order;
  };
  const auto rows = shuffled(k1);
  const auto cols = shuffled(k2);
  std::vector<char> taken(static_cast<std::size_t>(k1 * k2), 0);
  std::vector<std::pair<int, int>> cells;
  const int base = k1 > k2 ? k1 : k2;
  for (int i = 0; i < base; ++i) {
    const int r = rows[static_cast<std::size_t>(i % k1)];
    const int c = cols[static_cast<std::size_t>(i % k2)];
    taken[static_cast<std::size_t>(r * k2 + c)] = 1;
    cells.emplace_back(r, c);
  }
  std::vector<int> free_cells;
  for (int idx = 0; idx < k1 * k2; ++idx) {
    if (!taken[static_cast<std::size_t>(idx)]) free_cells.push_back(idx);
  }
  for (int extra = base; extra < k; ++extra) {
    const auto pick = static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(free_cells.size()) - 1));
    cells.emplace_back(free_cells[pick] / k2, free_cells[pick] % k2);
    free_cells.erase(free_cells.begin() + static_cast<std::ptrdiff_t>(pick));
  }

  std::vector<int> labels(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) labels[static_cast<std::size_t>(i)] = i % k;
  std::vector<int> map1;
  std::vector<int> map2;
  for (const auto& [r, c] : cells) {
    map1.push_back(r);
    map2.push_back(c);
  }
  Assignment joint(std::move(labels), k);
  ProjectionMatrix proj1(k, k1, std::move(map1));
  ProjectionMatrix proj2(k, k2, std::move(map2));
  Assignment z1 = project_assignment(joint, proj1);
  Assignment z2 = project_assignment(joint, proj2);
  return {std::move(joint), std::move(proj1), std::move(proj2), std::move(z1), std::move(z2)};
}

// Moves `flips` distinct items of z to a different cluster, keeping every
// cluster occupied, so the flipped copy disagrees with z on exactly
// `flips` items.
inline Assignment flip_labels(const Assignment& z, int flips, Rng& rng) {
  std::vector<int> labels = z.labels();
  std::vector<int> sizes(static_cast<std::size_t>(z.k()), 0);
  for (const int l : labels) ++sizes[static_cast<std::size_t>(l)];
  std::vector<char> touched(static_cast<std::size_t>(z.n()), 0);
  int done = 0;
  while (done < flips) {
    const int i = static_cast<int>(rng.uniform_int(0, z.n() - 1));
    if (touched[static_cast<std::size_t>(i)]) continue;
    const int from = labels[static_cast<std::size_t>(i)];
    if (sizes[static_cast<std::size_t>(from)] <= 1) continue;
    int to = static_cast<int>(rng.uniform_int(0, z.k() - 2));
    if (to >= from) ++to;
    labels[static_cast<std::size_t>(i)] = to;
    touched[static_cast<std::size_t>(i)] = 1;
    --sizes[static_cast<std::size_t>(from)];
    ++sizes[static_cast<std::size_t>(to)];
    ++done;
  }
  return Assignment(std::move(labels), z.k());
}

}  // namespace fixtures
