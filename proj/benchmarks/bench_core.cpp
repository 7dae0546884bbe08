#include <benchmark/benchmark.h>

#include "krafty/clustering.hpp"
#include "krafty/joint.hpp"
#include "krafty/linalg.hpp"
#include "krafty/rng.hpp"

using namespace krafty;

namespace {

Matrix random_matrix(Index rows, Index cols, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
  }
  return m;
}

Assignment random_assignment(int n, int k, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) labels[static_cast<std::size_t>(i)] = i < k ? i : static_cast<int>(rng.uniform_int(0, k - 1));
  return Assignment(std::move(labels), k);
}

void BM_tkr(benchmark::State& state) {
  const Index n = state.range(0);
  const Matrix a = random_matrix(n, 4, 1);
  const Matrix b = random_matrix(n, 4, 2);
  for (auto _ : state) {
    Matrix j = tkr(a, b);
    benchmark::DoNotOptimize(j.data());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_tkr)->Range(256, 16384)->Complexity();

void BM_svd_k(benchmark::State& state) {
  const Index n = state.range(0);
  const Matrix m = random_matrix(n, 16, 3);
  for (auto _ : state) {
    SvdResult r = svd_k(m, 9);
    benchmark::DoNotOptimize(r.values.data());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_svd_k)->Range(256, 8192)->Complexity();

void BM_hierarchical_complete(benchmark::State& state) {
  const Index n = state.range(0);
  const Matrix x = random_matrix(n, 8, 4);
  for (auto _ : state) {
    Dendrogram d = hierarchical_complete(x);
    benchmark::DoNotOptimize(d.merges.data());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_hierarchical_complete)->RangeMultiplier(2)->Range(128, 2048)->Complexity();

void BM_kmeans(benchmark::State& state) {
  const Index n = state.range(0);
  const Matrix x = random_matrix(n, 9, 5);
  for (auto _ : state) {
    KMeansResult r = kmeans(x, 9, 10, 100, 7);
    benchmark::DoNotOptimize(r.objective);
  }
}
BENCHMARK(BM_kmeans)->Range(512, 4096);

void BM_krafty_end_to_end(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Assignment z1 = random_assignment(n, 4, 11);
  const Assignment z2 = random_assignment(n, 4, 12);
  const std::vector<ViewInput> views = {ViewInput::from_assignment(z1),
                                        ViewInput::from_assignment(z2)};
  JointOptions opts;
  opts.k = 9;
  for (auto _ : state) {
    JointResult r = krafty::krafty(views, opts);
    benchmark::DoNotOptimize(r.k_used);
  }
}
BENCHMARK(BM_krafty_end_to_end)->RangeMultiplier(2)->Range(256, 1024);

}  // namespace

BENCHMARK_MAIN();
