#include "arl/kernels.hpp"
#include "arl/random.hpp"

#include <benchmark/benchmark.h>

#include <algorithm>

using namespace arl;

namespace {

struct Fixture {
  Matrix E, C;
  std::vector<EncodedDocument> batch;
  NegativeSets negs;

  Fixture(int K, int M, int V, int B) : E(K, V), C(K, M) {
    Rng rng(42);
    for (Eigen::Index i = 0; i < E.size(); ++i) E.data()[i] = rng.normal();
    for (Eigen::Index i = 0; i < C.size(); ++i) C.data()[i] = rng.normal();
    for (int b = 0; b < B; ++b) {
      EncodedDocument d{b, {}};
      const int len = 6 + static_cast<int>(rng.below(5));
      for (int t = 0; t < len; ++t) d.token_ids.push_back(static_cast<int>(rng.below(static_cast<std::uint64_t>(V))));
      batch.push_back(std::move(d));
    }
    for (int b = 0; b < B; ++b) {
      std::vector<int> n;
      while (n.size() < 5) {
        const int j = static_cast<int>(rng.below(static_cast<std::uint64_t>(B)));
        if (j != b && std::find(n.begin(), n.end(), j) == n.end()) n.push_back(j);
      }
      negs.push_back(n);
    }
  }
};

const Fixture& fixture() {
  static const Fixture f(300, 128, 3500, 64);
  return f;
}

void BM_BatchParallel(benchmark::State& state) {
  const auto& f = fixture();
  const BatchInput in{f.E, nullptr, f.C, f.batch, f.negs, 1.0, {}};
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_batch_parallel(in, {true, true}));
}

void BM_BatchReference(benchmark::State& state) {
  const auto& f = fixture();
  const BatchInput in{f.E, nullptr, f.C, f.batch, f.negs, 1.0, {}};
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_batch_reference(in, {true, true}));
}

Matrix random_matrix(int rows, int cols, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

void BM_AssignParallel(benchmark::State& state) {
  static const Matrix P = random_matrix(300, 5000, 1), C = random_matrix(300, 128, 2);
  for (auto _ : state) benchmark::DoNotOptimize(assign_nearest_parallel(P, C));
}

void BM_AssignReference(benchmark::State& state) {
  static const Matrix P = random_matrix(300, 5000, 1), C = random_matrix(300, 128, 2);
  for (auto _ : state) benchmark::DoNotOptimize(assign_nearest_reference(P, C));
}

}  // namespace

BENCHMARK(BM_BatchParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BatchReference)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AssignParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AssignReference)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
