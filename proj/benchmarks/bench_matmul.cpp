#include <benchmark/benchmark.h>

#include "cfpred/matrix.hpp"
#include "cfpred/rng.hpp"

using cfpred::nn::Matrix;

namespace {

Matrix random_matrix(int rows, int cols, cfpred::nn::Rng& rng) {
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < m.size(); ++i) {
    m.data()[i] = rng.uniform(-1.0, 1.0);
  }
  return m;
}

void BM_matmul(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  cfpred::nn::Rng rng(1);
  Matrix a = random_matrix(n, n, rng);
  Matrix b = random_matrix(n, n, rng);
  for (auto _ : state) {
    Matrix c = cfpred::nn::matmul(a, b);
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * 2LL * n * n * n);
}

void BM_matmul_batch_by_gates(benchmark::State& state) {
  // The training hot shape: (batch x in) * (in x 4H)
  const int batch = 256;
  const int in = static_cast<int>(state.range(0));
  const int gates = 4 * 256;
  cfpred::nn::Rng rng(2);
  Matrix a = random_matrix(batch, in, rng);
  Matrix b = random_matrix(in, gates, rng);
  for (auto _ : state) {
    Matrix c = cfpred::nn::matmul(a, b);
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * 2LL * batch * in * gates);
}

} // namespace

BENCHMARK(BM_matmul)->Arg(64)->Arg(128)->Arg(256);
BENCHMARK(BM_matmul_batch_by_gates)->Arg(5)->Arg(256)->Arg(512);
