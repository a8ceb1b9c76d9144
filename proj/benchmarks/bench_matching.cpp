#include <benchmark/benchmark.h>

#include <Eigen/Core>

#include "specmatch/matching.hpp"
#include "specmatch/mlp.hpp"
#include "specmatch/rng.hpp"

using namespace specmatch;

namespace {

Eigen::MatrixXd random_field(int rows, int cols, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = rng.next_normal();
  }
  return m;
}

void BM_MatchNearest(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int d = static_cast<int>(state.range(1));
  const Eigen::MatrixXd source = random_field(n, d, 1);
  const Eigen::MatrixXd target = random_field(n, d, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(match_nearest(source, target, 2.5));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(n) * n);
}
BENCHMARK(BM_MatchNearest)->Args({1000, 15})->Args({2562, 15})->Args({2562, 100})->Unit(benchmark::kMillisecond);

void BM_ForwardBatch(benchmark::State& state) {
  const MlpParams params = init_params(DescriptorKind::Hks, 100, 78, 32, 15, 3);
  const Eigen::MatrixXd batch = random_field(static_cast<int>(state.range(0)), 100, 4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(forward_batch(params, batch));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ForwardBatch)->Arg(128)->Arg(512)->Arg(2562);

void BM_BatchGradients(benchmark::State& state) {
  const MlpParams params = init_params(DescriptorKind::Hks, 100, 78, 32, 15, 5);
  const int batch = static_cast<int>(state.range(0));
  const Eigen::MatrixXd f = random_field(batch, 100, 6);
  const Eigen::MatrixXd g = random_field(batch, 100, 7);
  Eigen::VectorXd labels(batch);
  Rng rng(8);
  for (int k = 0; k < batch; ++k) labels[k] = rng.next_double();
  MlpGradients grads = MlpGradients::zeros_like(params);
  for (auto _ : state) {
    benchmark::DoNotOptimize(batch_gradients(params, f, g, labels, 5.0, grads));
  }
  state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_BatchGradients)->Arg(128)->Arg(512);

}  // namespace
