#include <benchmark/benchmark.h>

#include <random>

#include "iil/kernels.hpp"
#include "iil/nn.hpp"

using namespace iil;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  Matrix m(r, c);
  for (double& v : m.data) v = u(rng);
  return m;
}

// args: batch rows, layer width (in = out)
template <bool Parallel>
void BM_DenseForward(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  const auto width = static_cast<std::size_t>(st.range(1));
  const Matrix x = random_matrix(n, width, 1);
  const Matrix w = random_matrix(width, width, 2);
  const Matrix b = random_matrix(1, width, 3);
  Matrix y(n, width);
  for (auto _ : st) {
    if constexpr (Parallel)
      kernels::dense_forward(x, w.data, b.data, y);
    else
      kernels::serial::dense_forward(x, w.data, b.data, y);
    benchmark::DoNotOptimize(y.data.data());
  }
  st.SetItemsProcessed(st.iterations() * static_cast<long>(n * width * width));
}

template <bool Parallel>
void BM_DenseBackwardParams(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  const auto width = static_cast<std::size_t>(st.range(1));
  const Matrix delta = random_matrix(n, width, 4);
  const Matrix x = random_matrix(n, width, 5);
  std::vector<double> gw(width * width), gb(width);
  for (auto _ : st) {
    if constexpr (Parallel)
      kernels::dense_backward_params(delta, x, gw, gb);
    else
      kernels::serial::dense_backward_params(delta, x, gw, gb);
    benchmark::DoNotOptimize(gw.data());
  }
  st.SetItemsProcessed(st.iterations() * static_cast<long>(n * width * width));
}

// whole training step on the lander-sized policy network
void BM_TrainStep(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  Mlp net({8, 64, 64, 2}, OutputHead::linear, 7);
  const Matrix x = random_matrix(n, 8, 8);
  const Matrix y = random_matrix(n, 2, 9);
  for (auto _ : st) benchmark::DoNotOptimize(train_step(net, x, y, TrainConfig{1e-4, n}));
}

void shapes(benchmark::internal::Benchmark* b) {
  for (long n : {32, 500, 4096})
    for (long w : {16, 64, 256}) b->Args({n, w});
}

}  // namespace

BENCHMARK(BM_DenseForward<false>)->Name("dense_forward/serial")->Apply(shapes);
BENCHMARK(BM_DenseForward<true>)->Name("dense_forward/openmp")->Apply(shapes);
BENCHMARK(BM_DenseBackwardParams<false>)->Name("dense_backward_params/serial")->Apply(shapes);
BENCHMARK(BM_DenseBackwardParams<true>)->Name("dense_backward_params/openmp")->Apply(shapes);
BENCHMARK(BM_TrainStep)->Arg(32)->Arg(500)->Arg(4096);

BENCHMARK_MAIN();
