#include <random>

#include <benchmark/benchmark.h>

#include "axiomgrad/attribution.h"
#include "axiomgrad/axioms.h"
#include "axiomgrad/corpus.h"
#include "axiomgrad/neuron_attr.h"
#include "axiomgrad/train.h"

namespace axiomgrad {
namespace {

Tensor random_image(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0, 1);
  Tensor x({1, 28, 28});
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = u(rng);
  return x;
}

void BM_Table1Forward(benchmark::State& state) {
  const Network net = table1_network(1);
  const Tensor x = random_image(2);
  for (auto _ : state) benchmark::DoNotOptimize(net.forward(x));
}
BENCHMARK(BM_Table1Forward);

void BM_Table1Gradient(benchmark::State& state) {
  const Network net = table1_network(1);
  const Tensor x = random_image(2);
  for (auto _ : state) benchmark::DoNotOptimize(net.gradient(x, 3));
}
BENCHMARK(BM_Table1Gradient);

void BM_IntegratedGradients(benchmark::State& state) {
  const Network net = table1_network(1);
  const Tensor x = random_image(3);
  const Tensor x_prime({1, 28, 28});
  const int steps = static_cast<int>(state.range(0));
  const Workers workers{static_cast<std::size_t>(state.range(1))};
  for (auto _ : state) {
    benchmark::DoNotOptimize(integrated_gradients(net, x, x_prime, {3}, steps, workers));
  }
}
BENCHMARK(BM_IntegratedGradients)->Args({50, 1})->Args({300, 1})->Args({300, 4})
    ->Unit(benchmark::kMillisecond);

void BM_Conductance(benchmark::State& state) {
  const Network net = table1_network(1);
  const SplitNetwork parts = split(net, "dense64");
  const Tensor x = random_image(4);
  const Tensor x_prime({1, 28, 28});
  const auto method = state.range(0) == 0 ? ConductanceMethod::kPathDifference
                                          : ConductanceMethod::kExact;
  for (auto _ : state) {
    benchmark::DoNotOptimize(conductance(parts, x, x_prime, {3}, 100, {}, method));
  }
}
BENCHMARK(BM_Conductance)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_PatchAttribution(benchmark::State& state) {
  const Network net = table1_network(1);
  const SplitNetwork parts = split(net, "dense64");
  const Tensor x = random_image(5);
  const Tensor x_prime({1, 28, 28});
  const PatchSpec box = PatchSpec::from_box({1, 28, 28}, PixelBox{18, 8, 27, 20});
  const bool fast = state.range(0) == 0;
  for (auto _ : state) {
    if (fast) {
      benchmark::DoNotOptimize(patch_attr_fast(parts, x, x_prime, {3}, box, 100));
    } else {
      benchmark::DoNotOptimize(patch_attr_exact(parts, x, x_prime, {3}, box, 100));
    }
  }
}
BENCHMARK(BM_PatchAttribution)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_AxiomSuite(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(run_suite());
}
BENCHMARK(BM_AxiomSuite)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace axiomgrad

BENCHMARK_MAIN();
