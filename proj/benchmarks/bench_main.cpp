#include <benchmark/benchmark.h>

#include <random>

#include "coevolve/dynamics.hpp"
#include "coevolve/linalg.hpp"
#include "coevolve/sampling.hpp"

using namespace coevolve;

namespace {

SymMatrix random_spd(std::size_t d, std::mt19937_64& gen) {
  std::normal_distribution<double> z;
  SymMatrix a(d);
  for (std::size_t k = 0; k < d + 2; ++k) {
    std::vector<double> v(d);
    for (double& x : v) x = z(gen);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) a(i, j) += v[i] * v[j];
  }
  return a;
}

void BM_SymSqrt(benchmark::State& state) {
  std::mt19937_64 gen(1);
  const SymMatrix a = random_spd(static_cast<std::size_t>(state.range(0)), gen);
  for (auto _ : state) benchmark::DoNotOptimize(sym_sqrt(a));
}
BENCHMARK(BM_SymSqrt)->Arg(2)->Arg(6)->Arg(16);

SystemState initial(std::size_t N) {
  TrainingConfig cfg = TrainingConfig::constant(N, 1, 1, 1);
  return make_initial_state(cfg);
}

void BM_TextUpdate(benchmark::State& state) {
  const std::size_t N = static_cast<std::size_t>(state.range(0));
  const SystemState start = initial(N);
  RngStream rng = derive_stream(1, 0, 1);
  for (auto _ : state) {
    SystemState s = start;
    benchmark::DoNotOptimize(text_update_once(s, N, rng));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(N));
}
BENCHMARK(BM_TextUpdate)->Arg(1000)->Arg(10000);

void BM_ImageUpdate(benchmark::State& state) {
  const std::size_t N = static_cast<std::size_t>(state.range(0));
  const SystemState start = initial(N);
  RngStream rng = derive_stream(1, 0, 2);
  for (auto _ : state) benchmark::DoNotOptimize(image_update_once(start, N, rng));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(N));
}
BENCHMARK(BM_ImageUpdate)->Arg(1000)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();
