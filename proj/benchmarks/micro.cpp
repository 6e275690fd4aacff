#include <benchmark/benchmark.h>

#include <random>

#include "metaopt/bench.hpp"
#include "metaopt/fm.hpp"
#include "metaopt/qaoa.hpp"
#include "metaopt/qubo.hpp"
#include "metaopt/tmm.hpp"

namespace {

using namespace metaopt;

void BM_SystemMatrix(benchmark::State& state) {
  const auto stack = bench::random_binary_stack(static_cast<std::size_t>(state.range(0)), 100.0, 7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(tmm::system_matrix(stack, 0.8, 30.0, Polarization::s));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SystemMatrix)->Arg(10)->Arg(100)->Arg(1000);

void BM_Spectrum(benchmark::State& state) {
  const auto stack = bench::random_binary_stack(40, 100.0, 11);
  const auto grid = SpectralGrid::linspace(0.4, 2.5, static_cast<std::size_t>(state.range(0)));
  const IncidenceCondition cond(20.0, Polarization::unpolarized);
  for (auto _ : state) benchmark::DoNotOptimize(tmm::spectrum(stack, grid, cond));
}
BENCHMARK(BM_Spectrum)->Arg(64)->Arg(512);

fm::FMModel random_model(std::size_t n, std::size_t k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 0.3);
  fm::FMModel m(n, k);
  m.w0 = g(rng);
  for (auto& x : m.w) x = g(rng);
  for (auto& x : m.v) x = g(rng);
  return m;
}

void BM_FmPredict(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto model = random_model(n, 8, 3);
  std::mt19937_64 rng(4);
  BitVector x(n);
  for (auto& b : x) b = static_cast<std::uint8_t>(rng() & 1U);
  for (auto _ : state) benchmark::DoNotOptimize(fm::predict(model, x));
}
BENCHMARK(BM_FmPredict)->Arg(120)->Arg(240);

void BM_BruteForce(benchmark::State& state) {
  const auto q = qubo::random_qubo(static_cast<std::size_t>(state.range(0)), 5);
  for (auto _ : state) benchmark::DoNotOptimize(qubo::brute_force(q, 1));
}
BENCHMARK(BM_BruteForce)->Arg(12)->Arg(16)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_Annealing(benchmark::State& state) {
  const auto q = qubo::random_qubo(static_cast<std::size_t>(state.range(0)), 6);
  const auto config = qubo::AnnealingConfig::scaled_for(q, 200, 4, 9);
  for (auto _ : state) benchmark::DoNotOptimize(qubo::simulated_annealing(q, config));
}
BENCHMARK(BM_Annealing)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_QaoaLayer(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto energies = qaoa::basis_energies(qaoa::qubo_to_ising(qubo::random_qubo(n, 8)));
  auto psi = qaoa::uniform_state(n);
  for (auto _ : state) {
    qaoa::apply_cost_layer(psi, energies, 0.3);
    qaoa::apply_mixer_layer(psi, 0.2);
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * (std::int64_t{1} << n));
}
BENCHMARK(BM_QaoaLayer)->Arg(10)->Arg(16)->Arg(20)->Unit(benchmark::kMicrosecond);

}  // namespace
BENCHMARK_MAIN();
