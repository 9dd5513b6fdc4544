#include <benchmark/benchmark.h>

#include "hcal/calorimeter_statistics.hpp"
#include "hcal/master_equation.hpp"
#include "hcal/rates.hpp"
#include "hcal/trajectory.hpp"

namespace {

using namespace hcal;

ModelConfig noisy(double k) {
  ModelConfig cfg;
  cfg.k_noise = k;
  return cfg;
}

void BM_RateTableBuild(benchmark::State& state) {
  const ModelConfig cfg = noisy(static_cast<double>(state.range(0)));
  const EnergyGrid grid(EnergyGrid::floor_for(cfg), 500);
  for (auto _ : state) benchmark::DoNotOptimize(build_rate_table(cfg, grid));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(grid.size()));
}
BENCHMARK(BM_RateTableBuild)->Arg(0)->Arg(100)->Arg(1000000);

void BM_LogWeightedSum(benchmark::State& state) {
  ModelConfig cfg = noisy(1e4);
  cfg.n_cutoff = static_cast<int>(state.range(0));
  std::int64_t e = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(weighted_ratios(e, cfg));
    e = (e + 1) % 200;
  }
}
BENCHMARK(BM_LogWeightedSum)->Arg(100)->Arg(1000);

void BM_TrajectoryStep(benchmark::State& state) {
  const ModelConfig cfg = noisy(100.0);
  const RateTable table = build_rate_table(cfg, EnergyGrid(-100, 600));
  const JumpIntegrator integrator(cfg, table, 0.03);
  RandomStream rng(1);
  TrajectoryState s;
  for (auto _ : state) {
    benchmark::DoNotOptimize(integrator.step(s, rng));
    if (s.e_index > 500 || s.e_index < -90) s = TrajectoryState{};
  }
}
BENCHMARK(BM_TrajectoryStep);

void BM_MasterEquationStep(benchmark::State& state) {
  const ModelConfig cfg;
  const EnergyGrid grid(0, state.range(0));
  const RateTable table = build_rate_table(cfg, grid);
  HybridState s = HybridState::concentrated(grid, 0, QubitMatrix::ground_projector());
  for (auto _ : state) {
    s = evolve(std::move(s), table, cfg, 0.03, 1);
    benchmark::DoNotOptimize(s.blocks.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MasterEquationStep)->Arg(50)->Arg(200);

}  // namespace

BENCHMARK_MAIN();
