#include <vector>

#include <benchmark/benchmark.h>

#include "stablemv/integrator.hpp"
#include "stablemv/measure.hpp"
#include "stablemv/noise.hpp"

using namespace stablemv;

namespace {

void BM_SampleIncrementIsotropic(benchmark::State& state) {
  StableParams p{static_cast<int>(state.range(0)), 1.5, SpectralMode::Isotropic, 1.0};
  NoiseStream s{1, 0};
  std::vector<double> out(p.dim);
  std::uint64_t k = 0;
  for (auto _ : state) {
    sample_increment(p, 1.0 / 64, s, k++, out.data());
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_SampleIncrementIsotropic)->Arg(1)->Arg(2)->Arg(8);

void BM_SampleIncrementPerAxis(benchmark::State& state) {
  StableParams p{static_cast<int>(state.range(0)), 1.5, SpectralMode::PerAxis, 1.0};
  NoiseStream s{1, 0};
  std::vector<double> out(p.dim);
  std::uint64_t k = 0;
  for (auto _ : state) {
    sample_increment(p, 1.0 / 64, s, k++, out.data());
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_SampleIncrementPerAxis)->Arg(1)->Arg(2)->Arg(8);

void BM_AssignmentSolve(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  NoiseStream s{7, 0};
  std::vector<double> cost(static_cast<std::size_t>(n) * n);
  for (std::size_t i = 0; i < cost.size(); ++i)
    cost[i] = rng::uniform01(s, rng::kPurposeScratch, 0, static_cast<std::uint32_t>(i));
  for (auto _ : state) {
    auto perm = solve_assignment(cost, n);
    benchmark::DoNotOptimize(perm.data());
  }
  state.SetComplexityN(n);
}
BENCHMARK(BM_AssignmentSolve)->Arg(32)->Arg(128)->Arg(512)->Complexity();

void BM_Wasserstein1D(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  NoiseStream s{8, 0};
  std::vector<double> fa(n), fb(n);
  for (int i = 0; i < n; ++i) {
    fa[i] = rng::gaussian(s, rng::kPurposeScratch, 0, static_cast<std::uint32_t>(i));
    fb[i] = rng::gaussian(s, rng::kPurposeScratch, 1, static_cast<std::uint32_t>(i));
  }
  EmpiricalMeasure a(1, fa), b(1, fb);
  for (auto _ : state) benchmark::DoNotOptimize(wasserstein_1d(1.0, a, b));
}
BENCHMARK(BM_Wasserstein1D)->Arg(1024)->Arg(16384);

void BM_InteractingRun(benchmark::State& state) {
  SystemConfig cfg;
  cfg.particle_count = static_cast<int>(state.range(0));
  cfg.step = 1.0 / 64;
  cfg.horizon = 0.25;
  cfg.noise = StableParams{1, 1.5, SpectralMode::Isotropic, 1.0};
  cfg.drift.kind = DriftKind::HolderMean;
  cfg.drift.holder_amp = 1.0;
  cfg.drift.interaction_amp = 0.5;
  cfg.drift.beta = 0.75;
  cfg.init.kind = InitKind::Gaussian;
  cfg.init.a = {0.0};
  cfg.init.b = {1.0};
  cfg.seed = 3;
  for (auto _ : state) {
    LatticePath path = simulate_interacting(cfg);
    benchmark::DoNotOptimize(path.states.data());
  }
}
BENCHMARK(BM_InteractingRun)->Arg(64)->Arg(512)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
