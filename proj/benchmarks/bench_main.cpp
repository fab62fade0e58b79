// SPDX-License-Identifier: Apache-2.0
//
// Hot-path benchmarks: closed-form metric evaluation, Monte Carlo SINR
// throughput, and one convex subproblem build + solve.

#include <benchmark/benchmark.h>

#include "cfisac/metrics.hpp"
#include "cfisac/montecarlo.hpp"
#include "cfisac/sca.hpp"
#include "cfisac/scenario.hpp"

namespace {

using namespace cfisac;

struct Fixture {
  SystemConfig cfg;
  ChannelStats stats;
  Allocation alloc;

  Fixture() {
    PathLossModel model;
    stats = make_channel_stats(cfg, generate_geometry(cfg, 1), model);
    alloc = average_baseline(stats, cfg);
  }
};

const Fixture& fixture() {
  static Fixture f;
  return f;
}

void BM_RatesAndSecrecy(benchmark::State& state) {
  const Fixture& f = fixture();
  for (auto _ : state) {
    RateReport rep = rates_and_secrecy(f.stats, f.alloc, f.cfg);
    benchmark::DoNotOptimize(rep.secrecy);
  }
}
BENCHMARK(BM_RatesAndSecrecy);

void BM_SinrUser(benchmark::State& state) {
  const Fixture& f = fixture();
  for (auto _ : state) {
    double v = sinr_user(f.stats, f.alloc, 0, f.cfg);
    benchmark::DoNotOptimize(v);
  }
}
BENCHMARK(BM_SinrUser);

void BM_McSinrUser(benchmark::State& state) {
  const Fixture& f = fixture();
  const int trials = static_cast<int>(state.range(0));
  for (auto _ : state) {
    McEstimate est = mc_sinr_user(f.stats, f.alloc, 0, f.cfg, trials, 7);
    benchmark::DoNotOptimize(est.estimate);
  }
  state.SetItemsProcessed(state.iterations() * trials);
}
BENCHMARK(BM_McSinrUser)->Arg(1000)->Arg(10000);

void BM_McSinrEav(benchmark::State& state) {
  const Fixture& f = fixture();
  const int trials = static_cast<int>(state.range(0));
  for (auto _ : state) {
    McEstimate est = mc_sinr_eav(f.stats, f.alloc, 0, f.cfg, trials, 7);
    benchmark::DoNotOptimize(est.estimate);
  }
  state.SetItemsProcessed(state.iterations() * trials);
}
BENCHMARK(BM_McSinrEav)->Arg(1000)->Arg(10000);

void BM_SubproblemBuild(benchmark::State& state) {
  const Fixture& f = fixture();
  SCAConfig sc;
  SCAPoint point = initialize(f.stats, Strategy::CP, f.cfg, sc, 1);
  for (auto _ : state) {
    Subproblem sub = build_cp_subproblem(f.stats, point, f.cfg);
    benchmark::DoNotOptimize(sub.program);
  }
}
BENCHMARK(BM_SubproblemBuild);

void BM_SubproblemSolve(benchmark::State& state) {
  const Fixture& f = fixture();
  SCAConfig sc;
  SCAPoint point = initialize(f.stats, Strategy::CP, f.cfg, sc, 1);
  Subproblem sub = build_cp_subproblem(f.stats, point, f.cfg);
  for (auto _ : state) {
    SolveStatus st = solve(sub.program, sc.solver_tol, &sub.warm_start);
    benchmark::DoNotOptimize(st.objective);
  }
}
BENCHMARK(BM_SubproblemSolve);

}  // namespace

BENCHMARK_MAIN();
