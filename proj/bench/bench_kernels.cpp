#include <benchmark/benchmark.h>

#include <omp.h>

#include "cornermass/extension.hpp"
#include "cornermass/harmonic.hpp"

using namespace cornermass;

namespace {

// K = 0 here, so the solve is one linear SOR run
void BM_Sor(benchmark::State& state, numgrid::Sweep sweep) {
  const auto s = corner::scenario_build("schwarzschild");
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto grid = harmonic::make_grid(s, {30.0, n, n / 2});
  harmonic::HarmonicOptions opt;
  opt.sweep = sweep;
  std::size_t iters = 0;
  for (auto _ : state) {
    const auto f = harmonic::solve_spacetime_harmonic(s, grid, opt);
    iters = f.diagnostics.linear_iterations;
    benchmark::DoNotOptimize(f.values().data());
  }
  state.counters["sweeps"] = static_cast<double>(iters);
}

void BM_SorLexicographic(benchmark::State& s) { BM_Sor(s, numgrid::Sweep::Lexicographic); }
void BM_SorRedBlack(benchmark::State& s) { BM_Sor(s, numgrid::Sweep::RedBlack); }

void BM_PicardSchwarzschild(benchmark::State& state) {
  const auto iso = corner::scenario_build("isotropic_schwarzschild", {{{"s_in", 0.5}, {"outer", 1e4}}, {}});
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto grid = harmonic::make_grid(iso, {20.0, n, n / 2});
  harmonic::HarmonicOptions opt;
  opt.inner = harmonic::InnerBoundary::Neumann;
  for (auto _ : state) benchmark::DoNotOptimize(harmonic::solve_spacetime_harmonic(iso, grid, opt).values().data());
}

void BM_CertificateSweep(benchmark::State& state) {
  std::vector<double> h;
  for (int k = 1; k <= 400; ++k) h.push_back(0.01 * k);
  const int threads = state.range(0) == 0 ? omp_get_max_threads() : static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(extension::certificate_sweep(1.0, h, threads).data());
  state.counters["threads"] = threads;
}

}  // namespace

BENCHMARK(BM_SorLexicographic)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SorRedBlack)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PicardSchwarzschild)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
// 1 is the serial reference, 0 all available threads
BENCHMARK(BM_CertificateSweep)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
