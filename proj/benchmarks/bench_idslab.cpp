// Timing for the hot paths: window queries, transform sweeps, estimator
// grids, eigensolves, resolvent solves, and single-site averaging. Run with
// --benchmark_filter=<regex> to cut the set down.

#include <benchmark/benchmark.h>

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "idslab/averaging.hpp"
#include "idslab/measure.hpp"
#include "idslab/operators.hpp"
#include "idslab/spectral.hpp"
#include "idslab/transforms.hpp"

namespace {

using idslab::LatticeOperator;
using idslab::Measure;

Measure make_measure(int which) {
  switch (which) {
    case 0: return Measure::uniform(0, 1);
    case 1: return Measure::ifs_cantor(0, 1, 1.0 / 3.0, 30);
    default: return Measure::mixture({{0.5, Measure::point_mass(0.0)}, {0.5, Measure::uniform(0, 1)}});
  }
}

void bm_interval_mass(benchmark::State& state) {
  const Measure m = make_measure(static_cast<int>(state.range(0)));
  double x = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(m.interval_mass(x, 1e-3));
    x += 1e-4;
    if (x > 1.0) x = 0.0;
  }
}
BENCHMARK(bm_interval_mass)->Arg(0)->Arg(1)->Arg(2);

void bm_borel_sweep(benchmark::State& state) {
  const Measure m = make_measure(static_cast<int>(state.range(0)));
  const idslab::BorelEvaluator ev(m);
  for (auto _ : state) {
    std::complex<double> acc = 0.0;
    for (int i = 0; i < 101; ++i) acc += ev({-2.0 + 5.0 * i / 100.0, 0.01});
    benchmark::DoNotOptimize(acc);
  }
  state.SetItemsProcessed(state.iterations() * 101);
}
BENCHMARK(bm_borel_sweep)->Arg(0)->Arg(1)->Arg(2);

void bm_hoelder_direct(benchmark::State& state) {
  const Measure m = make_measure(static_cast<int>(state.range(0)));
  const idslab::GridSpec g = idslab::GridSpec::for_support(m);
  for (auto _ : state) benchmark::DoNotOptimize(idslab::hoelder_constant_direct(m, 1.0, g));
}
BENCHMARK(bm_hoelder_direct)->Arg(0)->Arg(1);

void bm_hoelder_borel(benchmark::State& state) {
  const Measure m = make_measure(static_cast<int>(state.range(0)));
  const idslab::GridSpec g = idslab::GridSpec::for_support(m);
  for (auto _ : state) benchmark::DoNotOptimize(idslab::hoelder_constant_borel(m, 1.0, g));
}
BENCHMARK(bm_hoelder_borel)->Arg(0)->Arg(1);

void bm_spectral_measure_chain(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto H = LatticeOperator::chain(std::vector<double>(static_cast<std::size_t>(n), 0.0));
  for (auto _ : state) benchmark::DoNotOptimize(idslab::spectral_measure_site(H, n / 2));
}
BENCHMARK(bm_spectral_measure_chain)->Arg(64)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

void bm_resolvent_chain(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto H = LatticeOperator::chain(std::vector<double>(static_cast<std::size_t>(n), 0.0));
  double e = -2.0;
  for (auto _ : state) {
    // Factorization is per-z, so construction is part of the measured cost.
    const idslab::ResolventSolver solver(H, {e, 0.05});
    benchmark::DoNotOptimize(solver.site_element(n / 2));
    e += 0.01;
    if (e > 2.0) e = -2.0;
  }
}
BENCHMARK(bm_resolvent_chain)->Arg(500)->Arg(2000);

void bm_average_over_site(benchmark::State& state) {
  const auto A = LatticeOperator::chain(std::vector<double>(50, 0.0));
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(50);
  phi(24) = 1.0;
  idslab::QuadratureSpec q;
  q.nodes = 64;
  const int workers = static_cast<int>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(idslab::average_over_site(A, phi, Measure::uniform(0, 1), q, workers));
  state.SetLabel(std::to_string(workers) + " worker(s)");
}
BENCHMARK(bm_average_over_site)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
