#include <benchmark/benchmark.h>

#include <vector>

#include "soplab/grid.hpp"

namespace {

using namespace soplab;

ValidationSetup fixture() {
  ValidationSetup s;
  s.params = {0.05, 0.03, 10.0, 2.0, 1.0};
  s.analytic_params = s.params;
  s.soa = {2.8, 4.3, 10.0, -4.0, 0.1, 0.9};
  return s;
}

std::vector<GridPoint> criterion_grid() {
  const std::vector<double> socs{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  const std::vector<int> ks{1, 10, 30, 60};
  const std::vector<Direction> dirs{Direction::discharge, Direction::charge};
  return make_grid(socs, ks, dirs);
}

void BM_validate(benchmark::State& st, Execution exec) {
  const auto setup = fixture();
  const auto grid = criterion_grid();
  for (auto _ : st) benchmark::DoNotOptimize(validate_grid(setup, grid, exec));
  st.counters["points"] = static_cast<double>(grid.size());
  st.counters["threads"] = exec == Execution::parallel ? parallel_threads() : 1;
}

void BM_sweep(benchmark::State& st, Execution exec) {
  const auto setup = fixture();
  const auto ctx = make_context({0.5, 0.0}, setup.params, setup.curve, 1.2, {30, 1.0},
                                Direction::discharge, setup.soa);
  std::vector<double> deltas;
  for (int i = -2000; i <= 2000; ++i) deltas.push_back(0.1 * i / 2000.0);
  for (auto _ : st)
    benchmark::DoNotOptimize(sweep_grid(ErrorSource::soc, deltas, ctx, Constraint::soc, exec));
}

}  // namespace

BENCHMARK_CAPTURE(BM_validate, serial, Execution::serial)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_validate, parallel, Execution::parallel)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_sweep, serial, Execution::serial)->Unit(benchmark::kMicrosecond);
BENCHMARK_CAPTURE(BM_sweep, parallel, Execution::parallel)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
