#include "soplab/grid.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "soplab/errors.hpp"
#include "soplab/oracle.hpp"

namespace soplab {

std::vector<GridPoint> make_grid(std::span<const double> socs, std::span<const int> steps,
                                 std::span<const Direction> dirs) {
  std::vector<GridPoint> grid;
  grid.reserve(socs.size() * steps.size() * dirs.size());
  for (double soc : socs)
    for (int k : steps)
      for (Direction d : dirs) grid.push_back({soc, k, d});
  return grid;
}

CompareRecord compare_report(double analytic, double brute, double tol) {
  CompareRecord r{analytic, brute, analytic - brute, tol, false};
  r.pass = std::abs(r.residual) <= tol;
  return r;
}

CompareRecord compare_report(const SopResult& analytic, double brute_amps, double tol) {
  return compare_report(std::abs(analytic.i_mc), brute_amps, tol);
}

ValidationRecord validate_point(const ValidationSetup& setup, const GridPoint& point) {
  const BatteryState state{point.soc, setup.vp};
  const Window window{point.steps, setup.dt};
  ValidationRecord rec;
  rec.point = point;
  rec.analytic = sop_cc(state, setup.analytic_params, setup.curve, window, point.dir, setup.soa);
  const auto brute = oracle::brute_peak_current_cc(state, setup.params, setup.curve, window,
                                                   point.dir, setup.soa, setup.oracle_tol_amps);
  rec.brute = brute.value;
  rec.compare = compare_report(rec.analytic, rec.brute, setup.tol_amps);
  return rec;
}

namespace {

ValidationSummary summarize(std::vector<ValidationRecord> records) {
  ValidationSummary s;
  s.records = std::move(records);
  for (const auto& r : s.records) {
    if (r.compare.pass) ++s.passed;
    s.max_residual = std::max(s.max_residual, std::abs(r.compare.residual));
  }
  return s;
}

}  // namespace

ValidationSummary validate_grid(const ValidationSetup& setup, std::span<const GridPoint> grid,
                                Execution exec) {
  if (grid.empty()) throw InputError("validation grid is empty");
  std::vector<ValidationRecord> records(grid.size());
  const auto n = static_cast<std::ptrdiff_t>(grid.size());
  if (exec == Execution::serial) {
    for (std::ptrdiff_t i = 0; i < n; ++i) records[i] = validate_point(setup, grid[i]);
  } else {
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n; ++i) records[i] = validate_point(setup, grid[i]);
  }
  return summarize(std::move(records));
}

std::vector<SweepRow> sweep_grid(ErrorSource source, std::span<const double> deltas,
                                 const TrueContext& ctx, Constraint constraint, Execution exec) {
  if (exec == Execution::serial) return sweep(source, deltas, ctx, constraint);
  if (deltas.empty()) throw InputError("error sweep grid is empty");
  std::vector<SweepRow> rows(deltas.size());
  const auto n = static_cast<std::ptrdiff_t>(deltas.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) rows[i] = sweep_row(source, deltas[i], ctx, constraint);
  return rows;
}

int parallel_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace soplab
