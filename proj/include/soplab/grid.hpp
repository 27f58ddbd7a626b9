#pragma once

// Grid-level kernels: analytic-vs-oracle validation over (SOC, K, direction)
// points and error-source sweeps. Every kernel has a serial reference and an
// OpenMP version; both produce rows in input order.

#include <span>
#include <vector>

#include "soplab/error_lab.hpp"
#include "soplab/sop_analytic.hpp"

namespace soplab {

enum class Execution { serial, parallel };

struct GridPoint {
  double soc = 0.0;
  int steps = 1;
  Direction dir = Direction::discharge;
};

// Cartesian product in (soc, K, direction) order.
std::vector<GridPoint> make_grid(std::span<const double> socs, std::span<const int> steps,
                                 std::span<const Direction> dirs);

struct CompareRecord {
  double analytic = 0.0;
  double brute = 0.0;
  double residual = 0.0;  // analytic - brute, native units
  double tol = 0.0;
  bool pass = false;      // |residual| <= tol
};

// Compares |i_mc| of an analytic result with a brute-force peak current.
CompareRecord compare_report(const SopResult& analytic, double brute_amps, double tol);
CompareRecord compare_report(double analytic, double brute, double tol);

struct ValidationSetup {
  BatteryParams params;           // model the oracle simulates
  BatteryParams analytic_params;  // model the closed form sees (normally identical)
  OcvCurve curve = OcvCurve::linear(3.0, 1.2);
  Soa soa;
  double vp = 0.0;
  double dt = 1.0;
  double tol_amps = 1e-6;  // pass/fail threshold
  double oracle_tol_amps = 1e-9;
};

struct ValidationRecord {
  GridPoint point;
  SopResult analytic;
  double brute = 0.0;
  CompareRecord compare;
};

struct ValidationSummary {
  std::vector<ValidationRecord> records;
  std::size_t passed = 0;
  double max_residual = 0.0;

  bool all_pass() const { return passed == records.size(); }
};

ValidationRecord validate_point(const ValidationSetup& setup, const GridPoint& point);

// Throws InputError for an empty grid.
ValidationSummary validate_grid(const ValidationSetup& setup, std::span<const GridPoint> grid,
                                Execution exec = Execution::parallel);

std::vector<SweepRow> sweep_grid(ErrorSource source, std::span<const double> deltas,
                                 const TrueContext& ctx, Constraint constraint,
                                 Execution exec = Execution::parallel);

// Number of OpenMP threads a parallel kernel would use (1 without OpenMP).
int parallel_threads();

}  // namespace soplab
