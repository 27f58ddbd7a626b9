#pragma once

// Step-by-step peak operation modes: constant voltage (CV), constant current
// then constant voltage (CC-CV) and constant power (CP). Each engine returns
// the full window trace and the SOP taken as the minimum |P| over the window.
//
// All per-step solves are exact under the single-step model of ecm.hpp: a
// current that holds a voltage gives exactly that voltage from step().

#include <optional>
#include <vector>

#include "soplab/ecm.hpp"
#include "soplab/soa.hpp"
#include "soplab/sop_analytic.hpp"

namespace soplab {

struct PomStep {
  int index = 0;  // 1..K
  double current = 0.0;
  double vt = 0.0;
  double soc = 0.0;
  double vp = 0.0;
  double power = 0.0;  // current * vt
};

struct PomTrace {
  std::vector<PomStep> steps;
  // First step run in CV after a CC phase; empty when no shift happened.
  std::optional<int> mode_shift_index;
};

// Violations keyed by the 1-based step index.
std::vector<Violation> check_trace(const PomTrace& trace, const Soa& soa,
                                   const SoaSlack& slack = {});

struct PomResult {
  SopResult sop;
  PomTrace trace;
};

// Constant current for the whole window.
PomTrace trace_cc(const BatteryState& state, const BatteryParams& params, const OcvCurve& curve,
                  const Window& window, double current);

// Current that makes the next step's terminal voltage equal `v_target`.
double hold_current(const BatteryState& state, const BatteryParams& params, const OcvCurve& curve,
                    double dt, double v_target);

PomResult sop_cv(const BatteryState& state, const BatteryParams& params, const OcvCurve& curve,
                 const Window& window, Direction dir, const Soa& soa);

enum class CcCvCase { case1_cc_only, case2_transitional, case3_cv_only };

std::string_view to_string(CcCvCase c);

struct ModeShift {
  CcCvCase kind = CcCvCase::case1_cc_only;
  // Step at which CC at the current limit first lands beyond the cut-off.
  // kModeShiftBeyond for case 1, kModeShiftBefore for case 3.
  int kc = 0;
};

inline constexpr int kModeShiftBeyond = -2;
inline constexpr int kModeShiftBefore = -1;

ModeShift find_mode_shift_kc(const BatteryState& state, const BatteryParams& params,
                             const OcvCurve& curve, const Window& window, Direction dir,
                             const Soa& soa);

PomResult sop_cccv(const BatteryState& state, const BatteryParams& params, const OcvCurve& curve,
                   const Window& window, Direction dir, const Soa& soa);

struct CpStep {
  double current = 0.0;
  double vt = 0.0;
  bool feasible = false;
};

// Smaller-magnitude root of resistance*I^2 - open_voltage*I + power = 0.
// Infeasible when the discriminant is negative.
CpStep solve_cp_quadratic(double open_voltage, double resistance, double power);

// Current delivering `power` (signed, > 0 discharges) over the next step.
CpStep solve_cp_step(const BatteryState& state, const BatteryParams& params, const OcvCurve& curve,
                     double dt, double power);

inline constexpr double kDefaultCpTolWatts = 1e-6;
inline constexpr int kDefaultCpMaxIterations = 200;

PomResult sop_cp(const BatteryState& state, const BatteryParams& params, const OcvCurve& curve,
                 const Window& window, Direction dir, const Soa& soa,
                 double tol_watts = kDefaultCpTolWatts,
                 int max_iterations = kDefaultCpMaxIterations);

}  // namespace soplab
