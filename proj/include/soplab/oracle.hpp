#pragma once

// Brute-force validators. Peak current and peak power are found by bisection
// over forward step simulations checked against the SOA; nothing here uses
// the window closed forms or the mode engines.

#include <optional>

#include "soplab/ecm.hpp"
#include "soplab/soa.hpp"

namespace soplab::oracle {

struct OracleResult {
  double value = 0.0;      // |I| or |P| (magnitude)
  bool feasible = false;   // false when even zero demand breaks the SOA
  bool saturated = false;  // the upper bracket end itself was feasible
  int iterations = 0;
};

// Largest constant |I| whose K-step trace stays inside the SOA.
OracleResult brute_peak_current_cc(const BatteryState& state, const BatteryParams& params,
                                   const OcvCurve& curve, const Window& window, Direction dir,
                                   const Soa& soa, double tol_amps);

struct CpOptions {
  std::optional<double> p_hi;  // default |I_max| * vt_max
  int max_iterations = 200;
};

// Largest constant |P| whose K-step trace stays inside the SOA. The per-step
// current is found by a bracketed secant search on the step function.
OracleResult brute_peak_power_cp(const BatteryState& state, const BatteryParams& params,
                                 const OcvCurve& curve, const Window& window, Direction dir,
                                 const Soa& soa, double tol_watts, const CpOptions& options = {});

// Per-step current magnitude delivering |power| in the given direction, or
// empty when no root exists up to the current limit.
std::optional<double> secant_cp_current(const BatteryState& state, const BatteryParams& params,
                                        const OcvCurve& curve, double dt, Direction dir,
                                        double power_magnitude, double current_cap);

}  // namespace soplab::oracle
