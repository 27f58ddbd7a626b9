#pragma once

// Closed-form state of power under a constant-current window.
//
// Each operational constraint (current limit, cut-off voltage, SOC bound)
// yields a peak current; the multi-constraint peak is the smallest in
// magnitude and the SOP is that current times the end-of-window voltage.

#include <array>
#include <string_view>

#include "soplab/ecm.hpp"
#include "soplab/soa.hpp"

namespace soplab {

enum class Constraint { voltage, soc, current };

std::string_view to_string(Constraint c);

// The quantities the window closed forms consume. Keeping them separate from
// BatteryParams lets an estimator see a biased lump (e.g. the resistance sum)
// without reconstructing parameters that would produce it.
struct WindowTerms {
  double soc = 0.0;
  double vp_relax = 0.0;  // initial polarization decayed over the window
  double r_sum = 0.0;     // R0 + R1 * (1 - exp(-K dt / tau))
  double kappa = 0.0;     // OCV slope held over the window
  double x = 0.0;         // eta / (3600 Ca)
  Window window;

  // SOC swing per ampere over the window: x K dt.
  double soc_per_amp() const { return x * window.duration(); }
  // Voltage lost per ampere at the end of the window.
  double denominator() const { return soc_per_amp() * kappa + r_sum; }
};

WindowTerms window_terms(const BatteryState& state, const BatteryParams& params, double kappa,
                         const Window& window);

// f_ocv(soc) - vp_relax - I * (x K dt kappa + r_sum)
double end_voltage(const WindowTerms& terms, const OcvCurve& curve, double current);

struct ConstraintPeak {
  double current = 0.0;  // signed
  bool feasible = false;
};

double peak_current_current_constraint(Direction dir, const Soa& soa);

// Zero and infeasible when the rested voltage already sits at or beyond the
// cut-off. Throws DomainError for a non-positive denominator.
ConstraintPeak peak_current_voltage_constraint(const WindowTerms& terms, const OcvCurve& curve,
                                               Direction dir, const Soa& soa);
ConstraintPeak peak_current_voltage_constraint(const BatteryState& state,
                                               const BatteryParams& params, const OcvCurve& curve,
                                               double kappa, const Window& window, Direction dir,
                                               const Soa& soa);

// Zero and infeasible when SOC is at or beyond the bound.
ConstraintPeak peak_current_soc_constraint(const WindowTerms& terms, Direction dir,
                                           const Soa& soa);
ConstraintPeak peak_current_soc_constraint(const BatteryState& state, const Window& window,
                                           const BatteryParams& params, Direction dir,
                                           const Soa& soa);

// Peak current, end-of-window voltage and power under a single constraint.
struct ConstraintEstimate {
  double current = 0.0;
  double vt_end = 0.0;
  double power = 0.0;  // current * vt_end, signed
  bool feasible = false;
};

ConstraintEstimate estimate_under(Constraint c, const WindowTerms& terms, const OcvCurve& curve,
                                  Direction dir, const Soa& soa);

// Reference SOP written directly as the closed-form product for each
// constraint, independent of end_voltage(). The SOC form evaluates the OCV at
// the bound, so it agrees with estimate_under only on a linear curve.
double reference_power(Constraint c, const WindowTerms& terms, const OcvCurve& curve,
                       Direction dir, const Soa& soa);

enum class SopEvaluation {
  end_of_window,   // |I_mc * V_t(k+K)|
  min_over_window  // min_j |I_mc * V_t(k+j)| from a step simulation
};

struct SopResult {
  double i_current_limit = 0.0;
  double i_voltage_limit = 0.0;
  double i_soc_limit = 0.0;
  double i_mc = 0.0;
  Constraint dominant = Constraint::current;
  double vt_end = 0.0;
  double power_signed = 0.0;
  double sop = 0.0;
  bool feasible = false;
  double kappa = 0.0;
  // |I * V_t(k+K)| for each constraint taken alone, indexed by Constraint.
  std::array<double, 3> constraint_sop{};
};

// SOP with a caller-supplied window slope.
SopResult sop_cc_with_slope(const BatteryState& state, const BatteryParams& params,
                            const OcvCurve& curve, double kappa, const Window& window,
                            Direction dir, const Soa& soa,
                            SopEvaluation eval = SopEvaluation::end_of_window);

// Window slope from the curve: local slope in the direction of travel, then
// the secant to the SOC predicted at the resulting multi-constraint current.
double window_slope(const OcvCurve& curve, double soc_from, double soc_to, Direction dir);

SopResult sop_cc(const BatteryState& state, const BatteryParams& params, const OcvCurve& curve,
                 const Window& window, Direction dir, const Soa& soa,
                 SopEvaluation eval = SopEvaluation::end_of_window);

}  // namespace soplab
