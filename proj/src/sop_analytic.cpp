#include "soplab/sop_analytic.hpp"

#include <cmath>

#include "soplab/errors.hpp"

namespace soplab {

std::string_view to_string(Constraint c) {
  switch (c) {
    case Constraint::voltage: return "voltage";
    case Constraint::soc: return "soc";
    case Constraint::current: return "current";
  }
  return "unknown";
}

WindowTerms window_terms(const BatteryState& state, const BatteryParams& params, double kappa,
                         const Window& window) {
  window.validate();
  WindowTerms t;
  t.soc = state.soc;
  t.vp_relax = state.vp * std::exp(-window.duration() / params.tau);
  t.r_sum = params.r0 + effective_r1(params, window);
  t.kappa = kappa;
  t.x = params.charge_gain();
  t.window = window;
  return t;
}

double end_voltage(const WindowTerms& terms, const OcvCurve& curve, double current) {
  return curve(terms.soc) - terms.vp_relax - current * terms.denominator();
}

double peak_current_current_constraint(Direction dir, const Soa& soa) {
  return current_limit(dir, soa);
}

ConstraintPeak peak_current_voltage_constraint(const WindowTerms& terms, const OcvCurve& curve,
                                               Direction dir, const Soa& soa) {
  const double den = terms.denominator();
  if (!(den > 0.0))
    throw DomainError("voltage-constraint denominator must be positive (got " +
                      std::to_string(den) + ")");
  const double current = (curve(terms.soc) - terms.vp_relax - cutoff_voltage(dir, soa)) / den;
  if (current * sign(dir) <= 0.0) return {0.0, false};
  return {current, true};
}

ConstraintPeak peak_current_voltage_constraint(const BatteryState& state,
                                               const BatteryParams& params, const OcvCurve& curve,
                                               double kappa, const Window& window, Direction dir,
                                               const Soa& soa) {
  return peak_current_voltage_constraint(window_terms(state, params, kappa, window), curve, dir,
                                         soa);
}

ConstraintPeak peak_current_soc_constraint(const WindowTerms& terms, Direction dir,
                                           const Soa& soa) {
  const double per_amp = terms.soc_per_amp();
  if (!(per_amp > 0.0))
    throw DomainError("SOC-constraint denominator must be positive (got " +
                      std::to_string(per_amp) + ")");
  const double current = (terms.soc - soc_limit(dir, soa)) / per_amp;
  if (current * sign(dir) <= 0.0) return {0.0, false};
  return {current, true};
}

ConstraintPeak peak_current_soc_constraint(const BatteryState& state, const Window& window,
                                           const BatteryParams& params, Direction dir,
                                           const Soa& soa) {
  return peak_current_soc_constraint(window_terms(state, params, 0.0, window), dir, soa);
}

ConstraintEstimate estimate_under(Constraint c, const WindowTerms& terms, const OcvCurve& curve,
                                  Direction dir, const Soa& soa) {
  ConstraintEstimate e;
  switch (c) {
    case Constraint::current:
      e.current = peak_current_current_constraint(dir, soa);
      e.feasible = true;
      e.vt_end = end_voltage(terms, curve, e.current);
      break;
    case Constraint::voltage: {
      const auto peak = peak_current_voltage_constraint(terms, curve, dir, soa);
      e.current = peak.current;
      e.feasible = peak.feasible;
      // Held at the cut-off by construction.
      e.vt_end = peak.feasible ? cutoff_voltage(dir, soa) : end_voltage(terms, curve, 0.0);
      break;
    }
    case Constraint::soc: {
      const auto peak = peak_current_soc_constraint(terms, dir, soa);
      e.current = peak.current;
      e.feasible = peak.feasible;
      e.vt_end = end_voltage(terms, curve, e.current);
      break;
    }
  }
  e.power = e.current * e.vt_end;
  return e;
}

double reference_power(Constraint c, const WindowTerms& terms, const OcvCurve& curve,
                       Direction dir, const Soa& soa) {
  const double relaxed = curve(terms.soc) - terms.vp_relax;
  const double den = terms.denominator();
  switch (c) {
    case Constraint::current: {
      const double i = current_limit(dir, soa);
      return i * relaxed - i * i * den;
    }
    case Constraint::voltage: {
      const double v = cutoff_voltage(dir, soa);
      return v * (relaxed - v) / den;
    }
    case Constraint::soc: {
      const double bound = soc_limit(dir, soa);
      const double i = (terms.soc - bound) / terms.soc_per_amp();
      return i * (curve(bound) - terms.vp_relax - i * terms.r_sum);
    }
  }
  return 0.0;
}

namespace {

SopResult compose(const BatteryState& state, const BatteryParams& params, const OcvCurve& curve,
                  double kappa, const Window& window, Direction dir, const Soa& soa,
                  SopEvaluation eval) {
  const WindowTerms terms = window_terms(state, params, kappa, window);

  SopResult r;
  r.kappa = kappa;
  r.i_current_limit = peak_current_current_constraint(dir, soa);
  r.i_voltage_limit = peak_current_voltage_constraint(terms, curve, dir, soa).current;
  r.i_soc_limit = peak_current_soc_constraint(terms, dir, soa).current;

  // Priority order on ties: voltage, soc, current.
  const std::array<std::pair<Constraint, double>, 3> candidates{{
      {Constraint::voltage, r.i_voltage_limit},
      {Constraint::soc, r.i_soc_limit},
      {Constraint::current, r.i_current_limit},
  }};
  r.dominant = candidates[0].first;
  r.i_mc = candidates[0].second;
  for (const auto& [c, i] : candidates) {
    if (std::abs(i) < std::abs(r.i_mc)) {
      r.dominant = c;
      r.i_mc = i;
    }
    r.constraint_sop[static_cast<std::size_t>(c)] = std::abs(i * end_voltage(terms, curve, i));
  }

  r.vt_end = predict_cc(state, params, curve, kappa, r.i_mc, window).vt_end;
  r.feasible = r.i_mc != 0.0;
  if (!r.feasible) {
    r.power_signed = 0.0;
    r.sop = 0.0;
    return r;
  }

  r.power_signed = r.i_mc * r.vt_end;
  r.sop = std::abs(r.power_signed);
  if (eval == SopEvaluation::min_over_window) {
    BatteryState s = state;
    double lowest = std::abs(r.power_signed);
    for (int j = 0; j < window.steps; ++j) {
      const auto next = step(s, params, curve, r.i_mc, window.dt);
      s = next.state;
      lowest = std::min(lowest, std::abs(r.i_mc * next.vt));
    }
    r.sop = lowest;
    r.power_signed = sign(dir) * lowest;
  }
  return r;
}

}  // namespace

SopResult sop_cc_with_slope(const BatteryState& state, const BatteryParams& params,
                            const OcvCurve& curve, double kappa, const Window& window,
                            Direction dir, const Soa& soa, SopEvaluation eval) {
  params.validate();
  soa.validate();
  window.validate();
  return compose(state, params, curve, kappa, window, dir, soa, eval);
}

double window_slope(const OcvCurve& curve, double soc_from, double soc_to, Direction dir) {
  const auto seg = curve.segment_toward(soc_from, soc_travel(dir));
  // A secant inside one linear piece is that piece's slope; skip the
  // round-off of the difference quotient.
  if (soc_to >= seg.soc_lo && soc_to <= seg.soc_hi) return seg.slope;
  if (std::abs(soc_to - soc_from) > kSlopeSecantEps) return ocv_slope(curve, soc_from, soc_to);
  return seg.slope;
}

SopResult sop_cc(const BatteryState& state, const BatteryParams& params, const OcvCurve& curve,
                 const Window& window, Direction dir, const Soa& soa, SopEvaluation eval) {
  params.validate();
  soa.validate();
  window.validate();
  const double local = curve.segment_slope(state.soc, soc_travel(dir));
  const SopResult first = compose(state, params, curve, local, window, dir, soa, eval);
  const double soc_end = state.soc - params.charge_gain() * window.duration() * first.i_mc;
  const double secant = window_slope(curve, state.soc, soc_end, dir);
  if (secant == local) return first;
  return compose(state, params, curve, secant, window, dir, soa, eval);
}

}  // namespace soplab
