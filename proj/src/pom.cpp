#include "soplab/pom.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "soplab/errors.hpp"

namespace soplab {

namespace {

// A root may land this far past a knot and still count as on the segment.
constexpr double kSegmentTol = 1e-13;

// Walks the OCV segments in the direction SOC travels under the sought
// current. On each segment the next terminal voltage is linear in the current,
// vt(I) = open - I * resistance; `candidates` returns the roots of the
// segment-local equation ordered by increasing |I|.
std::optional<double> solve_on_segments(
    const BatteryState& s, const BatteryParams& p, const OcvCurve& curve, double dt,
    int soc_dir, const std::function<std::vector<double>(double, double)>& candidates) {
  const double relaxed = s.vp * std::exp(-dt / p.tau);
  const double gain = p.charge_gain() * dt;
  const double r_step = p.r1 * -std::expm1(-dt / p.tau) + p.r0;
  auto seg = curve.segment_toward(s.soc, soc_dir);
  for (;;) {
    const double open = seg.at(s.soc) - relaxed;
    const double resistance = seg.slope * gain + r_step;
    for (double i : candidates(open, resistance)) {
      if (-soc_dir * i < 0.0) continue;
      const double next = s.soc - gain * i;
      if (next >= seg.soc_lo - kSegmentTol && next <= seg.soc_hi + kSegmentTol) return i;
    }
    if (!curve.next_segment(seg, soc_dir, seg)) return std::nullopt;
  }
}

PomStep record(int index, double current, const StepResult& r) {
  return {index, current, r.vt, r.state.soc, r.state.vp, current * r.vt};
}

// Clamps a current to the direction's sign and magnitude limit.
double clamp_current(double current, Direction dir, const Soa& soa) {
  const int sgn = sign(dir);
  return sgn * std::clamp(sgn * current, 0.0, std::abs(current_limit(dir, soa)));
}

bool soc_beyond(double soc, Direction dir, const Soa& soa) {
  return sign(dir) * (soc - soc_limit(dir, soa)) < 0.0;
}

bool has_soc_headroom(const BatteryState& state, Direction dir, const Soa& soa) {
  return sign(dir) * (state.soc - soc_limit(dir, soa)) > 0.0;
}

PomTrace idle_trace(const BatteryState& state, const BatteryParams& params, const OcvCurve& curve,
                    const Window& window) {
  return trace_cc(state, params, curve, window, 0.0);
}

// Fills the SopResult summary of a stepwise trace: SOP is min_j |P_j|.
SopResult summarize(const PomTrace& trace, Direction dir, const Soa& soa, Constraint dominant) {
  SopResult r;
  r.i_current_limit = current_limit(dir, soa);
  r.dominant = dominant;
  if (trace.steps.empty()) return r;
  const auto lowest = std::min_element(
      trace.steps.begin(), trace.steps.end(),
      [](const PomStep& a, const PomStep& b) { return std::abs(a.power) < std::abs(b.power); });
  r.i_mc = lowest->current;
  r.vt_end = trace.steps.back().vt;
  r.sop = std::abs(lowest->power);
  r.power_signed = sign(dir) * r.sop;
  r.feasible = r.sop > 0.0;
  return r;
}

// Bisection on a scalar in [0, 1] where 0 overshoots the SOC bound and 1 does
// not; returns the trace at the smallest non-overshooting value found.
PomTrace settle_on_soc_bound(const std::function<PomTrace(double)>& build, Direction dir,
                             const Soa& soa) {
  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    const auto t = build(mid);
    if (soc_beyond(t.steps.back().soc, dir, soa)) lo = mid;
    else hi = mid;
  }
  return build(hi);
}

}  // namespace

std::vector<Violation> check_trace(const PomTrace& trace, const Soa& soa, const SoaSlack& slack) {
  std::vector<Violation> out;
  for (const auto& s : trace.steps) {
    for (auto v : check_point(s.vt, s.current, s.soc, soa, slack)) {
      v.step_index = static_cast<std::size_t>(s.index);
      out.push_back(v);
    }
  }
  return out;
}

PomTrace trace_cc(const BatteryState& state, const BatteryParams& params, const OcvCurve& curve,
                  const Window& window, double current) {
  window.validate();
  PomTrace t;
  t.steps.reserve(static_cast<std::size_t>(window.steps));
  BatteryState s = state;
  for (int j = 1; j <= window.steps; ++j) {
    const auto r = step(s, params, curve, current, window.dt);
    t.steps.push_back(record(j, current, r));
    s = r.state;
  }
  return t;
}

double hold_current(const BatteryState& state, const BatteryParams& params, const OcvCurve& curve,
                    double dt, double v_target) {
  if (!(params.r0 > 0.0)) throw DomainError("constant-voltage current needs r0 > 0");
  const double rested = curve(state.soc) - state.vp * std::exp(-dt / params.tau);
  if (rested == v_target) return 0.0;
  const int soc_dir = rested > v_target ? -1 : +1;
  const auto i = solve_on_segments(state, params, curve, dt, soc_dir,
                                   [v_target](double open, double resistance) {
                                     return std::vector<double>{(open - v_target) / resistance};
                                   });
  // The outermost segment is unbounded, so a root always exists.
  return i.value_or(0.0);
}

namespace {

PomTrace hold_trace(const BatteryState& state, const BatteryParams& params, const OcvCurve& curve,
                    const Window& window, Direction dir, const Soa& soa, double level,
                    std::optional<double> first_current) {
  PomTrace t;
  t.steps.reserve(static_cast<std::size_t>(window.steps));
  BatteryState s = state;
  for (int j = 1; j <= window.steps; ++j) {
    const double wanted = (j == 1 && first_current) ? *first_current
                                                    : hold_current(s, params, curve, window.dt, level);
    const double current = clamp_current(wanted, dir, soa);
    const auto r = step(s, params, curve, current, window.dt);
    t.steps.push_back(record(j, current, r));
    s = r.state;
  }
  return t;
}

}  // namespace

PomResult sop_cv(const BatteryState& state, const BatteryParams& params, const OcvCurve& curve,
                 const Window& window, Direction dir, const Soa& soa) {
  params.validate();
  soa.validate();
  window.validate();

  const int sgn = sign(dir);
  const double cutoff = cutoff_voltage(dir, soa);
  const double limit = current_limit(dir, soa);
  const double first_hold = hold_current(state, params, curve, window.dt, cutoff);

  PomResult out;
  if (sgn * first_hold <= 0.0 || !has_soc_headroom(state, dir, soa)) {
    out.trace = idle_trace(state, params, curve, window);
    out.sop = summarize(out.trace, dir, soa,
                        sgn * first_hold <= 0.0 ? Constraint::voltage : Constraint::soc);
    out.sop.feasible = false;
    out.sop.sop = 0.0;
    out.sop.power_signed = 0.0;
    return out;
  }

  // Level selection: hold the cut-off unless step 1 would need more than the
  // current limit, in which case step 1 runs at the limit and the voltage it
  // reaches is held for the rest of the window.
  Constraint dominant = Constraint::voltage;
  double level = cutoff;
  std::optional<double> first;
  if (std::abs(first_hold) > std::abs(limit)) {
    dominant = Constraint::current;
    first = limit;
    level = step(state, params, curve, limit, window.dt).vt;
  }
  out.trace = hold_trace(state, params, curve, window, dir, soa, level, first);

  if (soc_beyond(out.trace.steps.back().soc, dir, soa)) {
    // Raise (discharge) or lower (charge) the held level until the window ends
    // on the SOC bound. At `idle` the hold current is never in the direction.
    const double idle = dir == Direction::discharge
                            ? std::max(soa.vt_max, curve(state.soc) + std::abs(state.vp))
                            : std::min(soa.vt_min, curve(state.soc) - std::abs(state.vp));
    out.trace = settle_on_soc_bound(
        [&](double theta) {
          return hold_trace(state, params, curve, window, dir, soa,
                            level + theta * (idle - level), std::nullopt);
        },
        dir, soa);
    dominant = Constraint::soc;
  }

  out.sop = summarize(out.trace, dir, soa, dominant);
  out.sop.i_voltage_limit = first_hold;
  out.sop.i_soc_limit = (state.soc - soc_limit(dir, soa)) /
                        (params.charge_gain() * window.duration());
  return out;
}

std::string_view to_string(CcCvCase c) {
  switch (c) {
    case CcCvCase::case1_cc_only: return "case1_cc_only";
    case CcCvCase::case2_transitional: return "case2_transitional";
    case CcCvCase::case3_cv_only: return "case3_cv_only";
  }
  return "unknown";
}

ModeShift find_mode_shift_kc(const BatteryState& state, const BatteryParams& params,
                             const OcvCurve& curve, const Window& window, Direction dir,
                             const Soa& soa) {
  params.validate();
  soa.validate();
  window.validate();
  const int sgn = sign(dir);
  const double cutoff = cutoff_voltage(dir, soa);
  const double limit = current_limit(dir, soa);
  BatteryState s = state;
  for (int j = 1; j <= window.steps; ++j) {
    const auto r = step(s, params, curve, limit, window.dt);
    if (sgn * (cutoff - r.vt) > 0.0) {
      if (j == 1) return {CcCvCase::case3_cv_only, kModeShiftBefore};
      return {CcCvCase::case2_transitional, j};
    }
    s = r.state;
  }
  return {CcCvCase::case1_cc_only, kModeShiftBeyond};
}

namespace {

// CC at `cap` until the next step would land beyond the cut-off, then hold
// the cut-off for the rest of the window.
PomTrace cccv_trace(const BatteryState& state, const BatteryParams& params, const OcvCurve& curve,
                    const Window& window, Direction dir, const Soa& soa, double cap) {
  const int sgn = sign(dir);
  const double cutoff = cutoff_voltage(dir, soa);
  PomTrace t;
  t.steps.reserve(static_cast<std::size_t>(window.steps));
  BatteryState s = state;
  bool holding = false;
  for (int j = 1; j <= window.steps; ++j) {
    if (!holding) {
      const auto r = step(s, params, curve, sgn * cap, window.dt);
      if (sgn * (cutoff - r.vt) <= 0.0) {
        t.steps.push_back(record(j, sgn * cap, r));
        s = r.state;
        continue;
      }
      holding = true;
      t.mode_shift_index = j;
    }
    const double wanted = hold_current(s, params, curve, window.dt, cutoff);
    const double current = sgn * std::clamp(sgn * wanted, 0.0, cap);
    const auto r = step(s, params, curve, current, window.dt);
    t.steps.push_back(record(j, current, r));
    s = r.state;
  }
  return t;
}

}  // namespace

PomResult sop_cccv(const BatteryState& state, const BatteryParams& params, const OcvCurve& curve,
                   const Window& window, Direction dir, const Soa& soa) {
  const ModeShift shift = find_mode_shift_kc(state, params, curve, window, dir, soa);
  if (shift.kind == CcCvCase::case3_cv_only) return sop_cv(state, params, curve, window, dir, soa);

  PomResult out;
  if (!has_soc_headroom(state, dir, soa)) {
    out.trace = idle_trace(state, params, curve, window);
    out.sop = summarize(out.trace, dir, soa, Constraint::soc);
    out.sop.feasible = false;
    out.sop.sop = 0.0;
    out.sop.power_signed = 0.0;
    return out;
  }

  const double cap = std::abs(current_limit(dir, soa));
  Constraint dominant =
      shift.kind == CcCvCase::case1_cc_only ? Constraint::current : Constraint::voltage;
  out.trace = cccv_trace(state, params, curve, window, dir, soa, cap);
  if (soc_beyond(out.trace.steps.back().soc, dir, soa)) {
    out.trace = settle_on_soc_bound(
        [&](double theta) {
          return cccv_trace(state, params, curve, window, dir, soa, (1.0 - theta) * cap);
        },
        dir, soa);
    dominant = Constraint::soc;
  }
  out.sop = summarize(out.trace, dir, soa, dominant);
  out.sop.i_soc_limit = (state.soc - soc_limit(dir, soa)) /
                        (params.charge_gain() * window.duration());
  return out;
}

CpStep solve_cp_quadratic(double open_voltage, double resistance, double power) {
  if (!(resistance > 0.0)) throw DomainError("constant-power solve needs a positive resistance");
  if (power == 0.0) return {0.0, open_voltage, true};
  const double disc = open_voltage * open_voltage - 4.0 * resistance * power;
  if (disc < 0.0) return {0.0, 0.0, false};
  const double denom = open_voltage + std::sqrt(disc);
  if (!(denom > 0.0)) return {0.0, 0.0, false};
  // Written as 2P / (V + sqrt(disc)) so the root stays continuous through P = 0.
  const double current = 2.0 * power / denom;
  return {current, power / current, true};
}

CpStep solve_cp_step(const BatteryState& state, const BatteryParams& params, const OcvCurve& curve,
                     double dt, double power) {
  if (!(params.r0 > 0.0)) throw DomainError("constant-power solve needs r0 > 0");
  if (power == 0.0) return {0.0, step(state, params, curve, 0.0, dt).vt, true};
  const int soc_dir = power > 0.0 ? -1 : +1;
  const auto i = solve_on_segments(
      state, params, curve, dt, soc_dir, [power](double open, double resistance) {
        std::vector<double> roots;
        const double disc = open * open - 4.0 * resistance * power;
        if (disc < 0.0) return roots;
        const double root = std::sqrt(disc);
        if (open + root > 0.0) roots.push_back(2.0 * power / (open + root));
        roots.push_back((open + root) / (2.0 * resistance));
        return roots;
      });
  if (!i) return {0.0, 0.0, false};
  return {*i, step(state, params, curve, *i, dt).vt, true};
}

namespace {

std::optional<PomTrace> cp_trace(const BatteryState& state, const BatteryParams& params,
                                 const OcvCurve& curve, const Window& window, double power) {
  PomTrace t;
  t.steps.reserve(static_cast<std::size_t>(window.steps));
  BatteryState s = state;
  for (int j = 1; j <= window.steps; ++j) {
    const auto cp = solve_cp_step(s, params, curve, window.dt, power);
    if (!cp.feasible) return std::nullopt;
    const auto r = step(s, params, curve, cp.current, window.dt);
    t.steps.push_back(record(j, cp.current, r));
    s = r.state;
  }
  return t;
}

Constraint classify(const Violation& v) {
  switch (v.kind) {
    case ViolationKind::voltage_low:
    case ViolationKind::voltage_high: return Constraint::voltage;
    case ViolationKind::current_high_dis:
    case ViolationKind::current_high_chg: return Constraint::current;
    case ViolationKind::soc_low:
    case ViolationKind::soc_high: return Constraint::soc;
  }
  return Constraint::voltage;
}

}  // namespace

PomResult sop_cp(const BatteryState& state, const BatteryParams& params, const OcvCurve& curve,
                 const Window& window, Direction dir, const Soa& soa, double tol_watts,
                 int max_iterations) {
  params.validate();
  soa.validate();
  window.validate();
  if (!(tol_watts > 0.0)) throw ConfigError("constant-power tolerance must be > 0");

  const int sgn = sign(dir);
  auto feasible = [&](double p) {
    const auto t = cp_trace(state, params, curve, window, sgn * p);
    return t && check_trace(*t, soa).empty();
  };
  // The SOA caps |P| at |I_max| * vt_max for either direction.
  const double p_hi = std::abs(current_limit(dir, soa)) * soa.vt_max;

  PomResult out;
  if (!feasible(0.0)) {
    out.trace = idle_trace(state, params, curve, window);
    const auto v = check_trace(out.trace, soa);
    out.sop = summarize(out.trace, dir, soa, v.empty() ? Constraint::voltage : classify(v.front()));
    out.sop.feasible = false;
    out.sop.sop = 0.0;
    out.sop.power_signed = 0.0;
    return out;
  }

  double lo = 0.0;
  double hi = p_hi;
  if (feasible(p_hi)) {
    lo = p_hi;
  } else {
    for (int it = 0; it < max_iterations && hi - lo > tol_watts; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (feasible(mid)) lo = mid;
      else hi = mid;
    }
  }

  Constraint dominant = Constraint::current;
  if (lo < p_hi) {
    const auto over = cp_trace(state, params, curve, window, sgn * hi);
    if (!over) {
      dominant = Constraint::voltage;
    } else {
      const auto v = check_trace(*over, soa);
      dominant = v.empty() ? Constraint::voltage : classify(v.front());
    }
  }

  out.trace = *cp_trace(state, params, curve, window, sgn * lo);
  out.sop = summarize(out.trace, dir, soa, dominant);
  if (lo > 0.0) {
    // Report the commanded power rather than the per-step products, which
    // differ from it only by round-off.
    out.sop.sop = lo;
    out.sop.power_signed = sgn * lo;
    out.sop.feasible = true;
    const auto peak = std::max_element(
        out.trace.steps.begin(), out.trace.steps.end(),
        [](const PomStep& a, const PomStep& b) { return std::abs(a.current) < std::abs(b.current); });
    out.sop.i_mc = peak->current;
  } else {
    out.sop.feasible = false;
  }
  return out;
}

}  // namespace soplab
