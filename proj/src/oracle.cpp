#include "soplab/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "soplab/errors.hpp"

namespace soplab::oracle {

namespace {

// Simulates K steps at the current produced by `current_at(state)` and
// reports whether every step stays inside the SOA. `current_at` returns
// empty when no admissible current exists.
template <class CurrentAt>
bool window_feasible(const BatteryState& state, const BatteryParams& params,
                     const OcvCurve& curve, const Window& window, const Soa& soa,
                     CurrentAt current_at) {
  BatteryState s = state;
  for (int j = 0; j < window.steps; ++j) {
    const std::optional<double> current = current_at(s);
    if (!current) return false;
    const auto r = step(s, params, curve, *current, window.dt);
    if (!check_point(r.vt, *current, r.state.soc, soa).empty()) return false;
    s = r.state;
  }
  return true;
}

}  // namespace

OracleResult brute_peak_current_cc(const BatteryState& state, const BatteryParams& params,
                                   const OcvCurve& curve, const Window& window, Direction dir,
                                   const Soa& soa, double tol_amps) {
  params.validate();
  soa.validate();
  window.validate();
  if (!(tol_amps > 0.0)) throw ConfigError("oracle current tolerance must be > 0");

  const int sgn = sign(dir);
  auto feasible = [&](double magnitude) {
    return window_feasible(state, params, curve, window, soa,
                           [&](const BatteryState&) { return std::optional(sgn * magnitude); });
  };

  OracleResult out;
  if (!feasible(0.0)) return out;
  out.feasible = true;

  // Step 1 alone bounds |I| through the ohmic drop; one ampere of margin
  // keeps the bracket strictly above the answer.
  const double limit = std::abs(current_limit(dir, soa));
  const double rested = curve(state.soc);
  const double headroom = dir == Direction::discharge ? rested + std::abs(state.vp) - soa.vt_min
                                                      : soa.vt_max - rested + std::abs(state.vp);
  const double bound = std::clamp(headroom / params.r0 + 1.0, 0.0, limit);

  if (feasible(bound)) {
    out.value = bound;
    out.saturated = true;
    return out;
  }
  double lo = 0.0;
  double hi = bound;
  while (hi - lo > tol_amps && out.iterations < 200) {
    const double mid = 0.5 * (lo + hi);
    if (feasible(mid)) lo = mid;
    else hi = mid;
    ++out.iterations;
  }
  out.value = lo;
  return out;
}

std::optional<double> secant_cp_current(const BatteryState& state, const BatteryParams& params,
                                        const OcvCurve& curve, double dt, Direction dir,
                                        double power_magnitude, double current_cap) {
  if (power_magnitude == 0.0) return 0.0;
  const int sgn = sign(dir);
  // Delivered power magnitude minus the target, as a function of |I|.
  auto excess = [&](double m) {
    return m * step(state, params, curve, sgn * m, dt).vt - power_magnitude;
  };

  // Scan for the first sign change so the smallest root is bracketed.
  constexpr int kScan = 256;
  double a = 0.0;
  double fa = excess(0.0);
  double b = 0.0;
  double fb = fa;
  bool bracketed = false;
  for (int k = 1; k <= kScan; ++k) {
    b = current_cap * k / kScan;
    fb = excess(b);
    if (fb >= 0.0) {
      bracketed = true;
      break;
    }
    a = b;
    fa = fb;
  }
  if (!bracketed) return std::nullopt;
  if (fb == 0.0) return b;

  // Illinois variant of regula falsi.
  int side = 0;
  for (int it = 0; it < 200; ++it) {
    const double c = (a * fb - b * fa) / (fb - fa);
    const double fc = excess(c);
    if (fc == 0.0 || std::abs(b - a) <= 1e-15 * std::max(1.0, std::abs(c))) return c;
    if (fc < 0.0) {
      a = c;
      fa = fc;
      if (side == -1) fb *= 0.5;
      side = -1;
    } else {
      b = c;
      fb = fc;
      if (side == +1) fa *= 0.5;
      side = +1;
    }
  }
  return (a * fb - b * fa) / (fb - fa);
}

OracleResult brute_peak_power_cp(const BatteryState& state, const BatteryParams& params,
                                 const OcvCurve& curve, const Window& window, Direction dir,
                                 const Soa& soa, double tol_watts, const CpOptions& options) {
  params.validate();
  soa.validate();
  window.validate();
  if (!(tol_watts > 0.0)) throw ConfigError("oracle power tolerance must be > 0");

  const int sgn = sign(dir);
  const double limit = std::abs(current_limit(dir, soa));
  auto feasible = [&](double power) {
    return window_feasible(state, params, curve, window, soa,
                           [&](const BatteryState& s) -> std::optional<double> {
                             const auto m = secant_cp_current(s, params, curve, window.dt, dir,
                                                              power, limit);
                             if (!m) return std::nullopt;
                             return sgn * *m;
                           });
  };

  OracleResult out;
  if (!feasible(0.0)) return out;
  out.feasible = true;

  const double p_hi = options.p_hi.value_or(limit * soa.vt_max);
  if (feasible(p_hi)) {
    out.value = p_hi;
    out.saturated = true;
    return out;
  }
  double lo = 0.0;
  double hi = p_hi;
  while (hi - lo > tol_watts && out.iterations < options.max_iterations) {
    const double mid = 0.5 * (lo + hi);
    if (feasible(mid)) lo = mid;
    else hi = mid;
    ++out.iterations;
  }
  out.value = lo;
  return out;
}

}  // namespace soplab::oracle
