#include "soplab/ecm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "soplab/errors.hpp"

namespace soplab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool finite(double v) { return std::isfinite(v); }

}  // namespace

void BatteryParams::validate() const {
  if (!finite(r0) || r0 <= 0.0) throw ConfigError("r0 must be > 0");
  if (!finite(r1) || r1 < 0.0) throw ConfigError("r1 must be >= 0");
  if (!finite(tau) || tau <= 0.0) throw ConfigError("tau must be > 0");
  if (!finite(capacity_ah) || capacity_ah <= 0.0) throw ConfigError("capacity must be > 0");
  if (!finite(coulombic_eff) || coulombic_eff <= 0.0 || coulombic_eff > 1.0)
    throw ConfigError("coulombic efficiency must lie in (0, 1]");
}

void Window::validate() const {
  if (steps < 1) throw ConfigError("window needs at least one step");
  if (!finite(dt) || dt <= 0.0) throw ConfigError("sampling interval must be > 0");
}

OcvCurve::OcvCurve(std::vector<Point> points) : points_(std::move(points)) {
  if (points_.size() < 2) throw ConfigError("OCV table needs at least two points");
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const auto& p = points_[i];
    if (!finite(p.soc) || !finite(p.ocv))
      throw ConfigError("OCV table entry " + std::to_string(i) + " is not finite");
    if (p.soc < 0.0 || p.soc > 1.0)
      throw ConfigError("OCV table SOC outside [0, 1] at entry " + std::to_string(i));
    if (i > 0) {
      if (p.soc <= points_[i - 1].soc)
        throw ConfigError("OCV table SOC not strictly increasing at entry " + std::to_string(i));
      if (p.ocv < points_[i - 1].ocv)
        throw ConfigError("OCV table voltage decreasing at entry " + std::to_string(i));
    }
  }
}

OcvCurve OcvCurve::linear(double v0, double slope) {
  return OcvCurve({{0.0, v0}, {1.0, v0 + slope}});
}

double OcvCurve::operator()(double soc) const {
  if (soc <= points_.front().soc) return points_.front().ocv;
  if (soc >= points_.back().soc) return points_.back().ocv;
  auto hi = std::upper_bound(points_.begin(), points_.end(), soc,
                             [](double s, const Point& p) { return s < p.soc; });
  auto lo = hi - 1;
  if (soc == lo->soc) return lo->ocv;
  const double w = (soc - lo->soc) / (hi->soc - lo->soc);
  return lo->ocv + w * (hi->ocv - lo->ocv);
}

OcvCurve::Segment OcvCurve::interior(std::size_t i) const {
  const auto& a = points_[i];
  const auto& b = points_[i + 1];
  return {a.soc, b.soc, (b.ocv - a.ocv) / (b.soc - a.soc), a.soc, a.ocv, static_cast<int>(i)};
}

OcvCurve::Segment OcvCurve::segment_toward(double soc, int direction) const {
  const auto& first = points_.front();
  const auto& last = points_.back();
  const Segment below{-kInf, first.soc, 0.0, first.soc, first.ocv, -1};
  const Segment above{last.soc, kInf, 0.0, last.soc, last.ocv,
                      static_cast<int>(points_.size()) - 1};
  if (direction >= 0) {
    if (soc < first.soc) return below;
    if (soc >= last.soc) return above;
    auto hi = std::upper_bound(points_.begin(), points_.end(), soc,
                               [](double s, const Point& p) { return s < p.soc; });
    return interior(static_cast<std::size_t>(hi - points_.begin()) - 1);
  }
  if (soc > last.soc) return above;
  if (soc <= first.soc) return below;
  auto lo = std::lower_bound(points_.begin(), points_.end(), soc,
                             [](const Point& p, double s) { return p.soc < s; });
  return interior(static_cast<std::size_t>(lo - points_.begin()) - 1);
}

bool OcvCurve::next_segment(const Segment& seg, int direction, Segment& out) const {
  const int n = static_cast<int>(points_.size());
  int next = direction >= 0 ? seg.index + 1 : seg.index - 1;
  if (direction >= 0 && seg.index == n - 1) return false;
  if (direction < 0 && seg.index == -1) return false;
  if (next < 0 || next > n - 2) {
    out = segment_toward(direction >= 0 ? points_.back().soc : points_.front().soc, direction);
    return true;
  }
  out = interior(static_cast<std::size_t>(next));
  return true;
}

double OcvCurve::segment_slope(double soc, int direction) const {
  return segment_toward(soc, direction).slope;
}

double ocv(const OcvCurve& curve, double soc) { return curve(soc); }

double ocv_slope(const OcvCurve& curve, double soc_a, double soc_b) {
  if (std::abs(soc_a - soc_b) > kSlopeSecantEps) return (curve(soc_b) - curve(soc_a)) / (soc_b - soc_a);
  // Local slope; at the top knot look back into the table instead of onto the flat hold.
  const int direction = soc_a >= curve.points().back().soc ? -1 : +1;
  return curve.segment_slope(soc_a, direction);
}

double relaxation_factor(double dt, double tau) { return std::exp(-dt / tau); }

double effective_r1(const BatteryParams& params, const Window& window) {
  return params.r1 * -std::expm1(-window.duration() / params.tau);
}

StepResult step(const BatteryState& state, const BatteryParams& params, const OcvCurve& curve,
                double current, double dt) {
  const double decay = std::exp(-dt / params.tau);
  const double charge = -std::expm1(-dt / params.tau);
  StepResult out;
  out.state.vp = state.vp * decay + current * params.r1 * charge;
  const double soc = state.soc - params.charge_gain() * dt * current;
  out.state.soc = std::clamp(soc, 0.0, 1.0);
  out.soc_clamped = out.state.soc != soc;
  out.vt = curve(out.state.soc) - out.state.vp - current * params.r0;
  return out;
}

CcPrediction predict_cc(const BatteryState& state, const BatteryParams& params,
                        const OcvCurve& curve, double kappa, double current,
                        const Window& window) {
  window.validate();
  const double throughput = params.charge_gain() * window.duration();
  CcPrediction p;
  p.ocv_end = curve(state.soc) - throughput * kappa * current;
  p.vp_relax_end = state.vp * std::exp(-window.duration() / params.tau);
  p.eff_r1 = effective_r1(params, window);
  p.vt_end = p.ocv_end - p.vp_relax_end - current * p.eff_r1 - current * params.r0;
  p.soc_end = state.soc - throughput * current;
  return p;
}

std::vector<TracePoint> simulate_profile(const BatteryState& state, const BatteryParams& params,
                                         const OcvCurve& curve,
                                         std::span<const ProfileSample> profile) {
  if (profile.empty()) throw InputError("profile is empty");
  for (std::size_t i = 0; i < profile.size(); ++i) {
    if (!finite(profile[i].t) || !finite(profile[i].current))
      throw InputError("profile row " + std::to_string(i) + " is not finite");
    if (i > 0 && profile[i].t <= profile[i - 1].t)
      throw InputError("profile times not strictly increasing at row " + std::to_string(i));
  }

  std::vector<TracePoint> trace;
  trace.reserve(profile.size());
  BatteryState s = state;
  trace.push_back({profile[0].t, profile[0].current, s.soc, s.vp,
                   curve(s.soc) - s.vp - profile[0].current * params.r0, false});
  for (std::size_t i = 1; i < profile.size(); ++i) {
    const auto r = step(s, params, curve, profile[i].current, profile[i].t - profile[i - 1].t);
    s = r.state;
    trace.push_back({profile[i].t, profile[i].current, s.soc, s.vp, r.vt, r.soc_clamped});
  }
  return trace;
}

}  // namespace soplab
