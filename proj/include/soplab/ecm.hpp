#pragma once

// First-order Thevenin equivalent-circuit model: OCV table, single-step
// dynamics, closed-form constant-current window prediction.
//
// Sign convention: positive current discharges, negative current charges.

#include <span>
#include <vector>

namespace soplab {

struct BatteryParams {
  double r0 = 0.0;             // ohmic resistance [ohm]
  double r1 = 0.0;             // polarization resistance [ohm]
  double tau = 0.0;            // polarization time constant [s]
  double capacity_ah = 0.0;    // available capacity [Ah]
  double coulombic_eff = 1.0;  // [-]

  // Throws ConfigError when an invariant is broken.
  void validate() const;

  // SOC change per ampere-second: eta / (3600 * Ca).
  double charge_gain() const { return coulombic_eff / (3600.0 * capacity_ah); }
};

struct BatteryState {
  double soc = 0.0;  // fraction in [0, 1]
  double vp = 0.0;   // polarization voltage [V]
};

struct Window {
  int steps = 1;    // K
  double dt = 1.0;  // sampling interval [s]

  void validate() const;
  double duration() const { return steps * dt; }
};

// Monotone piecewise-linear SOC -> OCV table. Outside the knot range the
// endpoint values are held.
class OcvCurve {
 public:
  struct Point {
    double soc;
    double ocv;
  };

  // A linear piece of the curve valid on [soc_lo, soc_hi]; the outer pieces
  // beyond the knot range are flat and unbounded.
  struct Segment {
    double soc_lo;
    double soc_hi;
    double slope;
    double soc_ref;
    double ocv_ref;
    int index;  // -1 below the knots, points().size() - 1 above, else interior

    double at(double soc) const { return ocv_ref + slope * (soc - soc_ref); }
  };

  explicit OcvCurve(std::vector<Point> points);

  // Two-knot curve v0 + slope * soc on [0, 1].
  static OcvCurve linear(double v0, double slope);

  double operator()(double soc) const;

  // Slope of the segment entered when leaving `soc` in the given direction
  // (+1 towards higher SOC, -1 towards lower SOC).
  double segment_slope(double soc, int direction = +1) const;

  // The segment entered when leaving `soc` in `direction`, and its successor
  // further along that direction. Unbounded flat pieces have no successor.
  Segment segment_toward(double soc, int direction) const;
  bool next_segment(const Segment& seg, int direction, Segment& out) const;

  std::span<const Point> points() const { return points_; }

 private:
  Segment interior(std::size_t i) const;

  std::vector<Point> points_;
};

double ocv(const OcvCurve& curve, double soc);

// Secant slope between two SOC points; falls back to the local segment slope
// at soc_a when the pair is closer than kSlopeSecantEps.
inline constexpr double kSlopeSecantEps = 1e-6;
double ocv_slope(const OcvCurve& curve, double soc_a, double soc_b);

struct StepResult {
  BatteryState state;
  double vt = 0.0;
  bool soc_clamped = false;
};

// One sampling interval at constant current. The terminal voltage uses the
// same current for the ohmic drop.
StepResult step(const BatteryState& state, const BatteryParams& params, const OcvCurve& curve,
                double current, double dt);

// exp(-dt/tau)
double relaxation_factor(double dt, double tau);

// R1 * (1 - exp(-K dt / tau)): effective polarization resistance seen at the
// end of a constant-current window.
double effective_r1(const BatteryParams& params, const Window& window);

struct CcPrediction {
  double ocv_end = 0.0;       // OCV at k+K with the slope held constant
  double vp_relax_end = 0.0;  // decay of the initial polarization voltage
  double eff_r1 = 0.0;
  double vt_end = 0.0;
  double soc_end = 0.0;
};

CcPrediction predict_cc(const BatteryState& state, const BatteryParams& params,
                        const OcvCurve& curve, double kappa, double current,
                        const Window& window);

struct ProfileSample {
  double t = 0.0;        // [s]
  double current = 0.0;  // [A]
};

struct TracePoint {
  double t = 0.0;
  double current = 0.0;
  double soc = 0.0;
  double vp = 0.0;
  double vt = 0.0;
  bool soc_clamped = false;
};

// Replays a time/current series. Row 0 reports the initial state; row i
// applies the current of row i over (t[i-1], t[i]].
std::vector<TracePoint> simulate_profile(const BatteryState& state, const BatteryParams& params,
                                         const OcvCurve& curve,
                                         std::span<const ProfileSample> profile);

}  // namespace soplab
