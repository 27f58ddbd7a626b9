#pragma once

// Canonical fixture and a hand-written reference stepper. The stepper repeats
// the Thevenin update with plain arithmetic so tests do not lean on step().

#include <cmath>
#include <vector>

#include "soplab/ecm.hpp"
#include "soplab/soa.hpp"

namespace fx {

inline soplab::BatteryParams params() { return {0.05, 0.03, 10.0, 2.0, 1.0}; }
inline soplab::Soa soa() { return {2.8, 4.3, 10.0, -4.0, 0.1, 0.9}; }
inline soplab::OcvCurve linear() { return soplab::OcvCurve::linear(3.0, 1.2); }

// Flat-ish plateau above a steep low-SOC knee.
inline soplab::OcvCurve knee() {
  return soplab::OcvCurve({{0.0, 3.0}, {0.1, 3.45}, {0.25, 3.6}, {0.9, 4.0}, {1.0, 4.2}});
}

struct Ref {
  double soc;
  double vp;
  double vt;
};

// Linear OCV v0 + slope*soc, no clamping.
inline Ref ref_step(Ref s, double current, double dt, double v0 = 3.0, double slope = 1.2,
                    double r0 = 0.05, double r1 = 0.03, double tau = 10.0, double cap = 2.0) {
  const double a = std::exp(-dt / tau);
  Ref n;
  n.vp = s.vp * a + current * r1 * (1.0 - a);
  n.soc = s.soc - dt * current / (3600.0 * cap);
  n.vt = v0 + slope * n.soc - n.vp - current * r0;
  return n;
}

inline std::vector<Ref> ref_cc(double soc, double vp, double current, int k, double dt = 1.0) {
  std::vector<Ref> out;
  Ref s{soc, vp, 0.0};
  for (int j = 0; j < k; ++j) out.push_back(s = ref_step(s, current, dt));
  return out;
}

}  // namespace fx
