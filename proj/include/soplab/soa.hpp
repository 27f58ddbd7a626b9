#pragma once

// Safe operating area: terminal voltage, current and SOC limits that must
// hold at every step of a prediction window. Bounds are inclusive.

#include <span>
#include <string_view>
#include <vector>

namespace soplab {

struct Soa {
  double vt_min = 0.0;
  double vt_max = 0.0;
  double i_max_dis = 0.0;  // > 0
  double i_max_chg = 0.0;  // < 0
  double soc_min = 0.0;
  double soc_max = 1.0;

  void validate() const;
};

enum class Direction { discharge, charge };

std::string_view to_string(Direction dir);

// +1 for discharge, -1 for charge.
inline int sign(Direction dir) { return dir == Direction::discharge ? +1 : -1; }

// SOC travel direction while the window current flows.
inline int soc_travel(Direction dir) { return -sign(dir); }

double current_limit(Direction dir, const Soa& soa);
double cutoff_voltage(Direction dir, const Soa& soa);
double soc_limit(Direction dir, const Soa& soa);

enum class ViolationKind { voltage_low, voltage_high, current_high_dis, current_high_chg, soc_low, soc_high };

std::string_view to_string(ViolationKind kind);

struct Violation {
  ViolationKind kind;
  std::size_t step_index = 0;
  double magnitude = 0.0;  // excess beyond the bound, native units
};

// Any per-step record that exposes vt, current and soc.
struct SoaSample {
  double vt = 0.0;
  double current = 0.0;
  double soc = 0.0;
};

// Excess below which a sample still counts as compliant. The default is an
// exact check; callers comparing against closed-form boundaries pass a
// round-off allowance.
struct SoaSlack {
  double volts = 0.0;
  double amps = 0.0;
  double soc = 0.0;
};

std::vector<Violation> check_point(double vt, double current, double soc, const Soa& soa,
                                   const SoaSlack& slack = {});

std::vector<Violation> check_trace(std::span<const SoaSample> trace, const Soa& soa,
                                   const SoaSlack& slack = {});

template <class Range, class Proj>
std::vector<Violation> check_trace(const Range& steps, Proj to_sample, const Soa& soa,
                                   const SoaSlack& slack = {}) {
  std::vector<SoaSample> samples;
  for (const auto& s : steps) samples.push_back(to_sample(s));
  return check_trace(samples, soa, slack);
}

}  // namespace soplab
