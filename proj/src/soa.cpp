#include "soplab/soa.hpp"

#include <cmath>

#include "soplab/errors.hpp"

namespace soplab {

void Soa::validate() const {
  const bool all_finite = std::isfinite(vt_min) && std::isfinite(vt_max) &&
                          std::isfinite(i_max_dis) && std::isfinite(i_max_chg) &&
                          std::isfinite(soc_min) && std::isfinite(soc_max);
  if (!all_finite) throw ConfigError("SOA limits must be finite");
  if (!(vt_min < vt_max)) throw ConfigError("SOA needs vt_min < vt_max");
  if (!(i_max_chg < 0.0 && 0.0 < i_max_dis))
    throw ConfigError("SOA needs i_max_chg < 0 < i_max_dis");
  if (!(0.0 <= soc_min && soc_min < soc_max && soc_max <= 1.0))
    throw ConfigError("SOA needs 0 <= soc_min < soc_max <= 1");
}

std::string_view to_string(Direction dir) {
  return dir == Direction::discharge ? "discharge" : "charge";
}

double current_limit(Direction dir, const Soa& soa) {
  return dir == Direction::discharge ? soa.i_max_dis : soa.i_max_chg;
}

double cutoff_voltage(Direction dir, const Soa& soa) {
  return dir == Direction::discharge ? soa.vt_min : soa.vt_max;
}

double soc_limit(Direction dir, const Soa& soa) {
  return dir == Direction::discharge ? soa.soc_min : soa.soc_max;
}

std::string_view to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::voltage_low: return "voltage_low";
    case ViolationKind::voltage_high: return "voltage_high";
    case ViolationKind::current_high_dis: return "current_high_dis";
    case ViolationKind::current_high_chg: return "current_high_chg";
    case ViolationKind::soc_low: return "soc_low";
    case ViolationKind::soc_high: return "soc_high";
  }
  return "unknown";
}

std::vector<Violation> check_point(double vt, double current, double soc, const Soa& soa,
                                   const SoaSlack& slack) {
  std::vector<Violation> out;
  auto flag = [&](ViolationKind kind, double excess, double allowance) {
    if (excess > allowance) out.push_back({kind, 0, excess});
  };
  flag(ViolationKind::voltage_low, soa.vt_min - vt, slack.volts);
  flag(ViolationKind::voltage_high, vt - soa.vt_max, slack.volts);
  // Current limits are signed: only discharge can exceed i_max_dis, only charge i_max_chg.
  if (current > 0.0) flag(ViolationKind::current_high_dis, current - soa.i_max_dis, slack.amps);
  if (current < 0.0) flag(ViolationKind::current_high_chg, soa.i_max_chg - current, slack.amps);
  flag(ViolationKind::soc_low, soa.soc_min - soc, slack.soc);
  flag(ViolationKind::soc_high, soc - soa.soc_max, slack.soc);
  return out;
}

std::vector<Violation> check_trace(std::span<const SoaSample> trace, const Soa& soa,
                                   const SoaSlack& slack) {
  std::vector<Violation> out;
  for (std::size_t j = 0; j < trace.size(); ++j) {
    for (auto v : check_point(trace[j].vt, trace[j].current, trace[j].soc, soa, slack)) {
      v.step_index = j;
      out.push_back(v);
    }
  }
  return out;
}

}  // namespace soplab
