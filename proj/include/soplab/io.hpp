#pragma once

// File formats and report rendering.
//
//   params file   key=value lines: r0_ohm, r1_ohm, tau_s, capacity_ah, coulombic_eff
//   SOA file      key=value lines: vt_min, vt_max, i_max_dis, i_max_chg, soc_min, soc_max
//   OCV file      CSV with a header, columns soc,ocv_volts
//   profile file  CSV with a header, columns t_s,current_a
//
// Blank lines and lines starting with '#' are ignored in every format.
// Numbers use decimal notation with '.' and an optional exponent.

#include <deque>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "soplab/ecm.hpp"
#include "soplab/soa.hpp"

namespace soplab::io {

// Strict decimal parse; throws InputError naming `what` on failure.
double parse_number(std::string_view text, std::string_view what);

// 12 significant digits, shortest form.
std::string format_number(double v);

BatteryParams parse_params(std::istream& in, std::string_view source);
Soa parse_soa(std::istream& in, std::string_view source);
OcvCurve parse_ocv(std::istream& in, std::string_view source);
std::vector<ProfileSample> parse_profile(std::istream& in, std::string_view source);

// File variants; a missing or unreadable file raises InputError with the path.
BatteryParams read_params(const std::filesystem::path& path);
Soa read_soa(const std::filesystem::path& path);
OcvCurve read_ocv(const std::filesystem::path& path);
std::vector<ProfileSample> read_profile(const std::filesystem::path& path);

// A delimited report: named sections. Sections called "summary" or ending
// in "_summary" hold key,value rows; every other section is a table whose
// first row is the header.
//
//   [summary]
//   mode,cc
//   sop_w,28.9369744812
//   [trace]
//   step,current_a,vt_v,soc,vp_v,power_w
//   1,10,3.52301...
struct Section {
  std::string name;
  std::vector<std::string> columns;             // empty for key,value sections
  std::vector<std::vector<std::string>> rows;

  void add_field(std::string key, std::string value);
  void add_field(std::string key, double value);
  void add_row(std::vector<std::string> cells);
  void add_row(const std::vector<double>& values);

  // Value of a key,value field; throws InputError when absent.
  const std::string& field(std::string_view key) const;
  double number(std::string_view key) const;
  std::size_t column(std::string_view name) const;
};

struct Report {
  std::deque<Section> sections;  // add() hands out references

  Section& add(std::string name, std::vector<std::string> columns = {});
  const Section& section(std::string_view name) const;
  bool has(std::string_view name) const;
};

void write_report(std::ostream& out, const Report& report);
Report parse_report(std::istream& in);

}  // namespace soplab::io
