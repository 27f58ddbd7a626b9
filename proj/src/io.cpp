#include "soplab/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "soplab/errors.hpp"

namespace soplab::io {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool skippable(std::string_view line) {
  line = trim(line);
  return line.empty() || line.front() == '#';
}

std::vector<std::string> split(std::string_view line, char delim) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delim, start);
    out.emplace_back(trim(line.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string where(std::string_view source, int line) {
  return std::string(source) + ":" + std::to_string(line);
}

using KeyValues = std::map<std::string, double, std::less<>>;

KeyValues parse_key_values(std::istream& in, std::string_view source,
                           std::span<const std::string_view> keys) {
  KeyValues values;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (skippable(line)) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InputError(where(source, n) + ": expected key=value, got '" + line + "'");
    const std::string key(trim(std::string_view(line).substr(0, eq)));
    if (std::find(keys.begin(), keys.end(), key) == keys.end())
      throw InputError(where(source, n) + ": unknown key '" + key + "'");
    if (values.count(key)) throw InputError(where(source, n) + ": duplicate key '" + key + "'");
    values[key] = parse_number(trim(std::string_view(line).substr(eq + 1)), where(source, n) + " " + key);
  }
  for (auto k : keys)
    if (!values.count(k)) throw InputError(std::string(source) + ": missing key '" + std::string(k) + "'");
  return values;
}

// Two-column numeric CSV with a mandatory header naming the columns.
std::vector<std::pair<double, double>> parse_two_columns(std::istream& in, std::string_view source,
                                                         std::string_view col_a,
                                                         std::string_view col_b) {
  std::vector<std::pair<double, double>> rows;
  std::string line;
  int n = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++n;
    if (skippable(line)) continue;
    const auto cells = split(line, ',');
    if (!header) {
      if (cells.size() != 2 || cells[0] != col_a || cells[1] != col_b)
        throw InputError(where(source, n) + ": expected header '" + std::string(col_a) + "," +
                         std::string(col_b) + "'");
      header = true;
      continue;
    }
    if (cells.size() != 2)
      throw InputError(where(source, n) + ": expected 2 columns, got " + std::to_string(cells.size()));
    rows.emplace_back(parse_number(cells[0], where(source, n) + " " + std::string(col_a)),
                      parse_number(cells[1], where(source, n) + " " + std::string(col_b)));
  }
  if (!header) throw InputError(std::string(source) + ": empty file");
  return rows;
}

template <class Parse>
auto read_file(const std::filesystem::path& path, Parse parse) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  return parse(in, path.string());
}

}  // namespace

double parse_number(std::string_view text, std::string_view what) {
  text = trim(text);
  const bool allowed = !text.empty() && std::all_of(text.begin(), text.end(), [](char c) {
    return (c >= '0' && c <= '9') || c == '.' || c == '-' || c == '+' || c == 'e' || c == 'E';
  });
  double v = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  if (allowed && text.front() == '+') ++begin;
  const auto res = allowed ? std::from_chars(begin, end, v) : std::from_chars_result{begin, std::errc::invalid_argument};
  if (!allowed || res.ec != std::errc() || res.ptr != end || !std::isfinite(v))
    throw InputError(std::string(what) + ": not a number '" + std::string(text) + "'");
  return v;
}

std::string format_number(double v) {
  if (v == 0.0) return "0";  // folds -0
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

BatteryParams parse_params(std::istream& in, std::string_view source) {
  static constexpr std::string_view keys[] = {"r0_ohm", "r1_ohm", "tau_s", "capacity_ah",
                                              "coulombic_eff"};
  const auto kv = parse_key_values(in, source, keys);
  BatteryParams p;
  p.r0 = kv.find("r0_ohm")->second;
  p.r1 = kv.find("r1_ohm")->second;
  p.tau = kv.find("tau_s")->second;
  p.capacity_ah = kv.find("capacity_ah")->second;
  p.coulombic_eff = kv.find("coulombic_eff")->second;
  try {
    p.validate();
  } catch (const ConfigError& e) {
    throw InputError(std::string(source) + ": " + e.what());
  }
  return p;
}

Soa parse_soa(std::istream& in, std::string_view source) {
  static constexpr std::string_view keys[] = {"vt_min",    "vt_max",  "i_max_dis",
                                              "i_max_chg", "soc_min", "soc_max"};
  const auto kv = parse_key_values(in, source, keys);
  Soa s;
  s.vt_min = kv.find("vt_min")->second;
  s.vt_max = kv.find("vt_max")->second;
  s.i_max_dis = kv.find("i_max_dis")->second;
  s.i_max_chg = kv.find("i_max_chg")->second;
  s.soc_min = kv.find("soc_min")->second;
  s.soc_max = kv.find("soc_max")->second;
  try {
    s.validate();
  } catch (const ConfigError& e) {
    throw InputError(std::string(source) + ": " + e.what());
  }
  return s;
}

OcvCurve parse_ocv(std::istream& in, std::string_view source) {
  std::vector<OcvCurve::Point> pts;
  for (auto [soc, v] : parse_two_columns(in, source, "soc", "ocv_volts")) pts.push_back({soc, v});
  try {
    return OcvCurve(std::move(pts));
  } catch (const ConfigError& e) {
    throw InputError(std::string(source) + ": " + e.what());
  }
}

std::vector<ProfileSample> parse_profile(std::istream& in, std::string_view source) {
  std::vector<ProfileSample> out;
  for (auto [t, i] : parse_two_columns(in, source, "t_s", "current_a")) out.push_back({t, i});
  if (out.empty()) throw InputError(std::string(source) + ": profile has no samples");
  for (std::size_t k = 1; k < out.size(); ++k)
    if (!(out[k].t > out[k - 1].t))
      throw InputError(std::string(source) + ": times must increase strictly (row " +
                       std::to_string(k + 1) + ")");
  return out;
}

BatteryParams read_params(const std::filesystem::path& path) { return read_file(path, parse_params); }
Soa read_soa(const std::filesystem::path& path) { return read_file(path, parse_soa); }
OcvCurve read_ocv(const std::filesystem::path& path) { return read_file(path, parse_ocv); }
std::vector<ProfileSample> read_profile(const std::filesystem::path& path) {
  return read_file(path, parse_profile);
}

void Section::add_field(std::string key, std::string value) {
  rows.push_back({std::move(key), std::move(value)});
}

void Section::add_field(std::string key, double value) {
  add_field(std::move(key), format_number(value));
}

void Section::add_row(std::vector<std::string> cells) { rows.push_back(std::move(cells)); }

void Section::add_row(const std::vector<double>& values) {
  std::vector<std::string> cells;
  cells.reserve(values.size());
  for (double v : values) cells.push_back(format_number(v));
  rows.push_back(std::move(cells));
}

const std::string& Section::field(std::string_view key) const {
  for (const auto& r : rows)
    if (r.size() == 2 && r[0] == key) return r[1];
  throw InputError("report section [" + name + "] has no field '" + std::string(key) + "'");
}

double Section::number(std::string_view key) const { return parse_number(field(key), key); }

std::size_t Section::column(std::string_view col) const {
  const auto it = std::find(columns.begin(), columns.end(), col);
  if (it == columns.end())
    throw InputError("report section [" + name + "] has no column '" + std::string(col) + "'");
  return static_cast<std::size_t>(it - columns.begin());
}

Section& Report::add(std::string name, std::vector<std::string> columns) {
  sections.push_back({std::move(name), std::move(columns), {}});
  return sections.back();
}

const Section& Report::section(std::string_view name) const {
  for (const auto& s : sections)
    if (s.name == name) return s;
  throw InputError("report has no section [" + std::string(name) + "]");
}

bool Report::has(std::string_view name) const {
  return std::any_of(sections.begin(), sections.end(), [&](const Section& s) { return s.name == name; });
}

namespace {

void write_cells(std::ostream& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
  out << '\n';
}

}  // namespace

void write_report(std::ostream& out, const Report& report) {
  for (const auto& s : report.sections) {
    out << '[' << s.name << "]\n";
    if (!s.columns.empty()) write_cells(out, s.columns);
    for (const auto& r : s.rows) write_cells(out, r);
  }
}

// Sections named "summary" or "*_summary" hold key,value rows; any other
// section starts with a header row.
Report parse_report(std::istream& in) {
  Report report;
  std::string line;
  Section* current = nullptr;
  bool want_header = false;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    const auto t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']') throw InputError("report line " + std::to_string(n) + ": bad section title");
      const std::string name(t.substr(1, t.size() - 2));
      current = &report.add(name);
      want_header = !(name == "summary" || name.ends_with("_summary"));
      continue;
    }
    if (!current) throw InputError("report line " + std::to_string(n) + ": data before any section");
    auto cells = split(t, ',');
    if (want_header) {
      current->columns = std::move(cells);
      want_header = false;
      continue;
    }
    if (!current->columns.empty() && cells.size() != current->columns.size())
      throw InputError("report line " + std::to_string(n) + ": expected " +
                       std::to_string(current->columns.size()) + " cells");
    current->rows.push_back(std::move(cells));
  }
  return report;
}

}  // namespace soplab::io
