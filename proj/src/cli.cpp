#include "soplab/cli.hpp"

#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "soplab/errors.hpp"
#include "soplab/error_lab.hpp"
#include "soplab/grid.hpp"
#include "soplab/io.hpp"
#include "soplab/pom.hpp"
#include "soplab/sop_analytic.hpp"

namespace soplab::cli {

namespace {

std::vector<std::string> split_list(const std::string& spec) {
  std::vector<std::string> out;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

}  // namespace

std::vector<double> parse_grid(const std::string& spec) {
  std::vector<double> out;
  if (spec.find_first_not_of(" \t") == std::string::npos) return out;
  if (spec.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
    if (parts.size() != 3) throw InputError("grid range must be start:stop:step, got '" + spec + "'");
    const double a = io::parse_number(parts[0], "grid start");
    const double b = io::parse_number(parts[1], "grid stop");
    const double h = io::parse_number(parts[2], "grid step");
    if (h == 0.0 || (b - a) * h < 0.0)
      throw InputError("grid step does not move from start to stop in '" + spec + "'");
    const auto n = static_cast<long>(std::floor((b - a) / h + 1e-9));
    if (n > 1000000) throw InputError("grid '" + spec + "' is too large");
    // Round to the report precision so 0.1:0.9:0.1 yields 0.3, not 0.30000000000000004.
    for (long i = 0; i <= n; ++i)
      out.push_back(io::parse_number(io::format_number(a + static_cast<double>(i) * h), "grid"));
    return out;
  }
  for (const auto& item : split_list(spec)) out.push_back(io::parse_number(item, "grid value"));
  return out;
}

std::vector<int> parse_int_grid(const std::string& spec) {
  std::vector<int> out;
  for (double v : parse_grid(spec)) {
    if (v != std::floor(v) || std::abs(v) > 1e9)
      throw InputError("expected an integer in grid '" + spec + "'");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

namespace {

struct Common {
  std::string params_path;
  std::string ocv_path;
  std::string soa_path;
  double soc = 0.5;
  double vp = 0.0;
  int steps = 30;
  double dt = 1.0;
  std::string dir = "discharge";
  std::string out_path;
};

void add_model_flags(CLI::App* cmd, Common& c, bool need_soa = true) {
  cmd->add_option("--params", c.params_path, "battery parameter file (key=value)")->required();
  cmd->add_option("--ocv", c.ocv_path, "OCV table (CSV soc,ocv_volts)")->required();
  auto* soa = cmd->add_option("--soa", c.soa_path, "safe operating area file (key=value)");
  if (need_soa) soa->required();
  cmd->add_option("--out", c.out_path, "write the report here instead of standard output");
}

void add_window_flags(CLI::App* cmd, Common& c) {
  cmd->add_option("--soc", c.soc, "initial SOC")->required();
  cmd->add_option("--vp", c.vp, "initial polarization voltage [V]")->capture_default_str();
  cmd->add_option("-K,--steps", c.steps, "window length in steps")->capture_default_str();
  cmd->add_option("--dt", c.dt, "sampling interval [s]")->capture_default_str();
  cmd->add_option("--dir", c.dir, "discharge or charge")
      ->check(CLI::IsMember({"discharge", "charge"}))
      ->capture_default_str();
}

Direction to_direction(const std::string& s) {
  return s == "charge" ? Direction::charge : Direction::discharge;
}

struct Model {
  BatteryParams params;
  OcvCurve curve = OcvCurve::linear(0.0, 0.0);
  std::optional<Soa> soa;
};

Model load(const Common& c) {
  Model m{io::read_params(c.params_path), io::read_ocv(c.ocv_path), std::nullopt};
  if (!c.soa_path.empty()) m.soa = io::read_soa(c.soa_path);
  return m;
}

void check_window(const Common& c) {
  if (!(c.soc >= 0.0 && c.soc <= 1.0)) throw InputError("--soc must lie in [0, 1]");
  if (!std::isfinite(c.vp)) throw InputError("--vp must be finite");
  if (c.steps < 1) throw InputError("--steps must be >= 1");
  if (!(c.dt > 0.0) || !std::isfinite(c.dt)) throw InputError("--dt must be > 0");
}

void emit(const io::Report& report, const Common& c, std::ostream& out) {
  if (c.out_path.empty()) {
    io::write_report(out, report);
    return;
  }
  std::ofstream f(c.out_path);
  if (!f) throw InputError("cannot write '" + c.out_path + "'");
  io::write_report(f, report);
}

std::string flag(bool b) { return b ? "1" : "0"; }

void add_trace(io::Report& report, const PomTrace& trace) {
  auto& s = report.add("trace", {"step", "current_a", "vt_v", "soc", "vp_v", "power_w"});
  for (const auto& p : trace.steps)
    s.add_row(std::vector<double>{static_cast<double>(p.index), p.current, p.vt, p.soc, p.vp, p.power});
}

// ---- sop ----

struct SopArgs {
  std::string mode = "cc";
  std::string eval = "end";
  double tol_watts = kDefaultCpTolWatts;
};

int cmd_sop(const Common& c, const SopArgs& a, std::ostream& out) {
  check_window(c);
  if (!(a.tol_watts > 0.0)) throw InputError("--tol must be > 0");
  const Model m = load(c);
  const BatteryState state{c.soc, c.vp};
  const Window window{c.steps, c.dt};
  const Direction dir = to_direction(c.dir);
  const Soa& soa = *m.soa;

  PomResult result{};
  bool stepwise = true;
  std::optional<ModeShift> shift;
  if (a.mode == "cc") {
    const auto eval = a.eval == "min" ? SopEvaluation::min_over_window : SopEvaluation::end_of_window;
    result.sop = sop_cc(state, m.params, m.curve, window, dir, soa, eval);
    stepwise = false;
  } else if (a.mode == "cv") {
    result = sop_cv(state, m.params, m.curve, window, dir, soa);
  } else if (a.mode == "cccv") {
    shift = find_mode_shift_kc(state, m.params, m.curve, window, dir, soa);
    result = sop_cccv(state, m.params, m.curve, window, dir, soa);
  } else {
    result = sop_cp(state, m.params, m.curve, window, dir, soa, a.tol_watts);
  }

  const SopResult& r = result.sop;
  io::Report report;
  auto& s = report.add("summary");
  s.add_field("mode", a.mode);
  s.add_field("direction", std::string(to_string(dir)));
  s.add_field("soc", c.soc);
  s.add_field("vp_v", c.vp);
  s.add_field("steps", static_cast<double>(c.steps));
  s.add_field("dt_s", c.dt);
  s.add_field("i_current_limit_a", r.i_current_limit);
  s.add_field("i_voltage_limit_a", r.i_voltage_limit);
  s.add_field("i_soc_limit_a", r.i_soc_limit);
  s.add_field("i_mc_a", r.i_mc);
  s.add_field("dominant", std::string(to_string(r.dominant)));
  s.add_field("vt_end_v", r.vt_end);
  s.add_field("sop_w", r.sop);
  s.add_field("feasible", flag(r.feasible));
  if (!r.feasible) s.add_field("status", "infeasible");
  if (!stepwise) s.add_field("kappa_v", r.kappa);
  if (shift) {
    s.add_field("cccv_case", std::string(to_string(shift->kind)));
    if (result.trace.mode_shift_index) s.add_field("mode_shift_step", static_cast<double>(*result.trace.mode_shift_index));
  }
  if (stepwise) add_trace(report, result.trace);
  emit(report, c, out);
  return r.feasible ? kExitOk : kExitFailure;
}

// ---- sweep-error ----

struct SweepArgs {
  std::string source;
  std::string constraint;
  std::string grid;
  std::optional<double> kappa;
};

int cmd_sweep_error(const Common& c, const SweepArgs& a, std::ostream& out) {
  check_window(c);
  const auto source = parse_error_source(a.source);
  if (!source) throw InputError("unknown error source '" + a.source + "'");
  const auto constraint = parse_constraint(a.constraint);
  if (!constraint) throw InputError("unknown constraint '" + a.constraint + "'");
  const auto deltas = parse_grid(a.grid);
  if (deltas.empty()) throw InputError("error sweep grid is empty");
  const Model m = load(c);
  const Direction dir = to_direction(c.dir);
  const double kappa = a.kappa.value_or(m.curve.segment_slope(c.soc, soc_travel(dir)));
  const auto ctx = make_context({c.soc, c.vp}, m.params, m.curve, kappa, {c.steps, c.dt}, dir, *m.soa);
  const auto rows = sweep_grid(*source, deltas, ctx, *constraint);

  io::Report report;
  auto& s = report.add("summary");
  s.add_field("source", std::string(to_string(*source)));
  s.add_field("constraint", std::string(to_string(*constraint)));
  s.add_field("direction", std::string(to_string(dir)));
  s.add_field("kappa_v", kappa);
  std::size_t outside = 0;
  double worst = 0.0;
  for (const auto& r : rows) {
    if (!r.in_domain) ++outside;
    else worst = std::max(worst, std::abs(r.residual));
  }
  s.add_field("rows", static_cast<double>(rows.size()));
  s.add_field("out_of_domain", static_cast<double>(outside));
  s.add_field("max_abs_residual_w", worst);
  if (*source == ErrorSource::soc && *constraint == Constraint::soc) {
    const auto closed = soc_error_parabola(ctx);
    s.add_field("parabola_a", closed.a);
    s.add_field("parabola_b", closed.b);
    if (rows.size() - outside >= 2) {
      const auto fit = fit_parabola(rows);
      s.add_field("fit_a", fit.a);
      s.add_field("fit_b", fit.b);
    }
  }
  auto& t = report.add("sweep", {"delta", "in_domain", "analytic_di_a", "empirical_di_a",
                                 "analytic_dvt_v", "empirical_dvt_v", "analytic_dsop_w",
                                 "empirical_dsop_w", "residual_w"});
  for (const auto& r : rows) {
    if (!r.in_domain) {
      t.add_row({io::format_number(r.delta), "0", "", "", "", "", "", "", ""});
      continue;
    }
    t.add_row({io::format_number(r.delta), "1", io::format_number(r.analytic.delta_i),
               io::format_number(r.empirical.delta_i), io::format_number(r.analytic.delta_vt),
               io::format_number(r.empirical.delta_vt), io::format_number(r.analytic_dsop),
               io::format_number(r.empirical_dsop), io::format_number(r.residual)});
  }
  emit(report, c, out);
  return kExitOk;
}

// ---- validate ----

struct ValidateArgs {
  std::string soc_grid = "0.1:0.9:0.1";
  std::string k_grid = "1,10,30,60";
  std::string dirs = "discharge,charge";
  double tol = 1e-6;
  double fault_r1 = 0.0;
};

int cmd_validate(const Common& c, const ValidateArgs& a, std::ostream& out) {
  if (!(c.dt > 0.0)) throw InputError("--dt must be > 0");
  if (!(a.tol > 0.0)) throw InputError("--tol must be > 0");
  const auto socs = parse_grid(a.soc_grid);
  const auto ks = parse_int_grid(a.k_grid);
  std::vector<Direction> dirs;
  for (const auto& d : split_list(a.dirs)) {
    if (d == "discharge") dirs.push_back(Direction::discharge);
    else if (d == "charge") dirs.push_back(Direction::charge);
    else throw InputError("unknown direction '" + d + "'");
  }
  for (double s : socs)
    if (!(s >= 0.0 && s <= 1.0)) throw InputError("grid SOC outside [0, 1]");
  for (int k : ks)
    if (k < 1) throw InputError("grid K must be >= 1");
  const auto grid = make_grid(socs, ks, dirs);
  if (grid.empty()) throw InputError("validation grid is empty");

  const Model m = load(c);
  ValidationSetup setup;
  setup.params = m.params;
  setup.analytic_params = m.params;
  setup.analytic_params.r1 *= 1.0 + a.fault_r1;
  setup.curve = m.curve;
  setup.soa = *m.soa;
  setup.vp = c.vp;
  setup.dt = c.dt;
  setup.tol_amps = a.tol;
  const auto summary = validate_grid(setup, grid);

  io::Report report;
  auto& s = report.add("summary");
  s.add_field("points", static_cast<double>(summary.records.size()));
  s.add_field("passed", static_cast<double>(summary.passed));
  s.add_field("max_residual_a", summary.max_residual);
  s.add_field("tol_a", a.tol);
  s.add_field("status", summary.all_pass() ? "pass" : "fail");
  auto& t = report.add("points", {"soc", "steps", "direction", "i_mc_a", "brute_a", "residual_a",
                                  "dominant", "pass"});
  for (const auto& r : summary.records)
    t.add_row({io::format_number(r.point.soc), std::to_string(r.point.steps),
               std::string(to_string(r.point.dir)), io::format_number(r.analytic.i_mc),
               io::format_number(r.brute), io::format_number(r.compare.residual),
               std::string(to_string(r.analytic.dominant)), flag(r.compare.pass)});
  emit(report, c, out);
  return summary.all_pass() ? kExitOk : kExitFailure;
}

// ---- simulate ----

int cmd_simulate(const Common& c, const std::string& profile_path, std::ostream& out) {
  if (!(c.soc >= 0.0 && c.soc <= 1.0)) throw InputError("--soc must lie in [0, 1]");
  const Model m = load(c);
  const auto profile = io::read_profile(profile_path);
  const auto trace = simulate_profile({c.soc, c.vp}, m.params, m.curve, profile);

  io::Report report;
  auto& s = report.add("summary");
  s.add_field("rows", static_cast<double>(trace.size()));
  auto& t = report.add("trace", {"t_s", "current_a", "soc", "vp_v", "vt_v", "soc_clamped", "violations"});
  std::size_t flagged = 0;
  for (const auto& p : trace) {
    std::string marks = "none";
    if (m.soa) {
      const auto v = check_point(p.vt, p.current, p.soc, *m.soa);
      if (!v.empty()) {
        ++flagged;
        marks.clear();
        for (const auto& x : v) marks += (marks.empty() ? "" : ";") + std::string(to_string(x.kind));
      }
    }
    t.add_row({io::format_number(p.t), io::format_number(p.current), io::format_number(p.soc),
               io::format_number(p.vp), io::format_number(p.vt), flag(p.soc_clamped), marks});
  }
  s.add_field("rows_with_violations", static_cast<double>(flagged));
  emit(report, c, out);
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Battery state-of-power estimation toolkit", "soptool"};
  app.require_subcommand(1);

  Common sop_c;
  SopArgs sop_a;
  auto* sop = app.add_subcommand("sop", "peak power over a prediction window");
  add_model_flags(sop, sop_c);
  add_window_flags(sop, sop_c);
  sop->add_option("--mode", sop_a.mode, "cc, cv, cccv or cp")
      ->check(CLI::IsMember({"cc", "cv", "cccv", "cp"}))
      ->capture_default_str();
  sop->add_option("--eval", sop_a.eval, "cc power evaluation: end (window end) or min (over window)")
      ->check(CLI::IsMember({"end", "min"}))
      ->capture_default_str();
  sop->add_option("--tol", sop_a.tol_watts, "cp bisection tolerance [W]")->capture_default_str();

  Common sw_c;
  SweepArgs sw_a;
  auto* sw = app.add_subcommand("sweep-error", "SOP error against a biased estimator input");
  add_model_flags(sw, sw_c);
  add_window_flags(sw, sw_c);
  sw->add_option("--source", sw_a.source, "soc, vp_relax, r_sum, kappa or x")->required();
  sw->add_option("--constraint", sw_a.constraint, "voltage, soc or current")->required();
  sw->add_option("--grid", sw_a.grid, "bias values: start:stop:step or v1,v2,...")->required();
  sw->add_option("--kappa", sw_a.kappa, "window OCV slope [V] (default: local slope at --soc)");

  Common va_c;
  ValidateArgs va_a;
  auto* va = app.add_subcommand("validate", "closed-form CC current against a brute-force oracle");
  add_model_flags(va, va_c);
  va->add_option("--vp", va_c.vp, "initial polarization voltage [V]")->capture_default_str();
  va->add_option("--dt", va_c.dt, "sampling interval [s]")->capture_default_str();
  va->add_option("--soc-grid", va_a.soc_grid, "SOC grid")->capture_default_str();
  va->add_option("--k-grid", va_a.k_grid, "window length grid")->capture_default_str();
  va->add_option("--dirs", va_a.dirs, "comma-separated directions")->capture_default_str();
  va->add_option("--tol", va_a.tol, "pass threshold on |I| [A]")->capture_default_str();
  va->add_option("--fault-r1", va_a.fault_r1,
                 "relative bias applied to R1 on the closed-form side only (fault injection)");

  Common si_c;
  std::string profile;
  auto* si = app.add_subcommand("simulate", "replay a current profile");
  add_model_flags(si, si_c, false);
  si->add_option("--profile", profile, "current profile (CSV t_s,current_a)")->required();
  si->add_option("--soc", si_c.soc, "initial SOC")->required();
  si->add_option("--vp", si_c.vp, "initial polarization voltage [V]")->capture_default_str();

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*sop) return cmd_sop(sop_c, sop_a, out);
    if (*sw) return cmd_sweep_error(sw_c, sw_a, out);
    if (*va) return cmd_validate(va_c, va_a, out);
    return cmd_simulate(si_c, profile, out);
  } catch (const InputError& e) {
    err << "soptool: error: " << e.what() << '\n';
  } catch (const ConfigError& e) {
    err << "soptool: error: " << e.what() << '\n';
  } catch (const DomainError& e) {
    err << "soptool: error: " << e.what() << '\n';
  }
  return kExitInput;
}

}  // namespace soplab::cli
