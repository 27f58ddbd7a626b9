#include "soplab/error_lab.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "soplab/errors.hpp"

namespace soplab {

std::string_view to_string(ErrorSource s) {
  switch (s) {
    case ErrorSource::soc: return "soc";
    case ErrorSource::vp_relax: return "vp_relax";
    case ErrorSource::r_sum: return "r_sum";
    case ErrorSource::kappa: return "kappa";
    case ErrorSource::x: return "x";
  }
  return "unknown";
}

std::optional<ErrorSource> parse_error_source(std::string_view text) {
  for (auto s : {ErrorSource::soc, ErrorSource::vp_relax, ErrorSource::r_sum, ErrorSource::kappa,
                 ErrorSource::x}) {
    if (text == to_string(s)) return s;
  }
  return std::nullopt;
}

std::optional<Constraint> parse_constraint(std::string_view text) {
  for (auto c : {Constraint::voltage, Constraint::soc, Constraint::current}) {
    if (text == to_string(c)) return c;
  }
  return std::nullopt;
}

TrueContext make_context(const BatteryState& state, const BatteryParams& params,
                         const OcvCurve& curve, double kappa, const Window& window, Direction dir,
                         const Soa& soa) {
  params.validate();
  soa.validate();
  window.validate();
  TrueContext ctx{state, params, curve, kappa, window, dir, soa,
                  window_terms(state, params, kappa, window), {}};
  for (auto c : {Constraint::voltage, Constraint::soc, Constraint::current})
    ctx.reference[static_cast<std::size_t>(c)] = estimate_under(c, ctx.terms, curve, dir, soa);
  return ctx;
}

WindowTerms biased_terms(ErrorSource source, double delta, const WindowTerms& truth) {
  WindowTerms t = truth;
  switch (source) {
    case ErrorSource::soc: t.soc -= delta; break;
    case ErrorSource::vp_relax: t.vp_relax -= delta; break;
    case ErrorSource::r_sum: t.r_sum -= delta; break;
    case ErrorSource::kappa: t.kappa -= delta; break;
    case ErrorSource::x: t.x -= delta; break;
  }
  return t;
}

namespace {

void require_positive(double den, const char* what) {
  if (!(den > 0.0))
    throw DomainError(std::string(what) + " denominator must stay positive (got " +
                      std::to_string(den) + ")");
}

}  // namespace

ErrorBreakdown analytic_error(ErrorSource source, double delta, const TrueContext& ctx,
                              Constraint constraint) {
  const WindowTerms& t = ctx.terms;
  const double f = ctx.curve(t.soc);
  const double bound = soc_limit(ctx.dir, ctx.soa);
  const double f_bound = ctx.curve(bound);
  const double cutoff = cutoff_voltage(ctx.dir, ctx.soa);
  const double duration = t.window.duration();  // K dt
  const double per_amp = t.soc_per_amp();       // x K dt
  const double den = t.denominator();           // x K dt kappa + R_sum
  const double headroom = t.soc - bound;
  const double i_cur = current_limit(ctx.dir, ctx.soa);
  const double i_volt = (f - t.vp_relax - cutoff) / den;
  const double i_soc = headroom / per_amp;

  ErrorBreakdown e;
  switch (source) {
    case ErrorSource::soc:
      switch (constraint) {
        case Constraint::current:
          e.delta_vt = t.kappa * delta;
          e.delta_sop = t.kappa * i_cur * delta;
          break;
        case Constraint::voltage:
          e.delta_i = t.kappa * delta / den;
          e.delta_sop = t.kappa * cutoff * delta / den;
          break;
        case Constraint::soc: {
          const double a = t.r_sum / (per_amp * per_amp);
          const double b = (f_bound - t.vp_relax) / per_amp -
                           2.0 * headroom * t.r_sum / (per_amp * per_amp);
          e.delta_i = delta / per_amp;
          e.delta_vt = -e.delta_i * t.r_sum;
          e.delta_sop = a * delta * delta + b * delta;
          e.coefficients = {a, b};
          break;
        }
      }
      break;

    // Signs below follow true - estimate with the estimator seeing
    // vp_relax - delta, so the end voltage error is -delta under every
    // constraint that predicts it.
    case ErrorSource::vp_relax:
      switch (constraint) {
        case Constraint::current:
          e.delta_vt = -delta;
          e.delta_sop = -i_cur * delta;
          break;
        case Constraint::voltage:
          e.delta_i = -delta / den;
          e.delta_sop = -cutoff * delta / den;
          break;
        case Constraint::soc:
          e.delta_vt = -delta;
          e.delta_sop = -i_soc * delta;
          break;
      }
      break;

    case ErrorSource::r_sum:
      switch (constraint) {
        case Constraint::current:
          e.delta_vt = -i_cur * delta;
          e.delta_sop = -i_cur * i_cur * delta;
          break;
        case Constraint::voltage: {
          require_positive(den - delta, "biased resistance");
          const double rel = -delta / (den - delta);
          e.delta_i = i_volt * rel;
          e.delta_sop = i_volt * (-cutoff * delta) / (den - delta);
          break;
        }
        case Constraint::soc:
          e.delta_vt = -i_soc * delta;
          e.delta_sop = -i_soc * i_soc * delta;
          break;
      }
      break;

    case ErrorSource::kappa:
      switch (constraint) {
        case Constraint::current:
          e.delta_vt = -i_cur * per_amp * delta;
          e.delta_sop = -i_cur * i_cur * per_amp * delta;
          break;
        case Constraint::voltage: {
          const double biased = per_amp * (t.kappa - delta) + t.r_sum;
          require_positive(biased, "biased slope");
          e.delta_i = i_volt * (-per_amp * delta) / biased;
          e.delta_sop = i_volt * (-cutoff * per_amp * delta) / biased;
          break;
        }
        case Constraint::soc:
          // The slope enters through the OCV drop kappa * (soc - bound).
          e.delta_vt = -delta * headroom;
          e.delta_sop = -(headroom * headroom / per_amp) * delta;
          break;
      }
      break;

    case ErrorSource::x:
      switch (constraint) {
        case Constraint::current:
          e.delta_vt = -i_cur * duration * t.kappa * delta;
          e.delta_sop = -i_cur * i_cur * duration * t.kappa * delta;
          break;
        case Constraint::voltage: {
          const double biased = duration * t.kappa * (t.x - delta) + t.r_sum;
          require_positive(biased, "biased charge gain");
          e.delta_i = i_volt * (-duration * t.kappa * delta) / biased;
          e.delta_sop = (f - t.vp_relax - cutoff) / (duration * t.kappa * t.x + t.r_sum) *
                        (-cutoff * duration * t.kappa * delta) / biased;
          break;
        }
        case Constraint::soc: {
          const double x = t.x;
          require_positive(x - delta, "biased charge gain");
          const double alpha = -headroom * (f_bound - t.vp_relax) / duration;
          const double beta = (headroom / duration) * (headroom / duration) * t.r_sum;
          e.delta_i = i_soc * (-delta / (x - delta));
          e.delta_vt = -e.delta_i * t.r_sum;
          e.delta_sop = alpha * delta / (x * (x - delta)) +
                        beta * (2.0 * x * delta - delta * delta) /
                            (x * x * (x - delta) * (x - delta));
          e.coefficients = {alpha, beta};
          break;
        }
      }
      break;
  }
  return e;
}

ErrorBreakdown empirical_error(ErrorSource source, double delta, const TrueContext& ctx,
                               Constraint constraint) {
  const WindowTerms biased = biased_terms(source, delta, ctx.terms);
  const ConstraintEstimate& truth = ctx.under(constraint);
  const ConstraintEstimate est = estimate_under(constraint, biased, ctx.curve, ctx.dir, ctx.soa);
  ErrorBreakdown e;
  e.feasible = truth.feasible && est.feasible;
  e.delta_i = truth.current - est.current;
  e.delta_vt = truth.vt_end - est.vt_end;
  e.delta_sop = truth.power - est.power;
  return e;
}

SweepRow sweep_row(ErrorSource source, double delta, const TrueContext& ctx,
                   Constraint constraint) {
  SweepRow row;
  row.delta = delta;
  try {
    row.analytic = analytic_error(source, delta, ctx, constraint);
    row.empirical = empirical_error(source, delta, ctx, constraint);
  } catch (const DomainError&) {
    row.in_domain = false;
    return row;
  }
  row.in_domain = row.empirical.feasible;
  row.analytic_dsop = row.analytic.delta_sop;
  row.empirical_dsop = row.empirical.delta_sop;
  row.residual = row.analytic_dsop - row.empirical_dsop;
  return row;
}

std::vector<SweepRow> sweep(ErrorSource source, std::span<const double> grid,
                            const TrueContext& ctx, Constraint constraint) {
  if (grid.empty()) throw InputError("error sweep grid is empty");
  std::vector<SweepRow> rows;
  rows.reserve(grid.size());
  for (double d : grid) rows.push_back(sweep_row(source, d, ctx, constraint));
  return rows;
}

Parabola soc_error_parabola(const TrueContext& ctx) {
  const auto e = analytic_error(ErrorSource::soc, 0.0, ctx, Constraint::soc);
  return {e.coefficients->first, e.coefficients->second};
}

Parabola fit_parabola(std::span<const SweepRow> rows) {
  std::vector<const SweepRow*> used;
  for (const auto& r : rows)
    if (r.in_domain) used.push_back(&r);
  if (used.size() < 2) throw InputError("parabola fit needs at least two in-domain rows");
  Eigen::MatrixXd design(static_cast<Eigen::Index>(used.size()), 2);
  Eigen::VectorXd y(static_cast<Eigen::Index>(used.size()));
  for (std::size_t i = 0; i < used.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    design(k, 0) = used[i]->delta * used[i]->delta;
    design(k, 1) = used[i]->delta;
    y(k) = used[i]->empirical_dsop;
  }
  const Eigen::Vector2d coef = design.colPivHouseholderQr().solve(y);
  return {coef(0), coef(1)};
}

}  // namespace soplab
