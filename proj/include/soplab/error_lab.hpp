#pragma once

// Error propagation for the constant-current SOP closed forms.
//
// Each error source is modelled as true = biased + delta: the estimator runs
// on the biased quantity, the reference on the true one. All differences are
// reference minus estimate. Power is signed (charge power is negative), so
// the same expressions cover both directions.

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "soplab/ecm.hpp"
#include "soplab/soa.hpp"
#include "soplab/sop_analytic.hpp"

namespace soplab {

enum class ErrorSource {
  soc,       // SOC at the start of the window
  vp_relax,  // relaxation part of the end-of-window polarization voltage
  r_sum,     // R0 + effective R1, as one lump
  kappa,     // window OCV slope
  x          // eta / (3600 Ca), as one composite
};

std::string_view to_string(ErrorSource s);
std::optional<ErrorSource> parse_error_source(std::string_view text);
std::optional<Constraint> parse_constraint(std::string_view text);

// Unbiased inputs plus the reference estimate under each constraint.
struct TrueContext {
  BatteryState state;
  BatteryParams params;
  OcvCurve curve;
  double kappa = 0.0;
  Window window;
  Direction dir = Direction::discharge;
  Soa soa;
  WindowTerms terms;
  std::array<ConstraintEstimate, 3> reference{};  // indexed by Constraint

  const ConstraintEstimate& under(Constraint c) const {
    return reference[static_cast<std::size_t>(c)];
  }
};

TrueContext make_context(const BatteryState& state, const BatteryParams& params,
                         const OcvCurve& curve, double kappa, const Window& window, Direction dir,
                         const Soa& soa);

struct ErrorBreakdown {
  double delta_i = 0.0;
  double delta_vt = 0.0;
  double delta_sop = 0.0;
  // (a, b) of the SOC-error parabola or (alpha, beta) of the x-error form
  // under the SOC constraint.
  std::optional<std::pair<double, double>> coefficients;
  bool feasible = true;
};

// Closed-form errors. Throws DomainError when a biased denominator is not
// positive.
ErrorBreakdown analytic_error(ErrorSource source, double delta, const TrueContext& ctx,
                              Constraint constraint);

// Paired estimator runs: the per-constraint estimate with the biased input
// subtracted from the one with the true input.
ErrorBreakdown empirical_error(ErrorSource source, double delta, const TrueContext& ctx,
                               Constraint constraint);

// The biased window terms the estimator consumes.
WindowTerms biased_terms(ErrorSource source, double delta, const WindowTerms& truth);

struct SweepRow {
  double delta = 0.0;
  double analytic_dsop = 0.0;
  double empirical_dsop = 0.0;
  double residual = 0.0;  // analytic - empirical
  bool in_domain = true;
  ErrorBreakdown analytic;
  ErrorBreakdown empirical;
};

// Evaluates one grid point; out-of-domain or infeasible deltas come back
// flagged rather than thrown.
SweepRow sweep_row(ErrorSource source, double delta, const TrueContext& ctx,
                   Constraint constraint);

// Serial reference sweep. Throws InputError for an empty grid.
std::vector<SweepRow> sweep(ErrorSource source, std::span<const double> grid,
                            const TrueContext& ctx, Constraint constraint);

struct Parabola {
  double a = 0.0;  // quadratic coefficient
  double b = 0.0;  // linear coefficient
};

// Closed-form coefficients of dSOP = a d^2 + b d for a SOC error under the
// SOC constraint.
Parabola soc_error_parabola(const TrueContext& ctx);

// Least-squares fit of y = a d^2 + b d (no intercept) to the empirical column
// of in-domain rows.
Parabola fit_parabola(std::span<const SweepRow> rows);

}  // namespace soplab
