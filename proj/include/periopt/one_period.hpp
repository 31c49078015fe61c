#pragma once

#include <optional>

#include "periopt/dual_control.hpp"
#include "periopt/sde.hpp"
#include "periopt/stats.hpp"
#include "periopt/utility.hpp"

namespace periopt {

// Tuning for the one-period primal/dual solvers. Control and policy knots are
// coarse by design: they make the infimum attainable in a compact box and can
// be refined via the CLI --refine flag.
struct OnePeriodConfig {
  SimulationConfig sim;
  std::uint64_t stream = 0;  // substream salt for the bundle draws
  int eta_time_knots = 4;
  int eta_factor_knots = 9;
  double eta_max = 5.0;
  double lambda_tol = 1e-8;
  int max_sweeps = 8;
  double improve_tol = 1e-4;
  double eta_step0 = 0.25;
  double step_min = 1e-3;
  int policy_time_knots = 2;
  int policy_factor_knots = 5;
  double pi_max = 20.0;
  double pi_step0 = 0.5;
  bool certify_primal = false;
  // factor-knot span for controls/policies; when lo >= hi a span is derived
  // from the simulated factor range
  double y_span_lo = 1.0;
  double y_span_hi = -1.0;
};

struct OnePeriodSolution {
  double lambda_star = 1.0;
  DualControl eta_star;
  McStat dual_value;    // inf-side certificate L(eta*, lambda*) + lambda*
  McStat primal_value;  // policy-search lower bound (when certified)
  double budget_residual = 0.0;  // E[X* Z/B] - 1 on the sample
  double gap = 0.0;              // dual - primal
  bool certified = false;
  bool has_primal = false;
  bool eta_on_boundary = false;
  int sweeps = 0;
  FeedbackPolicy primal_policy;
};

// E[Phi_{h_A}(lambda Z^eta_tau / B_tau, Y_tau)] on the bundle's paths.
McStat dual_value(const MarketModel& model, const UtilitySpec& spec,
                  const GridFunction& A, const DualControl& eta, double lambda,
                  const PathBundle& bundle);

// Budget-binding multiplier: solves E[x*(lambda Z/B, Y) Z/B] = x0 to
// |residual| <= lambda_tol. Monotone in lambda; bracket expansion plus
// safeguarded Newton. Throws std::runtime_error if no bracket is found.
double solve_lambda(const MarketModel& model, const UtilitySpec& spec,
                    const GridFunction& A, const DualControl& eta,
                    const PathBundle& bundle, double x0 = 1.0,
                    double lambda_tol = 1e-8);

// Full dual solve at factor start y0: inner budget-binding lambda, outer
// derivative-free coordinate descent over the control knots on common random
// numbers. Log kind returns eta* = 0, lambda* = 1/x0 without search. When
// cfg.certify_primal is set a policy search fills the primal side and the
// duality gap.
OnePeriodSolution solve_dual(const MarketModel& model, const UtilitySpec& spec,
                             const GridFunction& A, double y0,
                             const OnePeriodConfig& cfg, double x0 = 1.0);

// E[h_A(X_tau, Y_tau)] under the policy (power), or E[log X_tau] (log),
// with x0 = 1 normalization.
McStat primal_value(const MarketModel& model, const UtilitySpec& spec,
                    const GridFunction& A, const FeedbackPolicy& policy,
                    const PathBundle& bundle);

// Per-path values behind primal_value; supports paired comparisons of two
// policies on common random numbers.
std::vector<double> primal_objective_paths(const MarketModel& model,
                                           const UtilitySpec& spec,
                                           const GridFunction& A,
                                           const FeedbackPolicy& policy,
                                           const PathBundle& bundle);

struct PrimalSolution {
  FeedbackPolicy policy;
  McStat value;
  int sweeps = 0;
  double final_step = 0.0;
};

// Derivative-free ascent over tabulated policy knots on common random
// numbers, seeded at the Merton-type policy unless an explicit start is
// given.
PrimalSolution solve_primal(const MarketModel& model, const UtilitySpec& spec,
                            const GridFunction& A, double y0,
                            const OnePeriodConfig& cfg,
                            const std::optional<FeedbackPolicy>& start = {});

struct GapReport {
  double gap = 0.0;          // dual - primal
  double combined_se = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

GapReport duality_gap(const McStat& primal, const McStat& dual,
                      double tolerance);

// Gauss-Hermite value of E[Phi_{h_A}(lambda e^{-r tau} e^G, .)] where
// G = log Z^0_tau is exactly Gaussian for constant mu, sigma. Requires
// constant price coefficients; h and A enter as constants.
double quadrature_oracle_constant(const MarketModel& model,
                                  const UtilitySpec& spec, double A_const,
                                  double lambda, int nodes = 64);

struct QuadOnePeriod {
  double lambda_star = 1.0;
  double dual_value = 0.0;  // L(0, lambda*) + lambda*
};

// Deterministic one-period solve for constant-coefficient models: budget-
// binding lambda and the no-gap value, both by quadrature.
QuadOnePeriod quadrature_solve_constant(const MarketModel& model,
                                        const UtilitySpec& spec, double h_const,
                                        double A_const, int nodes = 64);

// log x0 + r tau + 1/2 E[int_0^tau theta^2(Y_s) ds], time-discretized along
// the factor paths. Exact (zero variance) for constant theta.
McStat log_one_period_value(const MarketModel& model, double x0,
                            const PathBundle& bundle);

// Artificial-market dual integrand for alpha < 0:
// E[-h_A(z B_tau E^{W1}(nu) / (lambda E^{W1}(-theta)), Y_tau)].
McStat artificial_dual_value(const MarketModel& model, const UtilitySpec& spec,
                             const GridFunction& A, const DualControl& nu,
                             double z, double lambda, const PathBundle& bundle);

}  // namespace periopt
