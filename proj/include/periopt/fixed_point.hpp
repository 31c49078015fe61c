#pragma once

#include <optional>
#include <string>
#include <vector>

#include "periopt/one_period.hpp"

namespace periopt {

enum class InnerEngine { Auto, MonteCarlo, Quadrature };

struct FixedPointConfig {
  std::vector<double> y_grid;
  double tol = 1e-4;
  int max_iter = 500;
  OnePeriodConfig solver;
  InnerEngine engine = InnerEngine::Auto;
  double gap_tol_rel = 1e-2;  // per-point certification threshold (power MC)
  int quad_nodes = 64;
};

struct PsiResult {
  GridFunction value;
  std::vector<double> se;
  std::vector<double> gap;       // NaN when no primal was run
  std::vector<double> lambda;    // budget-binding multiplier per grid point
  int clamped_negative = 0;
  bool certified = true;
};

// One application of the power operator: for each grid y,
// alpha e^{-delta tau} times the certified one-period value.
PsiResult apply_Psi_power(const GridFunction& A, const MarketModel& model,
                          const UtilitySpec& spec, const FixedPointConfig& cfg,
                          std::uint64_t iteration = 0);

// Log operator: first term (1-gamma e^{-delta tau})/(e^{delta tau}-1) times
// the one-period log value, second term e^{-delta tau} E[h(Y_tau)+A(Y_tau)].
PsiResult apply_Psi_log(const GridFunction& A, const MarketModel& model,
                        const UtilitySpec& spec, const FixedPointConfig& cfg,
                        std::uint64_t iteration = 0);

struct FixedPointResult {
  GridFunction A_star;
  std::vector<double> se;
  int iterations = 0;
  bool converged = false;
  bool certified = false;
  bool stopped_at_noise_floor = false;
  double final_step = 0.0;
  double theoretical_q = 0.0;
  std::vector<double> contraction_ratios;
  double C_star = 0.0;  // log kind
  std::string engine;   // "mc" or "quadrature"
  std::vector<double> lambda;  // per grid point, final iteration (power)
  int clamped_negative = 0;
};

// Theoretical sup-norm contraction factor of Psi:
// power e^{-(delta - zeta(alpha(1-gamma))) tau}, log e^{-delta tau}.
double contraction_factor(const MarketModel& model, const UtilitySpec& spec);

// Banach-Picard iteration A_{n+1} = Psi(A_n) until the sup-norm step is at
// most tol (1-q)/q. A0 defaults to the lower-bound constant of the fixed
// point interval.
FixedPointResult iterate_to_fixed_point(const MarketModel& model,
                                        const UtilitySpec& spec,
                                        const FixedPointConfig& cfg,
                                        const std::optional<GridFunction>& A0 = {});

struct BoundReport {
  double lower = 0.0;
  double upper = 0.0;
  bool pass = false;
  double min_margin_lower = 0.0;  // min over grid of A*(y) - lower
  double min_margin_upper = 0.0;  // min over grid of upper - A*(y)
};

BoundReport check_bounds_power(const FixedPointResult& result,
                               const MarketModel& model,
                               const UtilitySpec& spec);
BoundReport check_bounds_log(const FixedPointResult& result,
                             const MarketModel& model, const UtilitySpec& spec);

// Fixed-point interval endpoints (used by the checks and for A0 seeding).
void fixed_point_interval_power(const MarketModel& model,
                                const UtilitySpec& spec, double& lower,
                                double& upper);
void fixed_point_interval_log(const MarketModel& model, const UtilitySpec& spec,
                              double& lower, double& upper);

double C_star(double gamma, double delta, double tau);

// V(x,y): power (1/alpha) A*(y) x^{alpha(1-gamma)}; log A*(y) + C* log x.
double value_function(const FixedPointResult& result, const UtilitySpec& spec,
                      double x, double y);

struct ValueBoundsReport {
  double lower = 0.0;
  double upper = 0.0;
  double value = 0.0;
  bool pass = false;
};

// Two-sided value-function envelope at (x, y) from the model constants.
ValueBoundsReport value_bounds_check(const MarketModel& model,
                                     const UtilitySpec& spec, double x,
                                     double y, double V);

}  // namespace periopt
