#pragma once

#include "periopt/grid_function.hpp"

namespace periopt {

enum class UtilityKind { Power, Log };

// Preference block: power utility (1/alpha) x^alpha h(y) with
// alpha in (-inf,0) u (0,1), or log utility log x + h(y). gamma in (0,1]
// weights the previous-period benchmark, delta > 0 discounts, tau > 0 is the
// evaluation period. h is tabulated with values in [m, 1], m in (0,1).
struct UtilitySpec {
  UtilityKind kind = UtilityKind::Power;
  double alpha = 0.5;
  double gamma = 1.0;
  double delta = 0.1;
  double tau = 1.0;
  GridFunction h;
  double m = 0.5;

  void validate() const;  // throws std::invalid_argument on range violations
  bool is_power() const { return kind == UtilityKind::Power; }
};

// Scalar parameters of the modified utility at a fixed factor level:
//   h_A(x) = (1/alpha) x^alpha h + (1/alpha) A x^{alpha(1-gamma)}.
// All kernel math is routed through this struct so the hot Monte Carlo loops
// evaluate h(y), A(y) once per sample.
struct ModifiedUtility {
  double alpha;
  double gamma;
  double h;  // h(y) in [m,1]
  double A;  // A(y) >= 0

  double value(double x) const;            // h_A(x), x > 0
  double marginal(double x) const;         // d/dx h_A, strictly decreasing
  double marginal_derivative(double x) const;  // d2/dx2 h_A, < 0
  // Inverse of the marginal: x with marginal(x) = u, u > 0. Bracketed from
  // the single-term closed-form seeds, then safeguarded Newton in log space;
  // relative tolerance 1e-12, at most 200 iterations.
  double inverse_marginal(double u) const;
  // Legendre-Fenchel conjugate sup_x {h_A(x) - u x}, evaluated through the
  // maximizer; strictly decreasing and strictly convex in u.
  double conjugate(double u) const;
  double conjugate_at(double u, double xstar) const;  // when x*(u) is known
  // h_A(x) - x h_A'(x); increasing on (0,inf)
  double ell(double x) const;
  // Arrow-Pratt relative risk aversion -x h_A''/h_A'; <= 1 when alpha in (0,1)
  double relative_risk_aversion(double x) const;
};

ModifiedUtility modified_utility(const UtilitySpec& spec, const GridFunction& A,
                                 double y);

// Grid-level wrappers (power kind only; x > 0 or a domain error is thrown).
double h_A_value(double x, double y, const GridFunction& A,
                 const UtilitySpec& spec);
double h_A_marginal(double x, double y, const GridFunction& A,
                    const UtilitySpec& spec);
double inverse_marginal(double u, double y, const GridFunction& A,
                        const UtilitySpec& spec);
double conjugate(double u, double y, const GridFunction& A,
                 const UtilitySpec& spec);
double maximizer_x_star(double u, double y, const GridFunction& A,
                        const UtilitySpec& spec);
double ell(double x, double y, const GridFunction& A, const UtilitySpec& spec);
double arrow_pratt_rra(double x, double y, const GridFunction& A,
                       const UtilitySpec& spec);

}  // namespace periopt
