#include "periopt/utility.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace periopt {

void UtilitySpec::validate() const {
  if (kind == UtilityKind::Power) {
    if (!std::isfinite(alpha) || alpha == 0.0 || alpha >= 1.0)
      throw std::invalid_argument("power alpha must lie in (-inf,0) u (0,1)");
  }
  if (!(gamma > 0.0) || gamma > 1.0)
    throw std::invalid_argument("gamma must lie in (0, 1]");
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be > 0");
  if (!(tau > 0.0)) throw std::invalid_argument("tau must be > 0");
  if (!(m > 0.0) || m >= 1.0)
    throw std::invalid_argument("m must lie in (0, 1)");
  if (h.empty()) throw std::invalid_argument("h grid function is required");
  if (h.min_value() < m - 1e-12 || h.max_value() > 1.0 + 1e-12)
    throw std::invalid_argument("h must take values in [m, 1]");
}

namespace {

void require_positive_x(double x) {
  if (!(x > 0.0)) throw std::domain_error("argument x must be > 0");
}

void require_positive_u(double u) {
  if (!(u > 0.0)) throw std::domain_error("marginal value u must be > 0");
}

}  // namespace

double ModifiedUtility::value(double x) const {
  require_positive_x(x);
  return (std::pow(x, alpha) * h + A * std::pow(x, alpha * (1.0 - gamma))) /
         alpha;
}

double ModifiedUtility::marginal(double x) const {
  require_positive_x(x);
  return h * std::pow(x, alpha - 1.0) +
         A * (1.0 - gamma) * std::pow(x, alpha * (1.0 - gamma) - 1.0);
}

double ModifiedUtility::marginal_derivative(double x) const {
  require_positive_x(x);
  const double p2 = alpha * (1.0 - gamma);
  return h * (alpha - 1.0) * std::pow(x, alpha - 2.0) +
         A * (1.0 - gamma) * (p2 - 1.0) * std::pow(x, p2 - 2.0);
}

double ModifiedUtility::inverse_marginal(double u) const {
  require_positive_u(u);
  const double c1 = h;
  const double p1 = alpha - 1.0;
  const double c2 = A * (1.0 - gamma);
  const double p2 = alpha * (1.0 - gamma) - 1.0;
  if (c2 <= 0.0) return std::pow(u / c1, 1.0 / p1);

  // Both single-term roots sit below x*; halving u pushes them above.
  const double lu = std::log(u);
  const double lc1 = std::log(c1);
  const double lc2 = std::log(c2);
  double t_lo = std::max((lu - lc1) / p1, (lu - lc2) / p2);
  double t_hi = std::max((lu - std::log(2.0) - lc1) / p1,
                         (lu - std::log(2.0) - lc2) / p2);

  // g(t) = log marginal(e^t) - log u is decreasing and convex in t, so
  // Newton from the left bracket converges monotonically; the bracket is
  // kept as a safeguard.
  double t = t_lo;
  for (int it = 0; it < 200; ++it) {
    const double a1 = lc1 + p1 * t;
    const double a2 = lc2 + p2 * t;
    const double am = std::max(a1, a2);
    const double e1 = std::exp(a1 - am);
    const double e2 = std::exp(a2 - am);
    const double g = am + std::log(e1 + e2) - lu;
    const double dg = (p1 * e1 + p2 * e2) / (e1 + e2);
    if (g > 0.0)
      t_lo = std::max(t_lo, t);
    else
      t_hi = std::min(t_hi, t);
    double t_next = t - g / dg;
    if (!(t_next > t_lo && t_next < t_hi)) t_next = 0.5 * (t_lo + t_hi);
    const double step = std::abs(t_next - t);
    t = t_next;
    if (step <= 1e-14 * std::max(1.0, std::abs(t))) break;
  }
  return std::exp(t);
}

double ModifiedUtility::conjugate(double u) const {
  require_positive_u(u);
  const double xs = inverse_marginal(u);
  return value(xs) - u * xs;
}

double ModifiedUtility::conjugate_at(double u, double xstar) const {
  return value(xstar) - u * xstar;
}

double ModifiedUtility::ell(double x) const {
  require_positive_x(x);
  return (1.0 / alpha - 1.0) * std::pow(x, alpha) * h +
         (1.0 / alpha - (1.0 - gamma)) * A *
             std::pow(x, alpha * (1.0 - gamma));
}

double ModifiedUtility::relative_risk_aversion(double x) const {
  return -x * marginal_derivative(x) / marginal(x);
}

ModifiedUtility modified_utility(const UtilitySpec& spec, const GridFunction& A,
                                 double y) {
  return ModifiedUtility{spec.alpha, spec.gamma, spec.h(y),
                         A.empty() ? 0.0 : A(y)};
}

namespace {

ModifiedUtility power_kernel(const UtilitySpec& spec, const GridFunction& A,
                             double y) {
  if (spec.kind != UtilityKind::Power)
    throw std::invalid_argument("operation requires the power utility kind");
  return modified_utility(spec, A, y);
}

}  // namespace

double h_A_value(double x, double y, const GridFunction& A,
                 const UtilitySpec& spec) {
  return power_kernel(spec, A, y).value(x);
}

double h_A_marginal(double x, double y, const GridFunction& A,
                    const UtilitySpec& spec) {
  return power_kernel(spec, A, y).marginal(x);
}

double inverse_marginal(double u, double y, const GridFunction& A,
                        const UtilitySpec& spec) {
  return power_kernel(spec, A, y).inverse_marginal(u);
}

double conjugate(double u, double y, const GridFunction& A,
                 const UtilitySpec& spec) {
  return power_kernel(spec, A, y).conjugate(u);
}

double maximizer_x_star(double u, double y, const GridFunction& A,
                        const UtilitySpec& spec) {
  return power_kernel(spec, A, y).inverse_marginal(u);
}

double ell(double x, double y, const GridFunction& A, const UtilitySpec& spec) {
  return power_kernel(spec, A, y).ell(x);
}

double arrow_pratt_rra(double x, double y, const GridFunction& A,
                       const UtilitySpec& spec) {
  return power_kernel(spec, A, y).relative_risk_aversion(x);
}

}  // namespace periopt
