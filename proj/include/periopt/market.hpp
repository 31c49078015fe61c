#pragma once

#include <span>
#include <string>

#include "periopt/coefficient.hpp"
#include "periopt/grid_function.hpp"

namespace periopt {

struct UtilitySpec;  // utility.hpp

// Market primitives: risk-free rate, price coefficients mu/sigma, factor
// coefficients b/beta, correlation rho, and the user-supplied bound M0 on
// the squared market price of risk.
struct MarketModel {
  double r = 0.0;
  CoefficientFunction mu = CoefficientFunction::constant(0.0);
  CoefficientFunction sigma = CoefficientFunction::constant(1.0);
  CoefficientFunction b = CoefficientFunction::constant(0.0);
  CoefficientFunction beta = CoefficientFunction::constant(0.0);
  double rho = 0.0;
  double M0 = 0.0;

  // throws std::invalid_argument on |rho|>1, r<0, M0<0
  void validate_basic() const;
  bool has_constant_price_coefficients() const {
    return mu.is_constant() && sigma.is_constant();
  }
  bool has_frozen_factor() const {
    return b.is_constant() && b(0.0) == 0.0 && beta.is_constant() &&
           beta(0.0) == 0.0;
  }
};

// market price of risk (mu(y)-r)/sigma(y); domain error if sigma(y) <= 0
double theta(const MarketModel& model, double y);

// growth function r*x + x*M0/(2(1-x)); domain error at the pole x >= 1
double zeta(double r, double M0, double x);

// max over the grid of theta^2; usage error on an empty grid
double estimate_M0(const MarketModel& model, std::span<const double> y_grid);

struct AssumptionReport {
  bool pass = false;
  double delta = 0.0;
  double zeta_value = 0.0;  // zeta(alpha(1-gamma)) for power, 0 for log
  double margin = 0.0;      // delta - max(zeta_value, 0)
  std::string detail;
};

// Wellposedness gate: power requires delta > max(zeta(alpha(1-gamma)), 0),
// log requires delta > 0.
AssumptionReport check_standing_assumption(const MarketModel& model,
                                           const UtilitySpec& spec);

}  // namespace periopt
