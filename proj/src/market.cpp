#include "periopt/market.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "periopt/utility.hpp"

namespace periopt {

void MarketModel::validate_basic() const {
  if (std::abs(rho) > 1.0)
    throw std::invalid_argument("correlation rho must lie in [-1, 1]");
  if (r < 0.0) throw std::invalid_argument("risk-free rate must be >= 0");
  if (M0 < 0.0) throw std::invalid_argument("M0 must be >= 0");
}

double theta(const MarketModel& model, double y) {
  const double s = model.sigma(y);
  if (!(s > 0.0))
    throw std::domain_error("volatility must be strictly positive");
  return (model.mu(y) - model.r) / s;
}

double zeta(double r, double M0, double x) {
  if (x >= 1.0) throw std::domain_error("zeta is defined for x < 1");
  return r * x + x * M0 / (2.0 * (1.0 - x));
}

double estimate_M0(const MarketModel& model, std::span<const double> y_grid) {
  if (y_grid.empty())
    throw std::invalid_argument("estimate_M0 needs a nonempty grid");
  double m = 0.0;
  for (double y : y_grid) {
    const double t = theta(model, y);
    m = std::max(m, t * t);
  }
  return m;
}

AssumptionReport check_standing_assumption(const MarketModel& model,
                                           const UtilitySpec& spec) {
  spec.validate();
  AssumptionReport rep;
  rep.delta = spec.delta;
  char buf[160];
  if (spec.kind == UtilityKind::Log) {
    rep.zeta_value = 0.0;
    rep.margin = spec.delta;
    rep.pass = spec.delta > 0.0;
    std::snprintf(buf, sizeof(buf), "log kind: delta=%.6g > 0 %s", spec.delta,
                  rep.pass ? "holds" : "fails");
    rep.detail = buf;
    return rep;
  }
  const double arg = spec.alpha * (1.0 - spec.gamma);
  rep.zeta_value = zeta(model.r, model.M0, arg);
  rep.margin = spec.delta - std::max(rep.zeta_value, 0.0);
  rep.pass = rep.margin > 0.0;
  std::snprintf(buf, sizeof(buf),
                "power kind: delta=%.6g vs zeta(%.6g)=%.6g, margin=%.6g",
                spec.delta, arg, rep.zeta_value, rep.margin);
  rep.detail = buf;
  return rep;
}

}  // namespace periopt
