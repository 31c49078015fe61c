#include "periopt/dual_control.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "interp.hpp"

namespace periopt {

DualControl::DualControl(std::vector<double> t_knots,
                         std::vector<double> y_knots, double eta_max)
    : tk_(std::move(t_knots)), yk_(std::move(y_knots)), eta_max_(eta_max) {
  if (tk_.empty() || yk_.empty())
    throw std::invalid_argument("dual control needs at least one knot per axis");
  if (!(eta_max_ > 0.0))
    throw std::invalid_argument("eta_max must be > 0");
  values_.assign(tk_.size() * yk_.size(), 0.0);
}

DualControl DualControl::zero(int n_t, int n_y, double t_max, double y_lo,
                              double y_hi, double eta_max) {
  return DualControl(detail::linspace(0.0, t_max, std::max(1, n_t)),
                     detail::linspace(y_lo, y_hi, std::max(1, n_y)), eta_max);
}

double DualControl::operator()(double t, double y) const {
  return detail::bilinear(tk_, yk_, values_, t, y);
}

bool DualControl::is_zero() const {
  return std::all_of(values_.begin(), values_.end(),
                     [](double v) { return v == 0.0; });
}

double DualControl::clamp(double v) const {
  return std::clamp(v, -eta_max_, eta_max_);
}

DualControl DualControl::blend(const DualControl& a, const DualControl& b,
                               double w_b) {
  if (a.is_zero() && b.is_zero()) return a;
  if (a.tk_ != b.tk_ || a.yk_ != b.yk_)
    throw std::invalid_argument("blend needs matching knot layouts");
  DualControl out = a;
  for (std::size_t i = 0; i < out.values_.size(); ++i)
    out.values_[i] = (1.0 - w_b) * a.values_[i] + w_b * b.values_[i];
  return out;
}

}  // namespace periopt
