#pragma once

#include <vector>

namespace periopt {

// Finite-dimensional surrogate for the dual control eta(t, y): values on a
// coarse (time x factor) knot grid, bilinear interpolation, clamped outside
// the knot hull, box bound |eta| <= eta_max. The zero control is exact.
class DualControl {
 public:
  DualControl() = default;
  DualControl(std::vector<double> t_knots, std::vector<double> y_knots,
              double eta_max = 5.0);

  static DualControl zero(int n_t, int n_y, double t_max, double y_lo,
                          double y_hi, double eta_max = 5.0);

  double operator()(double t, double y) const;

  bool is_zero() const;
  std::size_t n_values() const { return values_.size(); }
  std::vector<double>& mutable_values() { return values_; }
  const std::vector<double>& knot_values() const { return values_; }
  const std::vector<double>& t_knots() const { return tk_; }
  const std::vector<double>& y_knots() const { return yk_; }
  double eta_max() const { return eta_max_; }
  double clamp(double v) const;

  // coefficient-wise linear blend of two controls sharing a knot layout
  static DualControl blend(const DualControl& a, const DualControl& b,
                           double w_b);

 private:
  std::vector<double> tk_, yk_, values_;  // values_[i*yk_.size()+j]
  double eta_max_ = 5.0;
};

}  // namespace periopt
