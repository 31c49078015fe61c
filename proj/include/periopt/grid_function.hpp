#pragma once

#include <span>
#include <vector>

namespace periopt {

// Tabulated function on a strictly increasing y-grid with linear
// interpolation and clamp-to-endpoint extrapolation. Clamping keeps the
// represented functions bounded, which the downstream contraction and
// bound arguments rely on.
class GridFunction {
 public:
  GridFunction() = default;
  GridFunction(std::vector<double> ys, std::vector<double> values);

  static GridFunction constant_on(std::vector<double> ys, double value);

  double operator()(double y) const;

  std::span<const double> grid() const { return ys_; }
  std::span<const double> values() const { return vs_; }
  std::vector<double>& mutable_values() { return vs_; }
  std::size_t size() const { return ys_.size(); }
  bool empty() const { return ys_.empty(); }

  double min_value() const;
  double max_value() const;
  bool nonnegative() const { return min_value() >= 0.0; }
  bool is_constant(double tol = 0.0) const;

 private:
  std::vector<double> ys_, vs_;
};

// sup-norm distance on the shared grid
double sup_distance(const GridFunction& a, const GridFunction& b);

}  // namespace periopt
