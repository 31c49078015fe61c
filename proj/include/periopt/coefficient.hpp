#pragma once

#include <span>
#include <string>
#include <vector>

namespace periopt {

enum class CoeffKind { Constant, Affine, Sigmoid, Table };

// Model coefficient mu/sigma/b/beta as a real function of the factor level y.
// Every kind evaluates on all of R; the tabulated kind clamps outside its
// knot range so values stay bounded.
class CoefficientFunction {
 public:
  CoefficientFunction() : kind_(CoeffKind::Constant), p_{0.0, 0.0, 0.0, 0.0} {}

  static CoefficientFunction constant(double c);
  // a + b*y
  static CoefficientFunction affine(double a, double b);
  // lo + (hi-lo) * logistic((y-center)/scale)
  static CoefficientFunction sigmoid(double lo, double hi, double center = 0.0,
                                     double scale = 1.0);
  // linear interpolation between knots, constant extrapolation
  static CoefficientFunction table(std::vector<double> ys,
                                   std::vector<double> values);

  double operator()(double y) const;

  CoeffKind kind() const { return kind_; }
  const char* kind_name() const;

  // True when the function provably takes a single value on all of R.
  bool is_constant() const;
  double min_on(std::span<const double> grid) const;
  double max_on(std::span<const double> grid) const;

  const std::vector<double>& table_grid() const { return tab_y_; }
  const std::vector<double>& table_values() const { return tab_v_; }
  const double* params() const { return p_; }

 private:
  CoeffKind kind_;
  double p_[4];  // constant: c; affine: a,b; sigmoid: lo,hi,center,scale
  std::vector<double> tab_y_, tab_v_;
};

}  // namespace periopt
