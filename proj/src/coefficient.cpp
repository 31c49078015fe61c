#include "periopt/coefficient.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace periopt {

CoefficientFunction CoefficientFunction::constant(double c) {
  CoefficientFunction f;
  f.kind_ = CoeffKind::Constant;
  f.p_[0] = c;
  return f;
}

CoefficientFunction CoefficientFunction::affine(double a, double b) {
  CoefficientFunction f;
  f.kind_ = CoeffKind::Affine;
  f.p_[0] = a;
  f.p_[1] = b;
  return f;
}

CoefficientFunction CoefficientFunction::sigmoid(double lo, double hi,
                                                 double center, double scale) {
  if (scale <= 0.0) throw std::invalid_argument("sigmoid scale must be > 0");
  CoefficientFunction f;
  f.kind_ = CoeffKind::Sigmoid;
  f.p_[0] = lo;
  f.p_[1] = hi;
  f.p_[2] = center;
  f.p_[3] = scale;
  return f;
}

CoefficientFunction CoefficientFunction::table(std::vector<double> ys,
                                               std::vector<double> values) {
  if (ys.size() < 2 || ys.size() != values.size())
    throw std::invalid_argument("table coefficient needs >= 2 matching knots");
  for (std::size_t i = 1; i < ys.size(); ++i)
    if (!(ys[i] > ys[i - 1]))
      throw std::invalid_argument("table grid must be strictly increasing");
  for (double v : values)
    if (!std::isfinite(v))
      throw std::invalid_argument("table values must be finite");
  CoefficientFunction f;
  f.kind_ = CoeffKind::Table;
  f.tab_y_ = std::move(ys);
  f.tab_v_ = std::move(values);
  return f;
}

double CoefficientFunction::operator()(double y) const {
  switch (kind_) {
    case CoeffKind::Constant:
      return p_[0];
    case CoeffKind::Affine:
      return p_[0] + p_[1] * y;
    case CoeffKind::Sigmoid: {
      const double s = 1.0 / (1.0 + std::exp(-(y - p_[2]) / p_[3]));
      return p_[0] + (p_[1] - p_[0]) * s;
    }
    case CoeffKind::Table: {
      if (y <= tab_y_.front()) return tab_v_.front();
      if (y >= tab_y_.back()) return tab_v_.back();
      const auto it = std::upper_bound(tab_y_.begin(), tab_y_.end(), y);
      const std::size_t i = static_cast<std::size_t>(it - tab_y_.begin());
      const double w = (y - tab_y_[i - 1]) / (tab_y_[i] - tab_y_[i - 1]);
      return tab_v_[i - 1] + w * (tab_v_[i] - tab_v_[i - 1]);
    }
  }
  return 0.0;
}

const char* CoefficientFunction::kind_name() const {
  switch (kind_) {
    case CoeffKind::Constant: return "constant";
    case CoeffKind::Affine: return "affine";
    case CoeffKind::Sigmoid: return "sigmoid";
    case CoeffKind::Table: return "table";
  }
  return "?";
}

bool CoefficientFunction::is_constant() const {
  switch (kind_) {
    case CoeffKind::Constant:
      return true;
    case CoeffKind::Affine:
      return p_[1] == 0.0;
    case CoeffKind::Sigmoid:
      return p_[0] == p_[1];
    case CoeffKind::Table:
      return std::all_of(tab_v_.begin(), tab_v_.end(),
                         [&](double v) { return v == tab_v_.front(); });
  }
  return false;
}

double CoefficientFunction::min_on(std::span<const double> grid) const {
  double m = std::numeric_limits<double>::infinity();
  for (double y : grid) m = std::min(m, (*this)(y));
  return m;
}

double CoefficientFunction::max_on(std::span<const double> grid) const {
  double m = -std::numeric_limits<double>::infinity();
  for (double y : grid) m = std::max(m, (*this)(y));
  return m;
}

}  // namespace periopt
