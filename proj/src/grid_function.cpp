#include "periopt/grid_function.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace periopt {

GridFunction::GridFunction(std::vector<double> ys, std::vector<double> values)
    : ys_(std::move(ys)), vs_(std::move(values)) {
  if (ys_.empty() || ys_.size() != vs_.size())
    throw std::invalid_argument("grid function needs matching nonempty arrays");
  for (std::size_t i = 1; i < ys_.size(); ++i)
    if (!(ys_[i] > ys_[i - 1]))
      throw std::invalid_argument("grid must be strictly increasing");
  for (double v : vs_)
    if (!std::isfinite(v))
      throw std::invalid_argument("grid values must be finite");
}

GridFunction GridFunction::constant_on(std::vector<double> ys, double value) {
  std::vector<double> vs(ys.size(), value);
  return GridFunction(std::move(ys), std::move(vs));
}

double GridFunction::operator()(double y) const {
  if (ys_.size() == 1) return vs_.front();
  if (y <= ys_.front()) return vs_.front();
  if (y >= ys_.back()) return vs_.back();
  const auto it = std::upper_bound(ys_.begin(), ys_.end(), y);
  const std::size_t i = static_cast<std::size_t>(it - ys_.begin());
  const double w = (y - ys_[i - 1]) / (ys_[i] - ys_[i - 1]);
  return vs_[i - 1] + w * (vs_[i] - vs_[i - 1]);
}

double GridFunction::min_value() const {
  return *std::min_element(vs_.begin(), vs_.end());
}

double GridFunction::max_value() const {
  return *std::max_element(vs_.begin(), vs_.end());
}

bool GridFunction::is_constant(double tol) const {
  return max_value() - min_value() <= tol;
}

double sup_distance(const GridFunction& a, const GridFunction& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("sup_distance needs a shared grid");
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    d = std::max(d, std::abs(a.values()[i] - b.values()[i]));
  return d;
}

}  // namespace periopt
