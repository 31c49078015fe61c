#pragma once

#include <algorithm>
#include <span>
#include <vector>

namespace periopt::detail {

// Index i and weight w such that f(x) = (1-w) v[i] + w v[i+1], clamped to the
// knot hull. Knots are strictly increasing.
inline void locate(std::span<const double> knots, double x, std::size_t& i,
                   double& w) {
  const std::size_t n = knots.size();
  if (n == 1 || x <= knots.front()) {
    i = 0;
    w = 0.0;
    return;
  }
  if (x >= knots.back()) {
    i = n - 2;
    w = 1.0;
    return;
  }
  const auto it = std::upper_bound(knots.begin(), knots.end(), x);
  i = static_cast<std::size_t>(it - knots.begin()) - 1;
  w = (x - knots[i]) / (knots[i + 1] - knots[i]);
}

inline double bilinear(std::span<const double> tk, std::span<const double> yk,
                       std::span<const double> values, double t, double y) {
  std::size_t it, iy;
  double wt, wy;
  locate(tk, t, it, wt);
  locate(yk, y, iy, wy);
  const std::size_t ny = yk.size();
  const std::size_t it1 = (tk.size() == 1) ? it : it + 1;
  const std::size_t iy1 = (yk.size() == 1) ? iy : iy + 1;
  const double v00 = values[it * ny + iy];
  const double v01 = values[it * ny + iy1];
  const double v10 = values[it1 * ny + iy];
  const double v11 = values[it1 * ny + iy1];
  return (1.0 - wt) * ((1.0 - wy) * v00 + wy * v01) +
         wt * ((1.0 - wy) * v10 + wy * v11);
}

inline std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n));
  if (n == 1) {
    out.push_back(lo);
    return out;
  }
  for (int i = 0; i < n; ++i)
    out.push_back(lo + (hi - lo) * static_cast<double>(i) / (n - 1));
  return out;
}

}  // namespace periopt::detail
