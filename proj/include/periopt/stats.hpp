#pragma once

#include <cmath>
#include <cstdint>
#include <span>

namespace periopt {

// Monte Carlo estimate with its standard error. se == 0 marks an exact
// (zero-variance or analytic) value.
struct McStat {
  double mean = 0.0;
  double se = 0.0;
  std::int64_t n = 0;
};

// Neumaier-compensated sum; deterministic left-to-right order.
inline double stable_sum(std::span<const double> xs) {
  double s = 0.0, c = 0.0;
  for (double x : xs) {
    const double t = s + x;
    if (std::abs(s) >= std::abs(x))
      c += (s - t) + x;
    else
      c += (x - t) + s;
    s = t;
  }
  return s + c;
}

inline McStat mc_stat(std::span<const double> xs) {
  McStat out;
  out.n = static_cast<std::int64_t>(xs.size());
  if (out.n == 0) return out;
  out.mean = stable_sum(xs) / static_cast<double>(out.n);
  double ss = 0.0;
  for (double x : xs) {
    const double d = x - out.mean;
    ss += d * d;
  }
  if (out.n > 1)
    out.se = std::sqrt(ss / (static_cast<double>(out.n) * (out.n - 1.0)));
  return out;
}

inline double combined_se(double a, double b) {
  return std::sqrt(a * a + b * b);
}

}  // namespace periopt
