#include "periopt/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace periopt {

namespace {

// Roots of the physicists' Hermite polynomial by Newton iteration on the
// orthonormal recurrence; classic gauher construction.
GaussHermiteRule build_rule(int n) {
  if (n < 2 || n > 512) throw std::invalid_argument("gauss_hermite: bad n");
  GaussHermiteRule rule;
  rule.nodes.assign(n, 0.0);
  rule.weights.assign(n, 0.0);
  const int m = (n + 1) / 2;
  const double pim4 = 0.7511255444649425;  // pi^{-1/4}
  double z = 0.0;
  for (int i = 0; i < m; ++i) {
    if (i == 0) {
      z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
    } else if (i == 1) {
      z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
    } else if (i == 2) {
      z = 1.86 * z - 0.86 * rule.nodes[0];
    } else if (i == 3) {
      z = 1.91 * z - 0.91 * rule.nodes[1];
    } else {
      z = 2.0 * z - rule.nodes[i - 2];
    }
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = pim4;
      double p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / j) * p2 - std::sqrt((j - 1.0) / j) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double dz = p1 / pp;
      z -= dz;
      if (std::abs(dz) <= 1e-15 * std::max(1.0, std::abs(z))) break;
    }
    rule.nodes[i] = z;
    rule.nodes[n - 1 - i] = -z;
    rule.weights[i] = 2.0 / (pp * pp);
    rule.weights[n - 1 - i] = rule.weights[i];
  }
  return rule;
}

}  // namespace

const GaussHermiteRule& gauss_hermite(int n) {
  static std::map<int, GaussHermiteRule> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, build_rule(n)).first;
  return it->second;
}

double gauss_hermite_expectation(int n, double mean, double sd,
                                 const std::function<double(double)>& f) {
  if (sd == 0.0) return f(mean);
  const GaussHermiteRule& rule = gauss_hermite(n);
  const double c = std::sqrt(2.0) * sd;
  double acc = 0.0;
  for (int i = 0; i < n; ++i)
    acc += rule.weights[i] * f(mean + c * rule.nodes[i]);
  return acc / std::sqrt(3.14159265358979323846);
}

}  // namespace periopt
