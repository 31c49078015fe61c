#pragma once

#include <functional>
#include <vector>

namespace periopt {

struct GaussHermiteRule {
  std::vector<double> nodes;    // roots of the physicists' Hermite polynomial
  std::vector<double> weights;  // for integrals against exp(-x^2)
};

// Nodes/weights by Newton iteration on H_n; n up to a few hundred.
const GaussHermiteRule& gauss_hermite(int n);

// E[f(G)] for G ~ N(mean, sd^2) using an n-node rule.
double gauss_hermite_expectation(int n, double mean, double sd,
                                 const std::function<double(double)>& f);

}  // namespace periopt
