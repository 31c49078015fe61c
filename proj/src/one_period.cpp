#include "periopt/one_period.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "interp.hpp"
#include "parallel.hpp"
#include "periopt/quadrature.hpp"

namespace periopt {

namespace {

// Per-path state shared by every (eta, lambda) evaluation on one bundle:
// common random numbers make the dual objective deterministic per seed.
struct DualWorkspace {
  const MarketModel& model;
  const UtilitySpec& spec;
  const GridFunction& A;
  const PathBundle& bundle;
  double disc;  // e^{-r tau}
  bool single_term;
  std::vector<double> logZ0;  // -int theta dW1 - 1/2 int theta^2 dt
  std::vector<double> hY, AY;
  std::vector<double> z;    // lambda-free discounted density Z^eta e^{-r tau}
  std::vector<double> phi;  // scratch

  DualWorkspace(const MarketModel& m, const UtilitySpec& s,
                const GridFunction& a, const PathBundle& b)
      : model(m), spec(s), A(a), bundle(b) {
    disc = std::exp(-m.r * b.cfg.tau);
    const std::int64_t n = b.cfg.n_paths;
    const int K = b.cfg.n_steps;
    const double dt = b.dt();
    logZ0.resize(n);
    hY.resize(n);
    AY.resize(n);
    z.resize(n);
    phi.resize(n);
    detail::parallel_paths(n, [&](std::int64_t p0, std::int64_t p1) {
      for (std::int64_t p = p0; p < p1; ++p) {
        const double* Yp = &b.Y[static_cast<std::size_t>(p) * (K + 1)];
        const double* d1 = &b.dW1[static_cast<std::size_t>(p) * K];
        double lz = 0.0;
        for (int k = 0; k < K; ++k) {
          const double th = theta(m, Yp[k]);
          lz += -th * d1[k] - 0.5 * th * th * dt;
        }
        logZ0[p] = lz;
        const double yt = Yp[K];
        hY[p] = s.h(yt);
        AY[p] = a.empty() ? 0.0 : a(yt);
      }
    });
    single_term = (s.gamma == 1.0) ||
                  std::all_of(AY.begin(), AY.end(),
                              [](double v) { return v == 0.0; });
  }

  void set_eta(const DualControl& eta) {
    const std::int64_t n = bundle.cfg.n_paths;
    const int K = bundle.cfg.n_steps;
    const double dt = bundle.dt();
    if (eta.is_zero()) {
      detail::parallel_paths(n, [&](std::int64_t p0, std::int64_t p1) {
        for (std::int64_t p = p0; p < p1; ++p)
          z[p] = std::exp(logZ0[p]) * disc;
      });
      return;
    }
    detail::parallel_paths(n, [&](std::int64_t p0, std::int64_t p1) {
      for (std::int64_t p = p0; p < p1; ++p) {
        const double* Yp = &bundle.Y[static_cast<std::size_t>(p) * (K + 1)];
        const double* d2 = &bundle.dW2[static_cast<std::size_t>(p) * K];
        double extra = 0.0;
        for (int k = 0; k < K; ++k) {
          const double ev = eta(bundle.times[k], Yp[k]);
          extra += ev * d2[k] - 0.5 * ev * ev * dt;
        }
        z[p] = std::exp(logZ0[p] + extra) * disc;
      }
    });
  }

  double xstar(double u, std::int64_t p) const {
    if (single_term)
      return std::pow(u / hY[p], 1.0 / (spec.alpha - 1.0));
    const ModifiedUtility k{spec.alpha, spec.gamma, hY[p], AY[p]};
    return k.inverse_marginal(u);
  }

  // budget b(lambda) = mean x*(lambda z) z and its lambda-derivative
  void budget(double lambda, double& value, double& slope) const {
    const std::int64_t n = bundle.cfg.n_paths;
    double acc = 0.0, acc_d = 0.0;
    for (std::int64_t p = 0; p < n; ++p) {
      const double u = lambda * z[p];
      const double xs = xstar(u, p);
      const ModifiedUtility k{spec.alpha, spec.gamma, hY[p], AY[p]};
      acc += xs * z[p];
      acc_d += z[p] * z[p] / k.marginal_derivative(xs);
    }
    value = acc / static_cast<double>(n);
    slope = acc_d / static_cast<double>(n);
  }

  // budget-binding multiplier: mean x*(lambda z) z = x0 to |res| <= tol
  double solve_lambda(double warm, double x0, double tol) const {
    double lam = warm > 0.0 ? warm : 1.0;
    double b = 0.0, db = 0.0;
    budget(lam, b, db);
    if (std::abs(b - x0) <= tol) return lam;
    // expand a bracket; the budget is strictly decreasing in lambda
    double lo = lam, hi = lam, blo = b, bhi = b;
    int guard = 0;
    while (bhi > x0) {
      hi *= 8.0;
      budget(hi, bhi, db);
      if (++guard > 200)
        throw std::runtime_error("solve_lambda: no upper bracket found");
    }
    guard = 0;
    while (blo < x0) {
      lo /= 8.0;
      budget(lo, blo, db);
      if (++guard > 200)
        throw std::runtime_error("solve_lambda: no lower bracket found");
    }
    lam = std::sqrt(lo * hi);
    for (int it = 0; it < 200; ++it) {
      budget(lam, b, db);
      if (std::abs(b - x0) <= tol) return lam;
      if (b > x0)
        lo = lam;
      else
        hi = lam;
      // Newton on log-lambda, clipped into the bracket
      const double g = b - x0;
      const double dg = db * lam;  // d/d(log lambda)
      double next = lam * std::exp(-g / dg);
      if (!(next > lo && next < hi) || !std::isfinite(next))
        next = std::sqrt(lo * hi);
      lam = next;
    }
    throw std::runtime_error("solve_lambda: budget residual did not converge");
  }

  McStat value_at(double lambda) {
    const std::int64_t n = bundle.cfg.n_paths;
    detail::parallel_paths(n, [&](std::int64_t p0, std::int64_t p1) {
      for (std::int64_t p = p0; p < p1; ++p) {
        const double u = lambda * z[p];
        const double xs = xstar(u, p);
        const ModifiedUtility k{spec.alpha, spec.gamma, hY[p], AY[p]};
        phi[p] = k.value(xs) - u * xs;
      }
    });
    return mc_stat(phi);
  }

  double budget_residual(double lambda, double x0) const {
    double b = 0.0, db = 0.0;
    budget(lambda, b, db);
    return b - x0;
  }
};

// factor-knot span for controls and policies
void control_span(const PathBundle& bundle, const OnePeriodConfig& cfg,
                  double& lo, double& hi) {
  if (cfg.y_span_lo < cfg.y_span_hi) {
    lo = cfg.y_span_lo;
    hi = cfg.y_span_hi;
    return;
  }
  lo = *std::min_element(bundle.Y.begin(), bundle.Y.end());
  hi = *std::max_element(bundle.Y.begin(), bundle.Y.end());
  if (hi - lo < 1e-9) {
    lo -= 0.5;
    hi += 0.5;
  }
}

McStat log_value_with_x0(const MarketModel& model, double x0,
                         const PathBundle& bundle, std::vector<double>& scratch) {
  const std::int64_t n = bundle.cfg.n_paths;
  const int K = bundle.cfg.n_steps;
  const double dt = bundle.dt();
  scratch.resize(n);
  detail::parallel_paths(n, [&](std::int64_t p0, std::int64_t p1) {
    for (std::int64_t p = p0; p < p1; ++p) {
      const double* Yp = &bundle.Y[static_cast<std::size_t>(p) * (K + 1)];
      double q = 0.0;
      for (int k = 0; k < K; ++k) {
        const double th = theta(model, Yp[k]);
        q += th * th * dt;
      }
      scratch[p] = std::log(x0) + model.r * bundle.cfg.tau + 0.5 * q;
    }
  });
  return mc_stat(scratch);
}

// Terminal wealth value under a feedback policy, without storing paths.
// For the log kind, drift_only drops the int sigma pi dW1 term: it has zero
// mean for any adapted feedback policy, so the estimator stays unbiased with
// far less variance (used by the policy search).
McStat policy_objective(const MarketModel& model, const UtilitySpec& spec,
                        const GridFunction& A, const FeedbackPolicy& policy,
                        const PathBundle& bundle, std::vector<double>& scratch,
                        bool drift_only = false) {
  const std::int64_t n = bundle.cfg.n_paths;
  const int K = bundle.cfg.n_steps;
  const double dt = bundle.dt();
  const double r = model.r;
  const bool log_kind = spec.kind == UtilityKind::Log;
  scratch.resize(n);
  detail::parallel_paths(n, [&](std::int64_t p0, std::int64_t p1) {
    for (std::int64_t p = p0; p < p1; ++p) {
      const double* Yp = &bundle.Y[static_cast<std::size_t>(p) * (K + 1)];
      const double* d1 = &bundle.dW1[static_cast<std::size_t>(p) * K];
      double lx = 0.0;
      for (int k = 0; k < K; ++k) {
        const double y = Yp[k];
        double pi = policy.value(model, bundle.times[k], y);
        pi = std::clamp(pi, -policy.pi_max, policy.pi_max);
        const double mu = model.mu(y);
        const double sg = model.sigma(y);
        lx += (r + (mu - r) * pi - 0.5 * sg * sg * pi * pi) * dt;
        if (!(log_kind && drift_only)) lx += sg * pi * d1[k];
      }
      if (log_kind) {
        scratch[p] = lx;
      } else {
        const double yt = Yp[K];
        const ModifiedUtility ker{spec.alpha, spec.gamma, spec.h(yt),
                                  A.empty() ? 0.0 : A(yt)};
        scratch[p] = ker.value(std::exp(lx));
      }
    }
  });
  return mc_stat(scratch);
}

}  // namespace

McStat dual_value(const MarketModel& model, const UtilitySpec& spec,
                  const GridFunction& A, const DualControl& eta, double lambda,
                  const PathBundle& bundle) {
  if (!(lambda > 0.0)) throw std::domain_error("lambda must be > 0");
  if (spec.kind == UtilityKind::Log) {
    // Phi_log(u) = -log u - 1
    const std::int64_t n = bundle.cfg.n_paths;
    const int K = bundle.cfg.n_steps;
    const double dt = bundle.dt();
    std::vector<double> vals(n);
    detail::parallel_paths(n, [&](std::int64_t p0, std::int64_t p1) {
      for (std::int64_t p = p0; p < p1; ++p) {
        const double* Yp = &bundle.Y[static_cast<std::size_t>(p) * (K + 1)];
        const double* d1 = &bundle.dW1[static_cast<std::size_t>(p) * K];
        const double* d2 = &bundle.dW2[static_cast<std::size_t>(p) * K];
        double lz = 0.0;
        for (int k = 0; k < K; ++k) {
          const double th = theta(model, Yp[k]);
          const double ev = eta(bundle.times[k], Yp[k]);
          lz += -th * d1[k] + ev * d2[k] - 0.5 * (th * th + ev * ev) * dt;
        }
        vals[p] = -(std::log(lambda) + lz - model.r * bundle.cfg.tau) - 1.0;
      }
    });
    return mc_stat(vals);
  }
  DualWorkspace ws(model, spec, A, bundle);
  ws.set_eta(eta);
  return ws.value_at(lambda);
}

double solve_lambda(const MarketModel& model, const UtilitySpec& spec,
                    const GridFunction& A, const DualControl& eta,
                    const PathBundle& bundle, double x0, double lambda_tol) {
  if (!(x0 > 0.0)) throw std::invalid_argument("x0 must be > 0");
  if (spec.kind == UtilityKind::Log) return 1.0 / x0;
  DualWorkspace ws(model, spec, A, bundle);
  ws.set_eta(eta);
  return ws.solve_lambda(1.0, x0, lambda_tol);
}

OnePeriodSolution solve_dual(const MarketModel& model, const UtilitySpec& spec,
                             const GridFunction& A, double y0,
                             const OnePeriodConfig& cfg, double x0) {
  spec.validate();
  PathBundle bundle = simulate_factor(model, y0, cfg.sim, cfg.stream);
  double span_lo = 0.0, span_hi = 0.0;
  control_span(bundle, cfg, span_lo, span_hi);

  OnePeriodSolution sol;
  if (spec.kind == UtilityKind::Log) {
    sol.lambda_star = 1.0 / x0;
    sol.eta_star = DualControl::zero(1, 1, cfg.sim.tau, span_lo, span_hi,
                                     cfg.eta_max);
    std::vector<double> scratch;
    sol.dual_value = log_value_with_x0(model, x0, bundle, scratch);
    sol.budget_residual = 0.0;
    if (cfg.certify_primal) {
      PrimalSolution ps = solve_primal(model, spec, A, y0, cfg);
      sol.primal_value = ps.value;
      sol.primal_policy = ps.policy;
      sol.primal_value.mean += std::log(x0);
      sol.has_primal = true;
      sol.gap = sol.dual_value.mean - sol.primal_value.mean;
      sol.certified = sol.gap <= 3.0 * combined_se(sol.dual_value.se,
                                                   sol.primal_value.se);
    } else {
      sol.certified = true;  // strong duality in closed form
    }
    return sol;
  }

  DualWorkspace ws(model, spec, A, bundle);
  DualControl eta = DualControl::zero(cfg.eta_time_knots, cfg.eta_factor_knots,
                                      cfg.sim.tau, span_lo, span_hi,
                                      cfg.eta_max);
  ws.set_eta(eta);
  double lambda = ws.solve_lambda(1.0, x0, cfg.lambda_tol);
  McStat val = ws.value_at(lambda);
  double best = val.mean + lambda * x0;
  double best_se = val.se;

  double step = cfg.eta_step0;
  int sweeps = 0;
  while (step >= cfg.step_min && sweeps < cfg.max_sweeps) {
    ++sweeps;
    double sweep_gain = 0.0;
    bool improved = false;
    for (std::size_t j = 0; j < eta.n_values(); ++j) {
      for (double dir : {step, -step}) {
        bool moved = false;
        for (;;) {
          const double old = eta.mutable_values()[j];
          const double cand = eta.clamp(old + dir);
          if (cand == old) break;
          eta.mutable_values()[j] = cand;
          ws.set_eta(eta);
          double lam_c = lambda;
          try {
            lam_c = ws.solve_lambda(lambda, x0, cfg.lambda_tol);
          } catch (const std::runtime_error&) {
            eta.mutable_values()[j] = old;
            break;
          }
          const McStat v = ws.value_at(lam_c);
          const double cand_value = v.mean + lam_c * x0;
          if (cand_value < best - 1e-12) {
            sweep_gain += best - cand_value;
            best = cand_value;
            best_se = v.se;
            lambda = lam_c;
            improved = true;
            moved = true;
          } else {
            eta.mutable_values()[j] = old;
            break;
          }
        }
        if (moved) break;
      }
    }
    if (!improved) {
      step *= 0.5;
    } else if (sweep_gain < std::max(cfg.improve_tol, best_se)) {
      break;  // not worth optimizing below the noise floor
    }
  }

  ws.set_eta(eta);
  lambda = ws.solve_lambda(lambda, x0, cfg.lambda_tol);
  val = ws.value_at(lambda);
  sol.lambda_star = lambda;
  sol.eta_star = eta;
  sol.dual_value = {val.mean + lambda * x0, val.se, val.n};
  sol.budget_residual = ws.budget_residual(lambda, x0);
  sol.sweeps = sweeps;
  for (double v : eta.knot_values())
    if (std::abs(v) >= cfg.eta_max - 1e-12) sol.eta_on_boundary = true;

  if (cfg.certify_primal) {
    PrimalSolution ps = solve_primal(model, spec, A, y0, cfg);
    sol.primal_value = ps.value;
    sol.primal_policy = ps.policy;
    sol.has_primal = true;
    sol.gap = sol.dual_value.mean - sol.primal_value.mean;
  }
  return sol;
}

McStat primal_value(const MarketModel& model, const UtilitySpec& spec,
                    const GridFunction& A, const FeedbackPolicy& policy,
                    const PathBundle& bundle) {
  std::vector<double> scratch;
  return policy_objective(model, spec, A, policy, bundle, scratch);
}

std::vector<double> primal_objective_paths(const MarketModel& model,
                                           const UtilitySpec& spec,
                                           const GridFunction& A,
                                           const FeedbackPolicy& policy,
                                           const PathBundle& bundle) {
  std::vector<double> scratch;
  policy_objective(model, spec, A, policy, bundle, scratch);
  return scratch;
}

PrimalSolution solve_primal(const MarketModel& model, const UtilitySpec& spec,
                            const GridFunction& A, double y0,
                            const OnePeriodConfig& cfg,
                            const std::optional<FeedbackPolicy>& start) {
  spec.validate();
  PathBundle bundle = simulate_factor(model, y0, cfg.sim, cfg.stream);
  double span_lo = 0.0, span_hi = 0.0;
  control_span(bundle, cfg, span_lo, span_hi);

  FeedbackPolicy policy;
  if (start.has_value()) {
    policy = *start;
  } else {
    // Merton-type seed at the factor knots, constant in time
    const auto tk = detail::linspace(0.0, cfg.sim.tau,
                                     std::max(1, cfg.policy_time_knots));
    const auto yk = detail::linspace(span_lo, span_hi,
                                     std::max(1, cfg.policy_factor_knots));
    std::vector<double> vals(tk.size() * yk.size(), 0.0);
    for (std::size_t i = 0; i < tk.size(); ++i)
      for (std::size_t j = 0; j < yk.size(); ++j) {
        const double th = theta(model, yk[j]);
        const double sg = model.sigma(yk[j]);
        const double seed = spec.kind == UtilityKind::Log
                                ? th / sg
                                : th / ((1.0 - spec.alpha) * sg);
        vals[i * yk.size() + j] = std::clamp(seed, -cfg.pi_max, cfg.pi_max);
      }
    policy = FeedbackPolicy::table(tk, yk, std::move(vals));
  }
  policy.pi_max = cfg.pi_max;

  const bool drift_only = spec.kind == UtilityKind::Log;
  std::vector<double> scratch;
  McStat best =
      policy_objective(model, spec, A, policy, bundle, scratch, drift_only);

  PrimalSolution out;
  if (policy.kind() != FeedbackPolicy::Kind::Table) {
    // closed-form policies have no coordinates to search over
    out.policy = policy;
    out.value = drift_only
                    ? policy_objective(model, spec, A, policy, bundle, scratch)
                    : best;
    return out;
  }

  double step = cfg.pi_step0;
  int sweeps = 0;
  while (step >= cfg.step_min && sweeps < cfg.max_sweeps) {
    ++sweeps;
    double sweep_gain = 0.0;
    bool improved = false;
    auto& vals = policy.mutable_values();
    for (std::size_t j = 0; j < vals.size(); ++j) {
      for (double dir : {step, -step}) {
        bool moved = false;
        // greedy continuation along an improving direction
        for (;;) {
          const double old = vals[j];
          const double cand = std::clamp(old + dir, -cfg.pi_max, cfg.pi_max);
          if (cand == old) break;
          vals[j] = cand;
          const McStat v = policy_objective(model, spec, A, policy, bundle,
                                            scratch, drift_only);
          if (v.mean > best.mean + 1e-12) {
            sweep_gain += v.mean - best.mean;
            best = v;
            improved = true;
            moved = true;
          } else {
            vals[j] = old;
            break;
          }
        }
        if (moved) break;  // try the next coordinate
      }
    }
    if (!improved) {
      step *= 0.5;
    } else if (sweep_gain < std::max(cfg.improve_tol, best.se)) {
      break;
    }
  }
  out.policy = policy;
  out.value = drift_only
                  ? policy_objective(model, spec, A, policy, bundle, scratch)
                  : best;
  out.sweeps = sweeps;
  out.final_step = step;
  return out;
}

GapReport duality_gap(const McStat& primal, const McStat& dual,
                      double tolerance) {
  GapReport rep;
  rep.gap = dual.mean - primal.mean;
  rep.combined_se = combined_se(primal.se, dual.se);
  rep.tolerance = tolerance;
  rep.pass = rep.gap <= std::max(tolerance, 3.0 * rep.combined_se);
  return rep;
}

double quadrature_oracle_constant(const MarketModel& model,
                                  const UtilitySpec& spec, double A_const,
                                  double lambda, int nodes) {
  if (!model.has_constant_price_coefficients())
    throw std::invalid_argument(
        "quadrature oracle requires constant mu and sigma");
  if (!(lambda > 0.0)) throw std::domain_error("lambda must be > 0");
  const double th = theta(model, 0.0);
  const double tau = spec.tau;
  const double mean = -0.5 * th * th * tau;
  const double sd = std::abs(th) * std::sqrt(tau);
  const double disc = std::exp(-model.r * tau);
  if (spec.kind == UtilityKind::Log) {
    return gauss_hermite_expectation(nodes, mean, sd, [&](double g) {
      return -(std::log(lambda * disc) + g) - 1.0;
    });
  }
  if (!spec.h.is_constant())
    throw std::invalid_argument("quadrature oracle requires constant h");
  const ModifiedUtility k{spec.alpha, spec.gamma, spec.h.values()[0], A_const};
  return gauss_hermite_expectation(nodes, mean, sd, [&](double g) {
    return k.conjugate(lambda * disc * std::exp(g));
  });
}

QuadOnePeriod quadrature_solve_constant(const MarketModel& model,
                                        const UtilitySpec& spec, double h_const,
                                        double A_const, int nodes) {
  if (!model.has_constant_price_coefficients())
    throw std::invalid_argument(
        "quadrature solve requires constant mu and sigma");
  const double tau = spec.tau;
  QuadOnePeriod out;
  if (spec.kind == UtilityKind::Log) {
    const double th = theta(model, 0.0);
    out.lambda_star = 1.0;
    out.dual_value = model.r * tau + 0.5 * th * th * tau;
    return out;
  }
  const double th = theta(model, 0.0);
  const double mean = -0.5 * th * th * tau;
  const double sd = std::abs(th) * std::sqrt(tau);
  const double disc = std::exp(-model.r * tau);
  const ModifiedUtility k{spec.alpha, spec.gamma, h_const, A_const};

  const auto budget = [&](double lam) {
    return gauss_hermite_expectation(nodes, mean, sd, [&](double g) {
      const double zd = disc * std::exp(g);
      return k.inverse_marginal(lam * zd) * zd;
    });
  };
  double lo = 1.0, hi = 1.0;
  double blo = budget(lo), bhi = blo;
  int guard = 0;
  while (bhi > 1.0) {
    hi *= 8.0;
    bhi = budget(hi);
    if (++guard > 200)
      throw std::runtime_error("quadrature budget: no upper bracket");
  }
  guard = 0;
  while (blo < 1.0) {
    lo /= 8.0;
    blo = budget(lo);
    if (++guard > 200)
      throw std::runtime_error("quadrature budget: no lower bracket");
  }
  for (int it = 0; it < 200 && hi / lo > 1.0 + 1e-13; ++it) {
    const double mid = std::sqrt(lo * hi);
    if (budget(mid) > 1.0)
      lo = mid;
    else
      hi = mid;
  }
  out.lambda_star = std::sqrt(lo * hi);
  const double L = gauss_hermite_expectation(nodes, mean, sd, [&](double g) {
    return k.conjugate(out.lambda_star * disc * std::exp(g));
  });
  out.dual_value = L + out.lambda_star;
  return out;
}

McStat log_one_period_value(const MarketModel& model, double x0,
                            const PathBundle& bundle) {
  if (!(x0 > 0.0)) throw std::invalid_argument("x0 must be > 0");
  std::vector<double> scratch;
  return log_value_with_x0(model, x0, bundle, scratch);
}

McStat artificial_dual_value(const MarketModel& model, const UtilitySpec& spec,
                             const GridFunction& A, const DualControl& nu,
                             double z, double lambda, const PathBundle& bundle) {
  if (spec.kind != UtilityKind::Power || spec.alpha >= 0.0)
    throw std::invalid_argument("artificial dual requires alpha < 0");
  if (!(z > 0.0) || !(lambda > 0.0))
    throw std::domain_error("z and lambda must be > 0");
  const std::int64_t n = bundle.cfg.n_paths;
  const int K = bundle.cfg.n_steps;
  const double dt = bundle.dt();
  const double B = std::exp(model.r * bundle.cfg.tau);
  std::vector<double> vals(n);
  detail::parallel_paths(n, [&](std::int64_t p0, std::int64_t p1) {
    for (std::int64_t p = p0; p < p1; ++p) {
      const double* Yp = &bundle.Y[static_cast<std::size_t>(p) * (K + 1)];
      const double* d1 = &bundle.dW1[static_cast<std::size_t>(p) * K];
      double le_nu = 0.0, le_th = 0.0;
      for (int k = 0; k < K; ++k) {
        const double th = theta(model, Yp[k]);
        const double nv = nu(bundle.times[k], Yp[k]);
        le_nu += nv * d1[k] - 0.5 * nv * nv * dt;
        le_th += -th * d1[k] - 0.5 * th * th * dt;
      }
      const double w = z * B * std::exp(le_nu - le_th) / lambda;
      const double yt = Yp[K];
      const ModifiedUtility k{spec.alpha, spec.gamma, spec.h(yt),
                              A.empty() ? 0.0 : A(yt)};
      vals[p] = -k.value(w);
    }
  });
  return mc_stat(vals);
}

}  // namespace periopt
