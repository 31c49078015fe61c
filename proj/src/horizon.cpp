#include "periopt/horizon.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "interp.hpp"
#include "parallel.hpp"

namespace periopt {

double GridSolutions::lambda_at(double y) const {
  std::size_t i;
  double w;
  detail::locate(y_grid, y, i, w);
  if (y_grid.size() == 1) return lambda_star[0];
  return (1.0 - w) * lambda_star[i] + w * lambda_star[i + 1];
}

DualControl GridSolutions::eta_at(double y) const {
  std::size_t i;
  double w;
  detail::locate(y_grid, y, i, w);
  if (y_grid.size() == 1 || w == 0.0) return eta_star[i];
  return DualControl::blend(eta_star[i], eta_star[i + 1], w);
}

bool GridSolutions::all_certified() const {
  return std::all_of(certified.begin(), certified.end(),
                     [](bool b) { return b; });
}

GridSolutions solve_on_grid(const MarketModel& model, const UtilitySpec& spec,
                            const GridFunction& A_star,
                            const FixedPointConfig& cfg) {
  GridSolutions out;
  out.y_grid = cfg.y_grid;
  const bool quad = cfg.engine == InnerEngine::Quadrature ||
                    (cfg.engine == InnerEngine::Auto &&
                     model.has_constant_price_coefficients() &&
                     (model.has_frozen_factor() ||
                      (spec.h.is_constant() && A_star.is_constant())));
  for (double y : cfg.y_grid) {
    if (quad) {
      const QuadOnePeriod q = quadrature_solve_constant(
          model, spec, spec.h(y), A_star.empty() ? 0.0 : A_star(y),
          cfg.quad_nodes);
      out.lambda_star.push_back(q.lambda_star);
      out.eta_star.push_back(DualControl::zero(1, 1, spec.tau, y - 1.0,
                                               y + 1.0, cfg.solver.eta_max));
      out.certified.push_back(true);
    } else {
      const OnePeriodSolution sol = solve_dual(model, spec, A_star, y,
                                               cfg.solver, 1.0);
      out.lambda_star.push_back(sol.lambda_star);
      out.eta_star.push_back(sol.eta_star);
      bool cert = true;
      if (sol.has_primal) {
        const double tol = cfg.gap_tol_rel * std::abs(sol.dual_value.mean);
        cert = sol.gap <= std::max(tol, 3.0 * combined_se(sol.dual_value.se,
                                                          sol.primal_value.se));
      }
      out.certified.push_back(cert);
    }
  }
  return out;
}

namespace {

SimulationConfig period_sim(const HorizonPlan& plan) {
  SimulationConfig sim;
  sim.n_paths = plan.n_paths;
  sim.n_steps = plan.n_steps;
  sim.seed = plan.seed;
  sim.tau = plan.tau;
  return sim;
}

WealthSequence make_sequence(const HorizonPlan& plan, double x0, double y0) {
  WealthSequence seq;
  seq.n_periods = plan.n_periods;
  seq.n_paths = plan.n_paths;
  const std::size_t rows = static_cast<std::size_t>(plan.n_periods + 1);
  seq.X.assign(rows * plan.n_paths, x0);
  seq.Y.assign(rows * plan.n_paths, y0);
  seq.ZoverB.assign(rows * plan.n_paths, 1.0);
  return seq;
}

}  // namespace

WealthSequence concatenate_optimal_wealth(const MarketModel& model,
                                          const UtilitySpec& spec,
                                          const GridFunction& A_star,
                                          const GridSolutions& solutions,
                                          double x0, double y0,
                                          const HorizonPlan& plan,
                                          bool allow_uncertified) {
  if (spec.kind != UtilityKind::Power)
    throw std::invalid_argument("concatenation targets the power kind");
  if (!solutions.all_certified() && !allow_uncertified)
    throw std::runtime_error(
        "uncertified one-period solution; pass --allow-uncertified to proceed");
  if (!(x0 > 0.0)) throw std::invalid_argument("x0 must be > 0");

  WealthSequence seq = make_sequence(plan, x0, y0);
  const double disc = std::exp(-model.r * plan.tau);
  std::vector<double> starts(static_cast<std::size_t>(plan.n_paths), y0);

  for (int n = 1; n <= plan.n_periods; ++n) {
    PathBundle bundle = simulate_factor_from(model, starts, period_sim(plan),
                                             static_cast<std::uint64_t>(n));
    const int K = bundle.cfg.n_steps;
    const double dt = bundle.dt();
    detail::parallel_paths(plan.n_paths, [&](std::int64_t p0, std::int64_t p1) {
      for (std::int64_t p = p0; p < p1; ++p) {
        const double y_start = starts[static_cast<std::size_t>(p)];
        const double lambda = solutions.lambda_at(y_start);
        const DualControl eta = solutions.eta_at(y_start);
        const double* Yp = &bundle.Y[static_cast<std::size_t>(p) * (K + 1)];
        const double* d1 = &bundle.dW1[static_cast<std::size_t>(p) * K];
        const double* d2 = &bundle.dW2[static_cast<std::size_t>(p) * K];
        double lz = 0.0;
        for (int k = 0; k < K; ++k) {
          const double th = theta(model, Yp[k]);
          const double ev = eta(bundle.times[k], Yp[k]);
          lz += -th * d1[k] + ev * d2[k] - 0.5 * (th * th + ev * ev) * dt;
        }
        const double z_ratio = std::exp(lz) * disc;  // (Z_{T_n}/B_{T_n}) ratio
        const double yt = Yp[K];
        const ModifiedUtility ker{spec.alpha, spec.gamma, spec.h(yt),
                                  A_star(yt)};
        const double ratio = ker.inverse_marginal(lambda * z_ratio);
        const std::size_t prev = static_cast<std::size_t>(n - 1) * plan.n_paths + p;
        const std::size_t cur = static_cast<std::size_t>(n) * plan.n_paths + p;
        seq.X[cur] = seq.X[prev] * ratio;
        seq.Y[cur] = yt;
        seq.ZoverB[cur] = seq.ZoverB[prev] * z_ratio;
      }
    });
    for (std::int64_t p = 0; p < plan.n_paths; ++p)
      starts[static_cast<std::size_t>(p)] =
          seq.Y[static_cast<std::size_t>(n) * plan.n_paths + p];
  }
  return seq;
}

WealthSequence log_optimal_wealth(const MarketModel& model, double x0,
                                  double y0, const HorizonPlan& plan) {
  if (!(x0 > 0.0)) throw std::invalid_argument("x0 must be > 0");
  WealthSequence seq = make_sequence(plan, x0, y0);
  const double disc = std::exp(-model.r * plan.tau);
  std::vector<double> starts(static_cast<std::size_t>(plan.n_paths), y0);

  for (int n = 1; n <= plan.n_periods; ++n) {
    PathBundle bundle = simulate_factor_from(model, starts, period_sim(plan),
                                             static_cast<std::uint64_t>(n));
    const int K = bundle.cfg.n_steps;
    const double dt = bundle.dt();
    detail::parallel_paths(plan.n_paths, [&](std::int64_t p0, std::int64_t p1) {
      for (std::int64_t p = p0; p < p1; ++p) {
        const double* Yp = &bundle.Y[static_cast<std::size_t>(p) * (K + 1)];
        const double* d1 = &bundle.dW1[static_cast<std::size_t>(p) * K];
        double lz = 0.0;
        for (int k = 0; k < K; ++k) {
          const double th = theta(model, Yp[k]);
          lz += -th * d1[k] - 0.5 * th * th * dt;
        }
        const double z_ratio = std::exp(lz) * disc;
        const std::size_t prev = static_cast<std::size_t>(n - 1) * plan.n_paths + p;
        const std::size_t cur = static_cast<std::size_t>(n) * plan.n_paths + p;
        // X* = x B / Z^0, so the deflated optimum X* Z/B stays at x pathwise
        seq.X[cur] = seq.X[prev] / z_ratio;
        seq.Y[cur] = Yp[K];
        seq.ZoverB[cur] = seq.ZoverB[prev] * z_ratio;
      }
    });
    for (std::int64_t p = 0; p < plan.n_paths; ++p)
      starts[static_cast<std::size_t>(p)] =
          seq.Y[static_cast<std::size_t>(n) * plan.n_paths + p];
  }
  return seq;
}

WealthSequence policy_wealth(const MarketModel& model,
                             const FeedbackPolicy& policy, double x0, double y0,
                             const HorizonPlan& plan) {
  if (!(x0 > 0.0)) throw std::invalid_argument("x0 must be > 0");
  WealthSequence seq = make_sequence(plan, x0, y0);
  const double disc = std::exp(-model.r * plan.tau);
  std::vector<double> starts(static_cast<std::size_t>(plan.n_paths), y0);

  for (int n = 1; n <= plan.n_periods; ++n) {
    PathBundle bundle = simulate_factor_from(model, starts, period_sim(plan),
                                             static_cast<std::uint64_t>(n));
    const int K = bundle.cfg.n_steps;
    const double dt = bundle.dt();
    detail::parallel_paths(plan.n_paths, [&](std::int64_t p0, std::int64_t p1) {
      for (std::int64_t p = p0; p < p1; ++p) {
        const double* Yp = &bundle.Y[static_cast<std::size_t>(p) * (K + 1)];
        const double* d1 = &bundle.dW1[static_cast<std::size_t>(p) * K];
        double lx = 0.0, lz = 0.0;
        for (int k = 0; k < K; ++k) {
          const double y = Yp[k];
          double pi = policy.value(model, bundle.times[k], y);
          pi = std::clamp(pi, -policy.pi_max, policy.pi_max);
          const double mu = model.mu(y);
          const double sg = model.sigma(y);
          const double th = theta(model, y);
          lx += (model.r + (mu - model.r) * pi - 0.5 * sg * sg * pi * pi) * dt +
                sg * pi * d1[k];
          lz += -th * d1[k] - 0.5 * th * th * dt;
        }
        const std::size_t prev = static_cast<std::size_t>(n - 1) * plan.n_paths + p;
        const std::size_t cur = static_cast<std::size_t>(n) * plan.n_paths + p;
        seq.X[cur] = seq.X[prev] * std::exp(lx);
        seq.Y[cur] = Yp[K];
        seq.ZoverB[cur] = seq.ZoverB[prev] * std::exp(lz) * disc;
      }
    });
    for (std::int64_t p = 0; p < plan.n_paths; ++p)
      starts[static_cast<std::size_t>(p)] =
          seq.Y[static_cast<std::size_t>(n) * plan.n_paths + p];
  }
  return seq;
}

double log_optimal_policy(const MarketModel& model, double y) {
  const double s = model.sigma(y);
  if (!(s > 0.0))
    throw std::domain_error("volatility must be strictly positive");
  return (model.mu(y) - model.r) / (s * s);
}

double objective_tail_bound(const MarketModel& model, const UtilitySpec& spec,
                            double x0, int n_periods) {
  const double tau = spec.tau, d = spec.delta;
  const int N = n_periods;
  if (spec.kind == UtilityKind::Log) {
    // sum_{i>N} q^i (a + b i) with q = e^{-delta tau}
    const double q = std::exp(-d * tau);
    const double qn1 = std::pow(q, N + 1);
    const double Q0 = qn1 / (1.0 - q);
    const double Q1 = qn1 * ((N + 1.0) - N * q) / ((1.0 - q) * (1.0 - q));
    const double up_rate = (model.r + model.M0 / 2.0) * tau;
    const double a_up = 1.0 + (1.0 - spec.gamma) * std::log(x0) +
                        up_rate * spec.gamma;
    const double b_up = up_rate * (1.0 - spec.gamma);
    const double a_lo = spec.m + (1.0 - spec.gamma) * std::log(x0) +
                        model.r * tau * spec.gamma;
    const double b_lo = model.r * tau * (1.0 - spec.gamma);
    const double t_up = a_up * Q0 + b_up * Q1;
    const double t_lo = a_lo * Q0 + b_lo * Q1;
    return std::max(std::abs(t_up), std::abs(t_lo));
  }
  // geometric chains from the value-bound endpoints
  const double a = spec.alpha, g = spec.gamma;
  const double xs = std::pow(x0, a * (1.0 - g));
  const double za = zeta(model.r, model.M0, a);
  const double zag = zeta(model.r, model.M0, a * (1.0 - g));
  const auto chain = [&](double period_rate, double growth_rate) {
    // sum_{i>N} e^{-delta i tau} e^{period_rate tau} e^{growth_rate (i-1) tau}
    const double ratio = std::exp((growth_rate - d) * tau);
    const double first = std::exp(-d * (N + 1.0) * tau +
                                  growth_rate * N * tau + period_rate * tau);
    return first / (1.0 - ratio);
  };
  const double t_growth = std::abs(chain(za, zag) * xs / a);
  const double t_cash =
      std::abs(chain(model.r * a, model.r * a * (1.0 - g)) * xs / a);
  return std::max(t_growth, t_cash);
}

ObjectiveEstimate evaluate_objective(const UtilitySpec& spec,
                                     const MarketModel& model,
                                     const WealthSequence& seq, double x0) {
  ObjectiveEstimate out;
  out.n_periods = seq.n_periods;
  const std::int64_t np = seq.n_paths;
  std::vector<double> acc(static_cast<std::size_t>(np), 0.0);
  for (int n = 1; n <= seq.n_periods; ++n) {
    const double w = std::exp(-spec.delta * spec.tau * n);
    for (std::int64_t p = 0; p < np; ++p) {
      const double ratio =
          seq.x_at(n, p) / std::pow(seq.x_at(n - 1, p), spec.gamma);
      const double hy = spec.h(seq.y_at(n, p));
      double u;
      if (spec.kind == UtilityKind::Log)
        u = std::log(ratio) + hy;
      else
        u = std::pow(ratio, spec.alpha) * hy / spec.alpha;
      acc[static_cast<std::size_t>(p)] += w * u;
    }
  }
  out.value = mc_stat(acc);
  out.tail_bound = objective_tail_bound(model, spec, x0, seq.n_periods);
  return out;
}

std::vector<double> d_series_at(const UtilitySpec& spec,
                                const GridFunction& A_star,
                                const WealthSequence& seq, int n) {
  const std::int64_t np = seq.n_paths;
  const double cs =
      spec.kind == UtilityKind::Log ? C_star(spec.gamma, spec.delta, spec.tau)
                                    : 0.0;
  std::vector<double> out(static_cast<std::size_t>(np), 0.0);
  for (std::int64_t p = 0; p < np; ++p) {
    double d = 0.0;
    for (int i = 1; i <= n; ++i) {
      const double w = std::exp(-spec.delta * spec.tau * i);
      const double ratio =
          seq.x_at(i, p) / std::pow(seq.x_at(i - 1, p), spec.gamma);
      const double hy = spec.h(seq.y_at(i, p));
      d += w * (spec.kind == UtilityKind::Log
                    ? std::log(ratio) + hy
                    : std::pow(ratio, spec.alpha) * hy / spec.alpha);
    }
    const double wn = std::exp(-spec.delta * spec.tau * n);
    const double xn = seq.x_at(n, p);
    const double an = A_star(seq.y_at(n, p));
    if (spec.kind == UtilityKind::Log)
      d += wn * (an + cs * std::log(xn));
    else
      d += wn * an * std::pow(xn, spec.alpha * (1.0 - spec.gamma)) / spec.alpha;
    out[static_cast<std::size_t>(p)] = d;
  }
  return out;
}

DriftReport supermartingale_check(const MarketModel& model,
                                  const UtilitySpec& spec,
                                  const GridFunction& A_star,
                                  const WealthSequence& seq,
                                  const HorizonPlan& plan) {
  (void)model;
  DriftReport rep;
  const std::int64_t np = seq.n_paths;
  const double cs =
      spec.kind == UtilityKind::Log ? C_star(spec.gamma, spec.delta, spec.tau)
                                    : 0.0;
  rep.bins.resize(static_cast<std::size_t>(seq.n_periods));

  std::vector<double> inc(static_cast<std::size_t>(np));
  std::vector<std::int64_t> order(static_cast<std::size_t>(np));
  for (int n = 0; n < seq.n_periods; ++n) {
    // D_{n+1} - D_n per path
    const double wn = std::exp(-spec.delta * spec.tau * n);
    const double wn1 = std::exp(-spec.delta * spec.tau * (n + 1));
    for (std::int64_t p = 0; p < np; ++p) {
      const double ratio =
          seq.x_at(n + 1, p) / std::pow(seq.x_at(n, p), spec.gamma);
      const double hy = spec.h(seq.y_at(n + 1, p));
      const double a1 = A_star(seq.y_at(n + 1, p));
      const double a0 = A_star(seq.y_at(n, p));
      double v;
      if (spec.kind == UtilityKind::Log) {
        v = wn1 * (std::log(ratio) + hy + a1 + cs * std::log(seq.x_at(n + 1, p))) -
            wn * (a0 + cs * std::log(seq.x_at(n, p)));
      } else {
        const double ag = spec.alpha * (1.0 - spec.gamma);
        v = wn1 * (std::pow(ratio, spec.alpha) * hy +
                   a1 * std::pow(seq.x_at(n + 1, p), ag)) /
                spec.alpha -
            wn * a0 * std::pow(seq.x_at(n, p), ag) / spec.alpha;
      }
      inc[static_cast<std::size_t>(p)] = v;
    }

    // quantile bins on Y_{T_n}
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::int64_t a, std::int64_t b) {
      return seq.y_at(n, a) < seq.y_at(n, b);
    });
    const int nbins = std::max(1, plan.drift_bins);
    const std::int64_t nominal = (np + nbins - 1) / nbins;
    std::vector<DriftBin> bins;
    std::int64_t pos = 0;
    while (pos < np) {
      std::int64_t take = std::max(nominal, plan.min_bin_paths);
      take = std::min(take, np - pos);
      // merge a short trailing bin into this one
      if (np - (pos + take) > 0 && np - (pos + take) < plan.min_bin_paths)
        take = np - pos;
      DriftBin bin;
      bin.merged = take > nominal;
      std::vector<double> vals(static_cast<std::size_t>(take));
      for (std::int64_t i = 0; i < take; ++i)
        vals[static_cast<std::size_t>(i)] =
            inc[static_cast<std::size_t>(order[static_cast<std::size_t>(pos + i)])];
      const McStat st = mc_stat(vals);
      bin.count = take;
      bin.mean = st.mean;
      bin.se = st.se;
      bin.y_lo = seq.y_at(n, order[static_cast<std::size_t>(pos)]);
      bin.y_hi = seq.y_at(n, order[static_cast<std::size_t>(pos + take - 1)]);
      bins.push_back(bin);
      pos += take;
    }
    // degenerate factor (all paths equal) collapses to one bin via sort order
    if (bins.size() > 1 && bins.front().y_lo == bins.back().y_hi) {
      std::vector<DriftBin> one;
      const McStat st = mc_stat(inc);
      DriftBin bin;
      bin.count = np;
      bin.mean = st.mean;
      bin.se = st.se;
      bin.y_lo = bin.y_hi = bins.front().y_lo;
      bin.merged = true;
      one.push_back(bin);
      bins = one;
    }
    for (const DriftBin& b : bins) {
      double z;
      if (b.se > 0.0)
        z = b.mean / b.se;
      else if (std::abs(b.mean) < 1e-12)
        z = 0.0;
      else
        z = b.mean > 0.0 ? 1e9 : -1e9;  // deterministic nonzero drift
      rep.worst_up_z = std::max(rep.worst_up_z, z);
      rep.worst_abs_z = std::max(rep.worst_abs_z, std::abs(z));
    }
    rep.bins[static_cast<std::size_t>(n)] = std::move(bins);
  }
  return rep;
}

}  // namespace periopt
