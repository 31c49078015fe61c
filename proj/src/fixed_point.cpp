#include "periopt/fixed_point.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "parallel.hpp"
#include "periopt/quadrature.hpp"

namespace periopt {

namespace {

double log_first_coefficient(const UtilitySpec& spec) {
  // (1 - gamma e^{-delta tau}) / (e^{delta tau} - 1)
  const double edt = std::exp(spec.delta * spec.tau);
  return (1.0 - spec.gamma / edt) / (edt - 1.0);
}

bool quadrature_applicable(const MarketModel& model, const UtilitySpec& spec,
                           const GridFunction& A) {
  if (!model.has_constant_price_coefficients()) return false;
  if (model.has_frozen_factor()) return true;
  return spec.h.is_constant() && (A.empty() || A.is_constant());
}

InnerEngine resolve_engine(const FixedPointConfig& cfg,
                           const MarketModel& model, const UtilitySpec& spec,
                           const GridFunction& A) {
  if (cfg.engine != InnerEngine::Auto) return cfg.engine;
  return quadrature_applicable(model, spec, A) ? InnerEngine::Quadrature
                                               : InnerEngine::MonteCarlo;
}

}  // namespace

double contraction_factor(const MarketModel& model, const UtilitySpec& spec) {
  if (spec.kind == UtilityKind::Log)
    return std::exp(-spec.delta * spec.tau);
  const double zag =
      zeta(model.r, model.M0, spec.alpha * (1.0 - spec.gamma));
  return std::exp(-(spec.delta - zag) * spec.tau);
}

void fixed_point_interval_power(const MarketModel& model,
                                const UtilitySpec& spec, double& lower,
                                double& upper) {
  const double a = spec.alpha, g = spec.gamma, m = spec.m;
  const double d = spec.delta, tau = spec.tau, r = model.r;
  const double za = zeta(r, model.M0, a);
  const double zag = zeta(r, model.M0, a * (1.0 - g));
  const double cash_side =
      std::exp((r * a - d) * tau) /
      (1.0 - std::exp(-(d - r * a * (1.0 - g)) * tau));
  const double growth_side =
      std::exp((za - d) * tau) / (1.0 - std::exp(-(d - zag) * tau));
  if (a > 0.0) {
    lower = m * cash_side;
    upper = growth_side;
  } else {
    lower = m * growth_side;
    upper = cash_side;
  }
}

void fixed_point_interval_log(const MarketModel& model, const UtilitySpec& spec,
                              double& lower, double& upper) {
  const double d = spec.delta, tau = spec.tau;
  const double edt = std::exp(d * tau);
  const double coef = (edt - spec.gamma) / ((edt - 1.0) * (edt - 1.0));
  const double geo = std::exp(-d * tau) / (1.0 - std::exp(-d * tau));
  lower = coef * model.r * tau + spec.m * geo;
  upper = coef * (model.r + model.M0 / 2.0) * tau + geo;
}

PsiResult apply_Psi_power(const GridFunction& A, const MarketModel& model,
                          const UtilitySpec& spec, const FixedPointConfig& cfg,
                          std::uint64_t iteration) {
  if (spec.kind != UtilityKind::Power)
    throw std::invalid_argument("apply_Psi_power requires the power kind");
  const AssumptionReport ass = check_standing_assumption(model, spec);
  if (!ass.pass)
    throw std::runtime_error("standing assumption fails: " + ass.detail);
  const std::size_t n = cfg.y_grid.size();
  const double wrap = spec.alpha * std::exp(-spec.delta * spec.tau);

  PsiResult out;
  std::vector<double> vals(n, 0.0);
  out.se.assign(n, 0.0);
  out.gap.assign(n, std::numeric_limits<double>::quiet_NaN());
  out.lambda.assign(n, 1.0);

  const InnerEngine engine = resolve_engine(cfg, model, spec, A);
  if (engine == InnerEngine::Quadrature) {
    if (!quadrature_applicable(model, spec, A))
      throw std::invalid_argument(
          "quadrature engine needs constant price coefficients and either a "
          "frozen factor or constant h and A");
    for (std::size_t j = 0; j < n; ++j) {
      const double y = cfg.y_grid[j];
      const double hj = spec.h(y);
      const double Aj = A.empty() ? 0.0 : A(y);
      const QuadOnePeriod q =
          quadrature_solve_constant(model, spec, hj, Aj, cfg.quad_nodes);
      double v = wrap * q.dual_value;
      if (v < 0.0) {
        v = 0.0;
        ++out.clamped_negative;
      }
      vals[j] = v;
      out.lambda[j] = q.lambda_star;
      out.gap[j] = 0.0;
    }
    out.value = GridFunction(cfg.y_grid, std::move(vals));
    out.certified = true;
    return out;
  }

  bool all_certified = true;
  for (std::size_t j = 0; j < n; ++j) {
    OnePeriodConfig solver = cfg.solver;
    solver.stream = cfg.solver.stream + iteration;  // one seed family per sweep
    const OnePeriodSolution sol =
        solve_dual(model, spec, A, cfg.y_grid[j], solver, 1.0);
    double v = wrap * sol.dual_value.mean;
    if (v < 0.0) {
      v = 0.0;
      ++out.clamped_negative;
    }
    vals[j] = v;
    out.se[j] = std::abs(wrap) * sol.dual_value.se;
    out.lambda[j] = sol.lambda_star;
    if (sol.has_primal) {
      out.gap[j] = sol.gap;
      const double tol = cfg.gap_tol_rel * std::abs(sol.dual_value.mean);
      const double noise = 3.0 * combined_se(sol.dual_value.se,
                                             sol.primal_value.se);
      if (!(sol.gap <= std::max(tol, noise))) all_certified = false;
    } else {
      all_certified = false;
    }
  }
  out.value = GridFunction(cfg.y_grid, std::move(vals));
  out.certified = all_certified;
  return out;
}

PsiResult apply_Psi_log(const GridFunction& A, const MarketModel& model,
                        const UtilitySpec& spec, const FixedPointConfig& cfg,
                        std::uint64_t iteration) {
  if (spec.kind != UtilityKind::Log)
    throw std::invalid_argument("apply_Psi_log requires the log kind");
  spec.validate();
  const std::size_t n = cfg.y_grid.size();
  const double c1 = log_first_coefficient(spec);
  const double disc = std::exp(-spec.delta * spec.tau);

  PsiResult out;
  std::vector<double> vals(n, 0.0);
  out.se.assign(n, 0.0);
  out.gap.assign(n, 0.0);
  out.lambda.assign(n, 1.0);

  const InnerEngine engine = resolve_engine(cfg, model, spec, A);
  if (engine == InnerEngine::Quadrature) {
    const double th = theta(model, 0.0);
    const double sup_log = model.r * spec.tau + 0.5 * th * th * spec.tau;
    for (std::size_t j = 0; j < n; ++j) {
      const double y = cfg.y_grid[j];
      vals[j] = c1 * sup_log + disc * (spec.h(y) + (A.empty() ? 0.0 : A(y)));
    }
    out.value = GridFunction(cfg.y_grid, std::move(vals));
    out.certified = true;
    return out;
  }

  for (std::size_t j = 0; j < n; ++j) {
    SimulationConfig sim = cfg.solver.sim;
    PathBundle bundle = simulate_factor(model, cfg.y_grid[j], sim,
                                        cfg.solver.stream + iteration);
    const McStat lv = log_one_period_value(model, 1.0, bundle);
    std::vector<double> cont(static_cast<std::size_t>(bundle.cfg.n_paths));
    for (std::int64_t p = 0; p < bundle.cfg.n_paths; ++p) {
      const double yt = bundle.terminal_Y(p);
      cont[static_cast<std::size_t>(p)] =
          spec.h(yt) + (A.empty() ? 0.0 : A(yt));
    }
    const McStat cs = mc_stat(cont);
    vals[j] = c1 * lv.mean + disc * cs.mean;
    out.se[j] = combined_se(c1 * lv.se, disc * cs.se);
  }
  out.value = GridFunction(cfg.y_grid, std::move(vals));
  out.certified = true;  // log one-period value carries no duality gap
  return out;
}

namespace {

// Frozen-bundle inner values for the log iteration: the operator is affine
// in A, so the Monte Carlo work happens once per grid point and Picard runs
// on the sampled operator.
struct LogInner {
  std::vector<double> g;                     // per grid point
  std::vector<double> se_one;                // one-application SE
  std::vector<std::vector<double>> term_Y;   // terminal factor samples
};

LogInner build_log_inner(const MarketModel& model, const UtilitySpec& spec,
                         const FixedPointConfig& cfg) {
  const std::size_t n = cfg.y_grid.size();
  const double c1 = log_first_coefficient(spec);
  const double disc = std::exp(-spec.delta * spec.tau);
  LogInner inner;
  inner.g.resize(n);
  inner.se_one.resize(n);
  inner.term_Y.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    PathBundle bundle = simulate_factor(model, cfg.y_grid[j], cfg.solver.sim,
                                        cfg.solver.stream);
    const McStat lv = log_one_period_value(model, 1.0, bundle);
    const std::int64_t np = bundle.cfg.n_paths;
    std::vector<double> hvals(static_cast<std::size_t>(np));
    inner.term_Y[j].resize(static_cast<std::size_t>(np));
    for (std::int64_t p = 0; p < np; ++p) {
      const double yt = bundle.terminal_Y(p);
      inner.term_Y[j][static_cast<std::size_t>(p)] = yt;
      hvals[static_cast<std::size_t>(p)] = spec.h(yt);
    }
    const McStat hs = mc_stat(hvals);
    inner.g[j] = c1 * lv.mean + disc * hs.mean;
    inner.se_one[j] = combined_se(c1 * lv.se, disc * hs.se);
  }
  return inner;
}

}  // namespace

FixedPointResult iterate_to_fixed_point(const MarketModel& model,
                                        const UtilitySpec& spec,
                                        const FixedPointConfig& cfg,
                                        const std::optional<GridFunction>& A0) {
  spec.validate();
  model.validate_basic();
  if (cfg.y_grid.size() < 1)
    throw std::invalid_argument("fixed point needs a nonempty factor grid");
  const AssumptionReport ass = check_standing_assumption(model, spec);
  if (!ass.pass)
    throw std::runtime_error("standing assumption fails: " + ass.detail);

  FixedPointResult res;
  res.theoretical_q = contraction_factor(model, spec);
  const double q = res.theoretical_q;
  const double threshold = cfg.tol * (1.0 - q) / q;

  double lo = 0.0, hi = 0.0;
  if (spec.kind == UtilityKind::Power)
    fixed_point_interval_power(model, spec, lo, hi);
  else
    fixed_point_interval_log(model, spec, lo, hi);

  GridFunction A = A0.has_value()
                       ? *A0
                       : GridFunction::constant_on(cfg.y_grid, std::max(lo, 0.0));
  if (A.size() != cfg.y_grid.size())
    throw std::invalid_argument("A0 must live on the configured factor grid");

  const InnerEngine engine = resolve_engine(cfg, model, spec, A);
  res.engine = engine == InnerEngine::Quadrature ? "quadrature" : "mc";
  if (spec.kind == UtilityKind::Log) res.C_star = C_star(spec.gamma, spec.delta, spec.tau);

  const double disc = std::exp(-spec.delta * spec.tau);
  double prev_step = -1.0;

  if (spec.kind == UtilityKind::Log && engine == InnerEngine::MonteCarlo) {
    const LogInner inner = build_log_inner(model, spec, cfg);
    const std::size_t n = cfg.y_grid.size();
    for (int it = 0; it < cfg.max_iter; ++it) {
      std::vector<double> next(n);
      for (std::size_t j = 0; j < n; ++j) {
        const auto& ys = inner.term_Y[j];
        double acc = 0.0;
        for (double yt : ys) acc += A(yt);
        next[j] = inner.g[j] + disc * acc / static_cast<double>(ys.size());
      }
      GridFunction An(cfg.y_grid, std::move(next));
      const double step = sup_distance(An, A);
      if (prev_step > 0.0 && step > 0.0)
        res.contraction_ratios.push_back(step / prev_step);
      prev_step = step;
      A = std::move(An);
      res.iterations = it + 1;
      res.final_step = step;
      if (step <= threshold) {
        res.converged = true;
        break;
      }
    }
    res.se.assign(n, 0.0);
    for (std::size_t j = 0; j < n; ++j)
      res.se[j] = inner.se_one[j] / (1.0 - q);
    res.certified = res.converged;
  } else {
    std::vector<double> prev_se;
    double first_step = 0.0;
    for (int it = 0; it < cfg.max_iter; ++it) {
      PsiResult psi = spec.kind == UtilityKind::Power
                          ? apply_Psi_power(A, model, spec, cfg,
                                            static_cast<std::uint64_t>(it))
                          : apply_Psi_log(A, model, spec, cfg,
                                          static_cast<std::uint64_t>(it));
      res.clamped_negative += psi.clamped_negative;
      const double step = sup_distance(psi.value, A);
      if (it == 0) first_step = step;
      if (prev_step > 0.0 && step > 0.0)
        res.contraction_ratios.push_back(step / prev_step);
      prev_step = step;
      // seeds advance between sweeps, so the iterate difference carries the
      // noise of two independent applications; iterating below that floor
      // cannot improve the estimate
      double noise = 0.0;
      for (std::size_t j = 0; j < psi.se.size(); ++j) {
        const double sp = prev_se.empty() ? psi.se[j] : prev_se[j];
        noise = std::max(noise, combined_se(psi.se[j], sp));
      }
      prev_se = psi.se;
      A = psi.value;
      res.se = psi.se;
      res.lambda = psi.lambda;
      res.iterations = it + 1;
      res.final_step = step;
      const double stop = std::max(threshold, 3.0 * noise);
      if (step <= stop) {
        // steps sink below the noise floor while the iterate can still be
        // O(noise/(1-q)) away, so the floor stop may only fire once the
        // contraction has washed out the initial distance: q^n d_0 <= stop
        // with d_0 <= first_step q/(1-q) by the Banach chain bound
        bool washed_out = true;
        if (3.0 * noise > threshold && first_step > 0.0) {
          const double d0 = first_step * q / (1.0 - q);
          const double need =
              std::log(std::min(stop / d0, 1.0)) / std::log(q);
          washed_out = static_cast<double>(it) >= need;
        }
        if (washed_out) {
          res.converged = true;
          res.stopped_at_noise_floor = 3.0 * noise > threshold;
          res.certified = psi.certified;
          break;
        }
      }
    }
    // fixed-point error amplifies one-application noise by 1/(1-q)
    for (double& s : res.se) s /= (1.0 - q);
  }

  res.A_star = A;
  return res;
}

namespace {

// the interval inequalities are non-strict and can be attained (tight growth
// chains), so membership allows a relative float epsilon
BoundReport interval_report(const GridFunction& A_star, double lower,
                            double upper) {
  BoundReport rep;
  rep.lower = lower;
  rep.upper = upper;
  rep.min_margin_lower = A_star.min_value() - lower;
  rep.min_margin_upper = upper - A_star.max_value();
  const double eps =
      1e-9 * std::max({1.0, std::abs(lower), std::abs(upper)});
  rep.pass = rep.min_margin_lower >= -eps && rep.min_margin_upper >= -eps;
  return rep;
}

}  // namespace

BoundReport check_bounds_power(const FixedPointResult& result,
                               const MarketModel& model,
                               const UtilitySpec& spec) {
  double lo = 0.0, hi = 0.0;
  fixed_point_interval_power(model, spec, lo, hi);
  return interval_report(result.A_star, lo, hi);
}

BoundReport check_bounds_log(const FixedPointResult& result,
                             const MarketModel& model, const UtilitySpec& spec) {
  double lo = 0.0, hi = 0.0;
  fixed_point_interval_log(model, spec, lo, hi);
  return interval_report(result.A_star, lo, hi);
}

double C_star(double gamma, double delta, double tau) {
  return (1.0 - gamma) / (std::exp(delta * tau) - 1.0);
}

double value_function(const FixedPointResult& result, const UtilitySpec& spec,
                      double x, double y) {
  if (!(x > 0.0)) throw std::domain_error("wealth x must be > 0");
  const double a_val = result.A_star(y);
  if (spec.kind == UtilityKind::Log)
    return a_val + C_star(spec.gamma, spec.delta, spec.tau) * std::log(x);
  return a_val * std::pow(x, spec.alpha * (1.0 - spec.gamma)) / spec.alpha;
}

ValueBoundsReport value_bounds_check(const MarketModel& model,
                                     const UtilitySpec& spec, double x,
                                     double y, double V) {
  (void)y;
  if (!(x > 0.0)) throw std::domain_error("wealth x must be > 0");
  ValueBoundsReport rep;
  rep.value = V;
  if (spec.kind == UtilityKind::Log) {
    const double edt = std::exp(spec.delta * spec.tau);
    const double cs = C_star(spec.gamma, spec.delta, spec.tau);
    const double coef = (edt - spec.gamma) / ((edt - 1.0) * (edt - 1.0));
    rep.lower = cs * std::log(x) + spec.m / (edt - 1.0) +
                model.r * spec.tau * coef;
    rep.upper = cs * std::log(x) + 1.0 / (edt - 1.0) +
                (model.r + model.M0 / 2.0) * spec.tau * coef;
  } else {
    const double a = spec.alpha, g = spec.gamma, m = spec.m;
    const double d = spec.delta, tau = spec.tau, r = model.r;
    const double za = zeta(r, model.M0, a);
    const double zag = zeta(r, model.M0, a * (1.0 - g));
    const double xs = std::pow(x, a * (1.0 - g));
    const double ind_pos = a > 0.0 ? 1.0 : 0.0;
    const double ind_neg = a < 0.0 ? 1.0 : 0.0;
    rep.lower = (m * ind_pos + ind_neg) * std::exp((r * a - d) * tau) /
                (a * (1.0 - std::exp(-(d - r * a * (1.0 - g)) * tau))) * xs;
    rep.upper = (ind_pos + m * ind_neg) * std::exp((za - d) * tau) /
                (a * (1.0 - std::exp((zag - d) * tau))) * xs;
  }
  const double slack = 1e-9 * (std::abs(rep.lower) + std::abs(rep.upper));
  rep.pass = V >= rep.lower - slack && V <= rep.upper + slack;
  return rep;
}

}  // namespace periopt
