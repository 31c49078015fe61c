#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "periopt/horizon.hpp"
#include "test_helpers.hpp"

using namespace periopt;
using namespace test_helpers;

namespace {

HorizonPlan plan_of(int periods, std::int64_t paths, std::uint64_t seed = 7) {
  HorizonPlan p;
  p.n_periods = periods;
  p.n_paths = paths;
  p.n_steps = 64;
  p.seed = seed;
  p.tau = 1.0;
  return p;
}

// two-sample Kolmogorov-Smirnov statistic
double ks_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j])
      ++i;
    else
      ++j;
    const double fa = static_cast<double>(i) / a.size();
    const double fb = static_cast<double>(j) / b.size();
    d = std::max(d, std::abs(fa - fb));
  }
  return d;
}

GridSolutions quad_solutions(const MarketModel& m, const UtilitySpec& s,
                             const GridFunction& A_star,
                             const std::vector<double>& grid) {
  FixedPointConfig cfg;
  cfg.y_grid = grid;
  cfg.engine = InnerEngine::Quadrature;
  return solve_on_grid(m, s, A_star, cfg);
}

}  // namespace

TEST_CASE("log optimal policy closed form") {
  MarketModel m = constant_market(0.1, 0.2, 0.02);
  CHECK(log_optimal_policy(m, 0.0) == doctest::Approx(2.0));
  m.mu = CoefficientFunction::constant(m.r);
  CHECK(log_optimal_policy(m, 1.0) == doctest::Approx(0.0));
  m.sigma = CoefficientFunction::constant(0.0);
  CHECK_THROWS_AS(log_optimal_policy(m, 0.0), std::domain_error);
}

TEST_CASE("log optimal wealth has the stated lognormal ratio law") {
  MarketModel m = constant_market(0.1, 0.2, 0.02);  // theta = 0.4
  const HorizonPlan plan = plan_of(1, 1 << 14);
  const WealthSequence seq = log_optimal_wealth(m, 1.0, 0.0, plan);
  std::vector<double> lr(static_cast<std::size_t>(plan.n_paths));
  for (std::int64_t p = 0; p < plan.n_paths; ++p)
    lr[static_cast<std::size_t>(p)] = std::log(seq.x_at(1, p));
  const McStat st = mc_stat(lr);
  CHECK(std::abs(st.mean - (0.02 + 0.08)) <= 3.0 * st.se);

  // deflated optimum X* Z / B == x pathwise for the log construction
  for (std::int64_t p = 0; p < 16; ++p)
    CHECK(seq.x_at(1, p) * seq.z_at(1, p) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("power concatenation: one period reduces to the one-period optimum") {
  MarketModel m = constant_market(0.1, 0.2, 0.02);
  const UtilitySpec s = power_spec(0.5, 0.5, 0.1, 1.0, 0.9, 0.9);
  FixedPointConfig cfg;
  cfg.y_grid = default_grid(-1.0, 1.0, 3);
  cfg.engine = InnerEngine::Quadrature;
  const FixedPointResult fp = iterate_to_fixed_point(m, s, cfg);
  const GridSolutions sols = quad_solutions(m, s, fp.A_star, cfg.y_grid);

  const HorizonPlan plan = plan_of(1, 1 << 14);
  const WealthSequence seq =
      concatenate_optimal_wealth(m, s, fp.A_star, sols, 1.0, 0.0, plan);

  // budget binding at the first date within noise
  std::vector<double> defl(static_cast<std::size_t>(plan.n_paths));
  for (std::int64_t p = 0; p < plan.n_paths; ++p)
    defl[static_cast<std::size_t>(p)] = seq.x_at(1, p) * seq.z_at(1, p);
  const McStat st = mc_stat(defl);
  CHECK(std::abs(st.mean - 1.0) <= 3.0 * st.se);
}

TEST_CASE("power concatenation is stationary across periods") {
  MarketModel m = constant_market(0.1, 0.2, 0.02);
  const UtilitySpec s = power_spec(0.5, 0.5, 0.1, 1.0, 0.9, 0.9);
  FixedPointConfig cfg;
  cfg.y_grid = default_grid(-1.0, 1.0, 3);
  cfg.engine = InnerEngine::Quadrature;
  const FixedPointResult fp = iterate_to_fixed_point(m, s, cfg);
  const GridSolutions sols = quad_solutions(m, s, fp.A_star, cfg.y_grid);

  const HorizonPlan plan = plan_of(4, 1 << 13);
  const WealthSequence seq =
      concatenate_optimal_wealth(m, s, fp.A_star, sols, 1.0, 0.0, plan);
  std::vector<double> r1(static_cast<std::size_t>(plan.n_paths));
  std::vector<double> r4(static_cast<std::size_t>(plan.n_paths));
  for (std::int64_t p = 0; p < plan.n_paths; ++p) {
    r1[static_cast<std::size_t>(p)] = std::log(seq.x_at(1, p) / seq.x_at(0, p));
    r4[static_cast<std::size_t>(p)] = std::log(seq.x_at(4, p) / seq.x_at(3, p));
  }
  const double d = ks_statistic(r1, r4);
  // 1% two-sample critical value: 1.628 sqrt((n+m)/(nm))
  const double crit = 1.628 * std::sqrt(2.0 / plan.n_paths);
  CHECK(d < crit);

  // budget chain E[X_n Z_n / B_n] = x0 at every date
  for (int n = 1; n <= plan.n_periods; ++n) {
    std::vector<double> defl(static_cast<std::size_t>(plan.n_paths));
    for (std::int64_t p = 0; p < plan.n_paths; ++p)
      defl[static_cast<std::size_t>(p)] = seq.x_at(n, p) * seq.z_at(n, p);
    const McStat st = mc_stat(defl);
    CHECK(std::abs(st.mean - 1.0) <= 3.0 * st.se);
  }
}

TEST_CASE("uncertified period solutions are refused") {
  MarketModel m = constant_market(0.1, 0.2, 0.02);
  const UtilitySpec s = power_spec(0.5, 0.5, 0.1, 1.0, 0.9, 0.9);
  GridSolutions sols;
  sols.y_grid = {0.0};
  sols.lambda_star = {1.0};
  sols.eta_star = {DualControl::zero(1, 1, 1.0, -1.0, 1.0)};
  sols.certified = {false};
  const GridFunction A = GridFunction::constant_on({0.0}, 13.0);
  CHECK_THROWS_AS(concatenate_optimal_wealth(m, s, A, sols, 1.0, 0.0,
                                             plan_of(1, 16), false),
                  std::runtime_error);
  CHECK_NOTHROW(concatenate_optimal_wealth(m, s, A, sols, 1.0, 0.0,
                                           plan_of(1, 16), true));
}

TEST_CASE("cash objective matches the log lower-bound closed form exactly") {
  MarketModel m = constant_market(0.1, 0.2, 0.02);
  UtilitySpec s = log_spec(0.5, 0.1, 1.0, 0.8, 0.8);
  const double x0 = 2.0;
  const HorizonPlan plan = plan_of(120, 64);
  const WealthSequence seq = policy_wealth(m, FeedbackPolicy::cash(), x0, 0.0,
                                           plan);
  const ObjectiveEstimate est = evaluate_objective(s, m, seq, x0);
  CHECK(est.value.se == doctest::Approx(0.0));
  const double edt = std::exp(0.1);
  const double closed = 0.5 / (edt - 1.0) * std::log(x0) + 0.8 / (edt - 1.0) +
                        0.02 * (edt - 0.5) / ((edt - 1.0) * (edt - 1.0));
  CHECK(std::abs(est.value.mean - closed) <= est.tail_bound + 1e-12);
  CHECK(est.tail_bound < 1e-3);
}

TEST_CASE("optimal log objective converges to the value function") {
  MarketModel m = ou_market();
  UtilitySpec s = log_spec(0.5, 0.1, 1.0, 0.8, 0.8);
  const auto grid = default_grid(-1.4, 1.4, 9);
  std::vector<double> hv;
  for (double y : grid) hv.push_back(0.8 + 0.15 / (1.0 + std::exp(-y)));
  s.h = GridFunction(grid, hv);

  FixedPointConfig cfg;
  cfg.y_grid = grid;
  cfg.engine = InnerEngine::MonteCarlo;
  cfg.tol = 1e-5;
  cfg.max_iter = 400;
  cfg.solver.sim.n_paths = 1 << 13;
  cfg.solver.sim.n_steps = 64;
  cfg.solver.sim.seed = 42;
  const FixedPointResult fp = iterate_to_fixed_point(m, s, cfg);
  CHECK(fp.converged);

  const double x0 = 1.5;
  const HorizonPlan plan = plan_of(80, 1 << 12, 9);
  const WealthSequence seq = log_optimal_wealth(m, x0, 0.0, plan);
  const ObjectiveEstimate est = evaluate_objective(s, m, seq, x0);
  const double V = value_function(fp, s, x0, 0.0);
  CHECK(std::abs(est.value.mean - V) <=
        est.tail_bound + 3.0 * est.value.se + 3.0 * fp.se[grid.size() / 2]);

  // objective dominance over suboptimal policies
  const WealthSequence cash = policy_wealth(m, FeedbackPolicy::cash(), x0, 0.0,
                                            plan);
  const ObjectiveEstimate worse = evaluate_objective(s, m, cash, x0);
  CHECK(est.value.mean >=
        worse.value.mean - 3.0 * combined_se(est.value.se, worse.value.se));

  // log scaling: doubling x adds C* log 2
  const WealthSequence seq2 = log_optimal_wealth(m, 2.0 * x0, 0.0, plan);
  const ObjectiveEstimate est2 = evaluate_objective(s, m, seq2, 2.0 * x0);
  const double shift = C_star(0.5, 0.1, 1.0) * std::log(2.0);
  CHECK(std::abs(est2.value.mean - est.value.mean - shift) <=
        3.0 * combined_se(est.value.se, est2.value.se) + 1e-9);
}

TEST_CASE("tail bound shrinks geometrically (power)") {
  MarketModel m = constant_market(0.1, 0.2, 0.02);
  const UtilitySpec s = power_spec(0.5, 0.5, 0.1, 1.0, 0.9, 0.9);
  const double ratio = std::exp(-(0.1 - zeta(0.02, 0.16, 0.25)) * 1.0);
  double prev = objective_tail_bound(m, s, 1.0, 10);
  for (int n = 11; n <= 15; ++n) {
    const double cur = objective_tail_bound(m, s, 1.0, n);
    CHECK(cur == doctest::Approx(prev * ratio).epsilon(1e-9));
    prev = cur;
  }
}

TEST_CASE("power scaling of the estimated objective") {
  MarketModel m = constant_market(0.1, 0.2, 0.02);
  const UtilitySpec s = power_spec(0.5, 0.5, 0.1, 1.0, 0.9, 0.9);
  FixedPointConfig cfg;
  cfg.y_grid = {0.0};
  cfg.engine = InnerEngine::Quadrature;
  const FixedPointResult fp = iterate_to_fixed_point(m, s, cfg);
  const GridSolutions sols = quad_solutions(m, s, fp.A_star, cfg.y_grid);

  const HorizonPlan plan = plan_of(6, 1 << 12);
  const WealthSequence a =
      concatenate_optimal_wealth(m, s, fp.A_star, sols, 1.0, 0.0, plan);
  const WealthSequence b =
      concatenate_optimal_wealth(m, s, fp.A_star, sols, 2.0, 0.0, plan);
  const ObjectiveEstimate ea = evaluate_objective(s, m, a, 1.0);
  const ObjectiveEstimate eb = evaluate_objective(s, m, b, 2.0);
  const double scale = std::pow(2.0, 0.25);
  CHECK(std::abs(eb.value.mean - scale * ea.value.mean) <=
        3.0 * combined_se(scale * ea.value.se, eb.value.se) + 1e-9);
}

TEST_CASE("drift checks: optimum is a martingale, cash drifts down") {
  MarketModel m = constant_market(0.1, 0.2, 0.02);
  const UtilitySpec s = power_spec(0.5, 0.5, 0.1, 1.0, 0.9, 0.9);
  FixedPointConfig cfg;
  cfg.y_grid = {0.0};
  cfg.engine = InnerEngine::Quadrature;
  cfg.tol = 1e-8;
  const FixedPointResult fp = iterate_to_fixed_point(m, s, cfg);
  const GridSolutions sols = quad_solutions(m, s, fp.A_star, cfg.y_grid);

  const HorizonPlan plan = plan_of(4, 1 << 14);
  const WealthSequence opt =
      concatenate_optimal_wealth(m, s, fp.A_star, sols, 1.0, 0.0, plan);
  const DriftReport dr = supermartingale_check(m, s, fp.A_star, opt, plan);
  CHECK(dr.martingale_pass(3.0));

  const WealthSequence cash = policy_wealth(m, FeedbackPolicy::cash(), 1.0,
                                            0.0, plan);
  const DriftReport dc = supermartingale_check(m, s, fp.A_star, cash, plan);
  CHECK(dc.supermartingale_pass(3.0));
  // cash is strictly suboptimal here (theta != 0): drift beyond -3 SE
  for (const auto& step_bins : dc.bins)
    for (const DriftBin& bin : step_bins) CHECK(bin.mean < -3.0 * bin.se);
}

TEST_CASE("theta = 0 makes cash optimal: drift vanishes") {
  MarketModel m = constant_market(0.02, 0.2, 0.02);  // mu == r
  m.M0 = 0.0;
  const UtilitySpec s = power_spec(0.5, 0.5, 0.1, 1.0, 0.9, 0.9);
  FixedPointConfig cfg;
  cfg.y_grid = {0.0};
  cfg.engine = InnerEngine::Quadrature;
  cfg.tol = 1e-9;
  const FixedPointResult fp = iterate_to_fixed_point(m, s, cfg);
  const HorizonPlan plan = plan_of(3, 1 << 12);
  const WealthSequence cash = policy_wealth(m, FeedbackPolicy::cash(), 1.0,
                                            0.0, plan);
  const DriftReport dr = supermartingale_check(m, s, fp.A_star, cash, plan);
  CHECK(dr.worst_abs_z <= 3.0);
}

TEST_CASE("d series values are consistent with increments") {
  MarketModel m = constant_market(0.1, 0.2, 0.02);
  const UtilitySpec s = power_spec(0.5, 0.5, 0.1, 1.0, 0.9, 0.9);
  const GridFunction A = GridFunction::constant_on({0.0}, 13.0);
  const HorizonPlan plan = plan_of(3, 32);
  const WealthSequence seq = policy_wealth(m, FeedbackPolicy::merton_log(), 1.0,
                                           0.0, plan);
  const auto d0 = d_series_at(s, A, seq, 0);
  const auto d3 = d_series_at(s, A, seq, 3);
  // D_0 is the continuation value alone
  for (double v : d0)
    CHECK(v == doctest::Approx(13.0 / 0.5).epsilon(1e-12));
  CHECK(d3.size() == 32);
}

TEST_CASE("log drift check on the stochastic-factor model") {
  MarketModel m = ou_market();
  UtilitySpec s = log_spec(0.5, 0.1, 1.0, 0.8, 0.8);
  const auto grid = default_grid(-1.4, 1.4, 9);
  std::vector<double> hv;
  for (double y : grid) hv.push_back(0.8 + 0.15 / (1.0 + std::exp(-y)));
  s.h = GridFunction(grid, hv);

  FixedPointConfig cfg;
  cfg.y_grid = grid;
  cfg.engine = InnerEngine::MonteCarlo;
  cfg.tol = 1e-5;
  cfg.max_iter = 400;
  cfg.solver.sim.n_paths = 1 << 13;
  const FixedPointResult fp = iterate_to_fixed_point(m, s, cfg);

  const HorizonPlan plan = plan_of(5, 1 << 13, 11);
  const WealthSequence opt = log_optimal_wealth(m, 1.0, 0.0, plan);
  const DriftReport dr = supermartingale_check(m, s, fp.A_star, opt, plan);
  CHECK(dr.martingale_pass(3.0));

  const WealthSequence cash = policy_wealth(m, FeedbackPolicy::cash(), 1.0,
                                            0.0, plan);
  const DriftReport dc = supermartingale_check(m, s, fp.A_star, cash, plan);
  CHECK(dc.supermartingale_pass(3.0));
}
