#pragma once

#include "periopt/fixed_point.hpp"

namespace periopt {

struct HorizonPlan {
  int n_periods = 6;
  std::int64_t n_paths = 1 << 14;
  int n_steps = 64;
  std::uint64_t seed = 7;
  double tau = 1.0;
  int drift_bins = 8;
  std::int64_t min_bin_paths = 100;
};

// One-period dual solutions solved once on the factor grid; evaluation at a
// realized factor level interpolates lambda linearly and the control
// coefficient-wise (time-homogeneous Markov reuse).
struct GridSolutions {
  std::vector<double> y_grid;
  std::vector<double> lambda_star;
  std::vector<DualControl> eta_star;
  std::vector<bool> certified;

  double lambda_at(double y) const;
  DualControl eta_at(double y) const;
  bool all_certified() const;
};

GridSolutions solve_on_grid(const MarketModel& model, const UtilitySpec& spec,
                            const GridFunction& A_star,
                            const FixedPointConfig& cfg);

// Wealth, factor and deflated-density values at the evaluation dates
// T_0..T_N, one row per date, path-major within a row.
struct WealthSequence {
  int n_periods = 0;
  std::int64_t n_paths = 0;
  std::vector<double> X;       // (N+1) * n_paths
  std::vector<double> Y;       // (N+1) * n_paths
  std::vector<double> ZoverB;  // (N+1) * n_paths, deflator Z^{eta*}_{T_n}/B_{T_n}

  double x_at(int n, std::int64_t p) const { return X[std::size_t(n) * n_paths + p]; }
  double y_at(int n, std::int64_t p) const { return Y[std::size_t(n) * n_paths + p]; }
  double z_at(int n, std::int64_t p) const { return ZoverB[std::size_t(n) * n_paths + p]; }
};

// Concatenated optimum of the power problem: per period the terminal-wealth
// ratio x*_{h_{A*}}(lambda* Z-ratio / B-ratio, Y_{T_n}), with the period
// solution looked up at the realized factor level. Throws when a period
// solution is uncertified unless allow_uncertified.
WealthSequence concatenate_optimal_wealth(const MarketModel& model,
                                          const UtilitySpec& spec,
                                          const GridFunction& A_star,
                                          const GridSolutions& solutions,
                                          double x0, double y0,
                                          const HorizonPlan& plan,
                                          bool allow_uncertified = false);

// Log-optimal wealth X* = x B/Z^0 at the evaluation dates.
WealthSequence log_optimal_wealth(const MarketModel& model, double x0,
                                  double y0, const HorizonPlan& plan);

// Wealth under a feedback policy at the evaluation dates (Z column carries
// the eta = 0 deflator).
WealthSequence policy_wealth(const MarketModel& model,
                             const FeedbackPolicy& policy, double x0, double y0,
                             const HorizonPlan& plan);

// (mu(y) - r) / sigma^2(y); the closed-form log-optimal proportion.
double log_optimal_policy(const MarketModel& model, double y);

struct ObjectiveEstimate {
  McStat value;       // truncated sum of discounted period utilities
  double tail_bound = 0.0;  // analytic bound on the dropped tail
  int n_periods = 0;
};

// Truncated objective sum_{i<=N} e^{-delta T_i} U(X_{T_i}/X_{T_{i-1}}^gamma,
// Y_{T_i}) with a geometric tail certificate from the growth estimates.
ObjectiveEstimate evaluate_objective(const UtilitySpec& spec,
                                     const MarketModel& model,
                                     const WealthSequence& seq, double x0);

// Analytic bound on the dropped tail after N periods.
double objective_tail_bound(const MarketModel& model, const UtilitySpec& spec,
                            double x0, int n_periods);

struct DriftBin {
  double y_lo = 0.0, y_hi = 0.0;
  std::int64_t count = 0;
  double mean = 0.0;
  double se = 0.0;
  bool merged = false;
};

struct DriftReport {
  // bins[step] = factor-binned conditional drift of D_{n+1} - D_n
  std::vector<std::vector<DriftBin>> bins;
  double worst_up_z = 0.0;    // max over bins of mean/se
  double worst_abs_z = 0.0;   // max over bins of |mean|/se
  bool supermartingale_pass(double k = 3.0) const { return worst_up_z <= k; }
  bool martingale_pass(double k = 3.0) const { return worst_abs_z <= k; }
};

// Conditional drift of the D_n series within factor bins of Y_{T_n}:
// <= 0 (up to noise) for any admissible policy, = 0 for the optimum.
DriftReport supermartingale_check(const MarketModel& model,
                                  const UtilitySpec& spec,
                                  const GridFunction& A_star,
                                  const WealthSequence& seq,
                                  const HorizonPlan& plan);

// Per-path D_n value at index n (test hook).
std::vector<double> d_series_at(const UtilitySpec& spec,
                                const GridFunction& A_star,
                                const WealthSequence& seq, int n);

}  // namespace periopt
