#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "periopt/market.hpp"

namespace periopt {

class DualControl;  // dual_control.hpp

struct SimulationConfig {
  std::int64_t n_paths = 1 << 16;
  int n_steps = 64;  // per period of length tau
  std::uint64_t seed = 42;
  double tau = 1.0;

  void validate() const;
};

// Feedback proportion pi(t, y) invested in the risky asset. Either a named
// closed form or a table on (time, factor) knots with bilinear interpolation.
// Evaluation clamps to the configured box |pi| <= pi_max.
class FeedbackPolicy {
 public:
  enum class Kind { Zero, Cash, MertonLog, MertonPower, Constant, Table };

  static FeedbackPolicy zero();
  static FeedbackPolicy cash();  // same portfolio as zero: all wealth in B
  static FeedbackPolicy merton_log();
  static FeedbackPolicy merton_power(double alpha);
  static FeedbackPolicy constant(double value);
  static FeedbackPolicy table(std::vector<double> t_knots,
                              std::vector<double> y_knots,
                              std::vector<double> values);

  double value(const MarketModel& model, double t, double y) const;
  Kind kind() const { return kind_; }

  std::vector<double>& mutable_values() { return values_; }
  const std::vector<double>& knot_values() const { return values_; }
  const std::vector<double>& t_knots() const { return tk_; }
  const std::vector<double>& y_knots() const { return yk_; }

  double pi_max = 20.0;

 private:
  Kind kind_ = Kind::Zero;
  double alpha_ = 0.5;
  double const_ = 0.0;
  std::vector<double> tk_, yk_, values_;
};

// Simulated block of paths on one period [0, tau]. Increment arrays are laid
// out path-major: index p*n_steps + k. State arrays include the initial
// point: index p*(n_steps+1) + k. Immutable by convention once built; the
// simulate_* helpers below append columns.
struct PathBundle {
  SimulationConfig cfg;
  std::uint64_t stream = 0;
  std::vector<double> times;  // n_steps+1 entries, 0..tau
  std::vector<double> dW1, dW2;
  std::vector<double> Y;
  std::vector<double> X;  // optional
  std::vector<double> Z;  // optional
  std::int64_t policy_clamps = 0;

  std::int64_t n_paths() const { return cfg.n_paths; }
  int n_steps() const { return cfg.n_steps; }
  double dt() const { return cfg.tau / cfg.n_steps; }

  double y_at(std::int64_t p, int k) const { return Y[p * (cfg.n_steps + 1) + k]; }
  double terminal_Y(std::int64_t p) const { return y_at(p, cfg.n_steps); }
  double terminal_X(std::int64_t p) const { return X[p * (cfg.n_steps + 1) + cfg.n_steps]; }
  double terminal_Z(std::int64_t p) const { return Z[p * (cfg.n_steps + 1) + cfg.n_steps]; }
};

// Euler-Maruyama factor paths from a common start y0, drawing and storing the
// Brownian increments. `stream` salts the counter-based generator so several
// bundles per seed stay independent.
PathBundle simulate_factor(const MarketModel& model, double y0,
                           const SimulationConfig& cfg,
                           std::uint64_t stream = 0);

// Same, but path p starts at y0s[p] (multi-period chaining).
PathBundle simulate_factor_from(const MarketModel& model,
                                std::span<const double> y0s,
                                const SimulationConfig& cfg,
                                std::uint64_t stream);

// Wealth under a feedback policy on the bundle's increments. Discretizes
// log X, so X > 0 on every path. Returns the number of clamped policy
// evaluations (also accumulated on the bundle).
std::int64_t simulate_wealth(const MarketModel& model,
                             const FeedbackPolicy& policy, double x0,
                             PathBundle& bundle);

// Dual density Z^eta = exp(-int theta dW1 + int eta dW2 - 1/2 int (theta^2 +
// eta^2) ds), accumulated in log space on the shared increments.
void simulate_dual_density(const MarketModel& model, const DualControl& eta,
                           PathBundle& bundle);

enum class BrownianAxis { W1, W2 };

// Terminal Doleans-Dade exponential exp(int f dW - 1/2 int f^2 ds) per path,
// with f evaluated at (t_k, Y_k).
std::vector<double> doleans_exponential(const PathBundle& bundle,
                                        BrownianAxis axis,
                                        const std::function<double(double, double)>& f);

// Debug dump: "PERI" magic, format version, seed, dims, then arrays.
void write_bundle(const PathBundle& bundle, const std::string& path);
PathBundle read_bundle(const std::string& path);
void write_terminal_csv(const PathBundle& bundle, const std::string& path);

}  // namespace periopt
