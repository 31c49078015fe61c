#include "periopt/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "periopt/config.hpp"
#include "periopt/version.hpp"

namespace periopt {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

void say(const CommandOptions& opt, const std::string& line) {
  if (!opt.quiet) std::fprintf(stdout, "%s\n", line.c_str());
}

int load_config(const CommandOptions& opt, RunConfig& cfg) {
  try {
    cfg = RunConfig::from_file(opt.config_path);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitBadConfig;
  }
  if (!opt.utility_override.empty()) {
    if (opt.utility_override == "log") {
      cfg.spec.kind = UtilityKind::Log;
    } else if (opt.utility_override == "power") {
      if (cfg.spec.alpha == 0.0) {
        std::fprintf(stderr,
                     "config error: --utility power needs utility.alpha\n");
        return kExitBadConfig;
      }
      cfg.spec.kind = UtilityKind::Power;
    } else {
      std::fprintf(stderr, "unknown --utility '%s'\n",
                   opt.utility_override.c_str());
      return kExitBadConfig;
    }
  }
  if (opt.seed) {
    cfg.fixed_point.solver.sim.seed = *opt.seed;
    cfg.horizon.seed = *opt.seed + 1;
  }
  if (opt.paths) {
    cfg.fixed_point.solver.sim.n_paths = *opt.paths;
    cfg.horizon.n_paths = *opt.paths;
  }
  if (opt.refine) {
    auto& s = cfg.fixed_point.solver;
    s.eta_time_knots += 2;
    s.eta_factor_knots = 2 * s.eta_factor_knots - 1;
    s.policy_factor_knots = 2 * s.policy_factor_knots - 1;
    s.max_sweeps += 4;
  }
  return kExitOk;
}

// validation + M0 fill-in shared by solve/verify
int gate_config(const CommandOptions& opt, RunConfig& cfg,
                ValidationReport& rep) {
  rep = validate_config(cfg);
  for (const std::string& w : rep.warnings) say(opt, "warning: " + w);
  if (!rep.pass) {
    std::fprintf(stderr, "validation failed: %s\n", rep.failure.c_str());
    return kExitAssumption;
  }
  if (!cfg.M0_supplied) cfg.model.M0 = rep.M0_estimate;
  return kExitOk;
}

json mc_number(const char* name, double value, double se) {
  json j;
  j["name"] = name;
  j["value"] = value;
  if (se > 0.0)
    j["se"] = se;
  else
    j["se"] = "exact";
  return j;
}

std::string a_star_csv(const FixedPointResult& res, const MarketModel& model,
                       const UtilitySpec& spec) {
  double lo = 0.0, hi = 0.0;
  if (spec.kind == UtilityKind::Power)
    fixed_point_interval_power(model, spec, lo, hi);
  else
    fixed_point_interval_log(model, spec, lo, hi);
  std::string out = "y,A_star,lower_bound,upper_bound\n";
  for (std::size_t j = 0; j < res.A_star.size(); ++j) {
    out += format_double(res.A_star.grid()[j]);
    out += ',';
    out += format_double(res.A_star.values()[j]);
    out += ',';
    out += format_double(lo);
    out += ',';
    out += format_double(hi);
    out += '\n';
  }
  return out;
}

std::string value_surface_csv(const FixedPointResult& res,
                              const MarketModel& model, const UtilitySpec& spec,
                              const std::vector<double>& x_grid) {
  std::string out = "x,y,V,lower_bound,upper_bound\n";
  for (double x : x_grid) {
    for (std::size_t j = 0; j < res.A_star.size(); ++j) {
      const double y = res.A_star.grid()[j];
      const double V = value_function(res, spec, x, y);
      const ValueBoundsReport vb = value_bounds_check(model, spec, x, y, V);
      out += format_double(x);
      out += ',';
      out += format_double(y);
      out += ',';
      out += format_double(V);
      out += ',';
      out += format_double(vb.lower);
      out += ',';
      out += format_double(vb.upper);
      out += '\n';
    }
  }
  return out;
}

json solve_manifest(const RunConfig& cfg, const FixedPointResult& res,
                    const BoundReport& bounds) {
  json m;
  m["tool"] = "periopt";
  m["version"] = kVersion;
  char hash[32];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(cfg.config_hash()));
  m["config_hash"] = hash;
  m["seed"] = cfg.fixed_point.solver.sim.seed;
  m["utility"] = cfg.spec.kind == UtilityKind::Power ? "power" : "log";
  m["engine"] = res.engine;
  m["iterations"] = res.iterations;
  m["converged"] = res.converged;
  m["certified"] = res.certified;
  m["final_step"] = res.final_step;
  m["theoretical_q"] = res.theoretical_q;
  m["contraction_ratios"] = res.contraction_ratios;
  m["clamped_negative"] = res.clamped_negative;
  if (cfg.spec.kind == UtilityKind::Log) m["C_star"] = res.C_star;
  json bounds_j;
  bounds_j["lower"] = bounds.lower;
  bounds_j["upper"] = bounds.upper;
  bounds_j["pass"] = bounds.pass;
  bounds_j["min_margin_lower"] = bounds.min_margin_lower;
  bounds_j["min_margin_upper"] = bounds.min_margin_upper;
  m["A_star_bounds"] = bounds_j;
  double max_se = 0.0;
  for (double s : res.se) max_se = std::max(max_se, s);
  json numbers = json::array();
  numbers.push_back(mc_number("A_star_min", res.A_star.min_value(), max_se));
  numbers.push_back(mc_number("A_star_max", res.A_star.max_value(), max_se));
  numbers.push_back(
      mc_number("A_star_at_y0", res.A_star(cfg.y0), max_se));
  m["numbers"] = numbers;
  // SE-aware stopping on a noisy operator is an engineering choice; flag it
  m["se_aware_stopping"] = res.engine == "mc";
  m["stopped_at_noise_floor"] = res.stopped_at_noise_floor;
  return m;
}

GridFunction load_a_star_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  std::string line;
  std::getline(is, line);  // header
  std::vector<double> ys, vs;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');
    ys.push_back(std::stod(cell));
    std::getline(ss, cell, ',');
    vs.push_back(std::stod(cell));
  }
  return GridFunction(std::move(ys), std::move(vs));
}

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

json check_to_json(const CheckResult& c) {
  json j;
  j["name"] = c.name;
  j["pass"] = c.pass;
  j["detail"] = c.detail;
  return j;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), f, a, b, c);
  return buf;
}

}  // namespace

int cmd_validate(const CommandOptions& opt) {
  RunConfig cfg;
  if (int rc = load_config(opt, cfg); rc != kExitOk) return rc;
  ValidationReport rep = validate_config(cfg);
  for (const std::string& w : rep.warnings) say(opt, "warning: " + w);
  if (!rep.pass) {
    std::fprintf(stderr, "validation failed: %s\n", rep.failure.c_str());
    return kExitAssumption;
  }
  say(opt, "validation passed");
  say(opt, "  " + rep.assumption.detail);
  say(opt, fmt("  grid estimate of sup theta^2: %.6g", rep.M0_estimate) +
               (cfg.M0_supplied ? " (M0 supplied)" : " (M0 estimated)"));
  return kExitOk;
}

int cmd_solve(const CommandOptions& opt) {
  RunConfig cfg;
  if (int rc = load_config(opt, cfg); rc != kExitOk) return rc;
  ValidationReport vrep;
  if (int rc = gate_config(opt, cfg, vrep); rc != kExitOk) return rc;

  const auto t0 = std::chrono::steady_clock::now();
  FixedPointResult res;
  try {
    res = iterate_to_fixed_point(cfg.model, cfg.spec, cfg.fixed_point);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "solve failed: %s\n", e.what());
    return kExitError;
  }
  const BoundReport bounds = cfg.spec.kind == UtilityKind::Power
                                 ? check_bounds_power(res, cfg.model, cfg.spec)
                                 : check_bounds_log(res, cfg.model, cfg.spec);

  fs::create_directories(opt.out_dir);
  write_text_atomic(opt.out_dir + "/A_star.csv",
                    a_star_csv(res, cfg.model, cfg.spec));
  write_text_atomic(opt.out_dir + "/value_surface.csv",
                    value_surface_csv(res, cfg.model, cfg.spec, cfg.x_grid));
  write_text_atomic(opt.out_dir + "/manifest.json",
                    solve_manifest(cfg, res, bounds).dump(2) + "\n");
  if (opt.timing) {
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
    write_text_atomic(opt.out_dir + "/timing.log",
                      "solve wall time: " + std::to_string(ms) + " ms\n");
  }
  say(opt, fmt("A* range: [%.6g, %.6g], iterations %.0f",
               res.A_star.min_value(), res.A_star.max_value(),
               static_cast<double>(res.iterations)));
  say(opt, std::string("bounds: ") + (bounds.pass ? "pass" : "FAIL"));
  if (!res.converged) {
    std::fprintf(stderr, "did not converge within max_iter; last iterate written\n");
    return kExitNoConvergence;
  }
  return kExitOk;
}

int cmd_verify(const CommandOptions& opt) {
  RunConfig cfg;
  if (int rc = load_config(opt, cfg); rc != kExitOk) return rc;
  ValidationReport vrep;
  if (int rc = gate_config(opt, cfg, vrep); rc != kExitOk) return rc;

  const std::string a_star_path = opt.out_dir + "/A_star.csv";
  if (!fs::exists(a_star_path) || opt.solve_first) {
    if (!opt.solve_first && !fs::exists(a_star_path)) {
      std::fprintf(stderr,
                   "no prior solve found in %s (use --solve-first)\n",
                   opt.out_dir.c_str());
      return kExitError;
    }
    if (int rc = cmd_solve(opt); rc != kExitOk && rc != kExitNoConvergence)
      return rc;
  }

  GridFunction A_star;
  try {
    A_star = load_a_star_csv(a_star_path);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "cannot load A_star.csv: %s\n", e.what());
    return kExitError;
  }

  std::vector<CheckResult> checks;
  FixedPointResult res;  // wrap the loaded grid for the bound/value helpers
  res.A_star = A_star;
  res.C_star = C_star(cfg.spec.gamma, cfg.spec.delta, cfg.spec.tau);
  res.converged = true;

  {
    CheckResult c;
    c.name = "standing_assumption";
    c.pass = vrep.assumption.pass;
    c.detail = vrep.assumption.detail;
    checks.push_back(c);
  }
  {
    CheckResult c;
    c.name = "fixed_point_bounds";
    const BoundReport b = cfg.spec.kind == UtilityKind::Power
                              ? check_bounds_power(res, cfg.model, cfg.spec)
                              : check_bounds_log(res, cfg.model, cfg.spec);
    c.pass = b.pass;
    c.detail = fmt("A* in [%.6g, %.6g], margins %.3g", b.lower, b.upper,
                   std::min(b.min_margin_lower, b.min_margin_upper));
    checks.push_back(c);
  }
  {
    CheckResult c;
    c.name = "fixed_point_residual";
    FixedPointConfig fpc = cfg.fixed_point;
    fpc.y_grid = std::vector<double>(A_star.grid().begin(), A_star.grid().end());
    const PsiResult psi =
        cfg.spec.kind == UtilityKind::Power
            ? apply_Psi_power(A_star, cfg.model, cfg.spec, fpc, 1000001)
            : apply_Psi_log(A_star, cfg.model, cfg.spec, fpc, 1000001);
    double worst = 0.0;
    bool ok = true;
    for (std::size_t j = 0; j < A_star.size(); ++j) {
      const double r = std::abs(psi.value.values()[j] - A_star.values()[j]);
      worst = std::max(worst, r);
      if (r > cfg.fixed_point.tol + 3.0 * psi.se[j]) ok = false;
    }
    c.pass = ok;
    c.detail = fmt("sup |Psi(A*) - A*| = %.3g vs tol %.3g + 3 SE", worst,
                   cfg.fixed_point.tol);
    checks.push_back(c);
  }

  // one-period duality and budget binding on the factor grid
  GridSolutions sols;
  sols.y_grid = cfg.fixed_point.y_grid;
  {
    CheckResult cg, cb;
    cg.name = "duality_gap";
    cb.name = "budget_binding";
    bool gap_ok = true, budget_ok = true;
    double worst_gap = -1e300, worst_res = 0.0;
    try {
      if (cfg.spec.kind == UtilityKind::Power) {
        OnePeriodConfig sc = cfg.fixed_point.solver;
        sc.certify_primal = true;
        for (double y : cfg.fixed_point.y_grid) {
          const OnePeriodSolution sol =
              solve_dual(cfg.model, cfg.spec, A_star, y, sc, 1.0);
          sols.lambda_star.push_back(sol.lambda_star);
          sols.eta_star.push_back(sol.eta_star);
          const double tol = cfg.fixed_point.gap_tol_rel *
                             std::abs(sol.dual_value.mean);
          const double noise =
              3.0 * combined_se(sol.dual_value.se, sol.primal_value.se);
          worst_gap = std::max(worst_gap, sol.gap);
          const bool point_ok = sol.gap <= std::max(tol, noise);
          if (!point_ok) gap_ok = false;
          sols.certified.push_back(point_ok);
          worst_res = std::max(worst_res, std::abs(sol.budget_residual));
          if (std::abs(sol.budget_residual) >
              std::max(cfg.fixed_point.solver.lambda_tol, 1e-8))
            budget_ok = false;
        }
      } else {
        for (double y : cfg.fixed_point.y_grid) {
          PathBundle bundle = simulate_factor(
              cfg.model, y, cfg.fixed_point.solver.sim, 900001);
          const McStat dual = log_one_period_value(cfg.model, 1.0, bundle);
          const McStat primal =
              primal_value(cfg.model, cfg.spec, A_star,
                           FeedbackPolicy::merton_log(), bundle);
          const double gap = dual.mean - primal.mean;
          worst_gap = std::max(worst_gap, gap);
          if (!(gap <= 3.0 * combined_se(dual.se, primal.se))) gap_ok = false;
          sols.lambda_star.push_back(1.0);
          sols.eta_star.push_back(
              DualControl::zero(1, 1, cfg.spec.tau, y - 1.0, y + 1.0, 5.0));
          sols.certified.push_back(true);
        }
      }
    } catch (const std::exception& e) {
      gap_ok = budget_ok = false;
      cg.detail = cb.detail = e.what();
    }
    cg.pass = gap_ok;
    if (cg.detail.empty()) cg.detail = fmt("worst gap %.4g", worst_gap);
    cb.pass = budget_ok;
    if (cb.detail.empty())
      cb.detail = fmt("worst |budget residual| %.3g", worst_res);
    checks.push_back(cg);
    checks.push_back(cb);
  }

  // default horizon length: extend until the analytic tail certificate is
  // below 1e-3 of the value at (x0, y0)
  if (!cfg.horizon_n_supplied) {
    const double V = value_function(res, cfg.spec, cfg.x0, cfg.y0);
    int n = cfg.horizon.n_periods;
    while (n < 500 &&
           objective_tail_bound(cfg.model, cfg.spec, cfg.x0, n) >
               1e-3 * std::abs(V))
      ++n;
    cfg.horizon.n_periods = n;
  }

  // horizon checks
  {
    CheckResult copt, ccash, cchain;
    copt.name = "martingale_drift_optimal";
    ccash.name = "supermartingale_drift_cash";
    cchain.name = "budget_chain";
    try {
      if (cfg.spec.kind == UtilityKind::Power &&
          sols.lambda_star.size() != sols.y_grid.size())
        throw std::runtime_error("one-period grid solve incomplete");
      WealthSequence seq;
      if (cfg.spec.kind == UtilityKind::Power)
        seq = concatenate_optimal_wealth(cfg.model, cfg.spec, A_star, sols,
                                         cfg.x0, cfg.y0, cfg.horizon,
                                         opt.allow_uncertified);
      else
        seq = log_optimal_wealth(cfg.model, cfg.x0, cfg.y0, cfg.horizon);
      const DriftReport dr =
          supermartingale_check(cfg.model, cfg.spec, A_star, seq, cfg.horizon);
      copt.pass = dr.martingale_pass(3.0);
      copt.detail = fmt("worst |z| = %.3g", dr.worst_abs_z);

      std::string drift_csv = "step,bin,y_lo,y_hi,count,mean,se,merged\n";
      for (std::size_t n = 0; n < dr.bins.size(); ++n)
        for (std::size_t bidx = 0; bidx < dr.bins[n].size(); ++bidx) {
          const DriftBin& bin = dr.bins[n][bidx];
          drift_csv += std::to_string(n) + "," + std::to_string(bidx) + "," +
                       format_double(bin.y_lo) + "," +
                       format_double(bin.y_hi) + "," +
                       std::to_string(bin.count) + "," +
                       format_double(bin.mean) + "," + format_double(bin.se) +
                       "," + (bin.merged ? "1" : "0") + "\n";
        }
      fs::create_directories(opt.out_dir);
      write_text_atomic(opt.out_dir + "/drift_bins.csv", drift_csv);

      bool chain_ok = true;
      double worst = 0.0;
      double solve_se_per_period = 0.0;
      for (int n = 1; n <= seq.n_periods; ++n) {
        std::vector<double> defl(static_cast<std::size_t>(seq.n_paths));
        for (std::int64_t p = 0; p < seq.n_paths; ++p)
          defl[static_cast<std::size_t>(p)] = seq.x_at(n, p) * seq.z_at(n, p);
        const McStat st = mc_stat(defl);
        if (n == 1) {
          // the interpolated multipliers carry the solve sample's own CLT
          // error; it enters the chain once per period
          const double sd1 = st.se * std::sqrt(static_cast<double>(seq.n_paths));
          solve_se_per_period =
              sd1 / std::sqrt(static_cast<double>(
                        cfg.fixed_point.solver.sim.n_paths));
        }
        const double err = std::abs(st.mean - cfg.x0);
        worst = std::max(worst, err);
        const double tol = 3.0 * st.se + 3.0 * n * solve_se_per_period;
        if (err > std::max(tol, 1e-10)) chain_ok = false;
      }
      cchain.pass = chain_ok;
      cchain.detail = fmt("worst |E[X Z/B] - x0| = %.3g", worst);
    } catch (const std::exception& e) {
      copt.pass = cchain.pass = false;
      copt.detail = cchain.detail = e.what();
    }
    const WealthSequence cash = policy_wealth(cfg.model, FeedbackPolicy::cash(),
                                              cfg.x0, cfg.y0, cfg.horizon);
    const DriftReport drc =
        supermartingale_check(cfg.model, cfg.spec, A_star, cash, cfg.horizon);
    ccash.pass = drc.supermartingale_pass(3.0);
    ccash.detail = fmt("worst upward z = %.3g", drc.worst_up_z);
    checks.push_back(copt);
    checks.push_back(ccash);
    checks.push_back(cchain);
  }

  // value bounds on a 3x3 (x, y) panel
  {
    CheckResult c;
    c.name = "value_bounds";
    bool ok = true;
    const std::vector<double> xs = {cfg.x_grid.front(),
                                    cfg.x_grid[cfg.x_grid.size() / 2],
                                    cfg.x_grid.back()};
    const auto g = A_star.grid();
    const std::vector<double> ys = {g.front(), g[g.size() / 2], g.back()};
    double worst = 1e300;
    for (double x : xs)
      for (double y : ys) {
        const double V = value_function(res, cfg.spec, x, y);
        const ValueBoundsReport vb =
            value_bounds_check(cfg.model, cfg.spec, x, y, V);
        worst = std::min(worst, std::min(V - vb.lower, vb.upper - V));
        if (!vb.pass) ok = false;
      }
    c.pass = ok;
    c.detail = fmt("min margin to the envelope %.4g", worst);
    checks.push_back(c);
  }

  json rep;
  rep["tool"] = "periopt";
  rep["version"] = kVersion;
  char hash[32];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(cfg.config_hash()));
  rep["config_hash"] = hash;
  rep["seed"] = cfg.fixed_point.solver.sim.seed;
  rep["horizon_seed"] = cfg.horizon.seed;
  rep["horizon_periods"] = cfg.horizon.n_periods;
  rep["horizon_tail_bound"] =
      objective_tail_bound(cfg.model, cfg.spec, cfg.x0,
                           cfg.horizon.n_periods);
  json arr = json::array();
  bool all = true;
  for (const CheckResult& c : checks) {
    arr.push_back(check_to_json(c));
    all = all && c.pass;
    say(opt, std::string(c.pass ? "[PASS] " : "[FAIL] ") + c.name + ": " +
                 c.detail);
  }
  rep["checks"] = arr;
  rep["all_pass"] = all;
  fs::create_directories(opt.out_dir);
  write_text_atomic(opt.out_dir + "/verification_report.json",
                    rep.dump(2) + "\n");
  return all ? kExitOk : kExitVerifyFailed;
}

int cmd_oracle_compare(const CommandOptions& opt) {
  RunConfig cfg;
  if (int rc = load_config(opt, cfg); rc != kExitOk) return rc;
  try {
    cfg.model.validate_basic();
    cfg.spec.validate();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "validation failed: %s\n", e.what());
    return kExitAssumption;
  }
  if (!cfg.model.has_constant_price_coefficients() ||
      !cfg.spec.h.is_constant()) {
    std::fprintf(stderr,
                 "oracle-compare needs constant mu, sigma and h\n");
    return kExitAssumption;
  }
  if (!cfg.M0_supplied)
    cfg.model.M0 = estimate_M0(cfg.model, cfg.y_grid);

  const std::vector<double> lambdas = {0.25, 0.5, 1.0, 2.0, 4.0};
  PathBundle bundle = simulate_factor(cfg.model, cfg.y0,
                                      cfg.fixed_point.solver.sim, 0);
  GridFunction A0;  // A == 0
  DualControl eta0 = DualControl::zero(1, 1, cfg.spec.tau, -1.0, 1.0,
                                       cfg.fixed_point.solver.eta_max);
  bool all_ok = true;
  json rows = json::array();
  say(opt, "lambda      mc_dual       quad_dual     z");
  for (double lam : lambdas) {
    const McStat mc = dual_value(cfg.model, cfg.spec, A0, eta0, lam, bundle);
    const double quad = quadrature_oracle_constant(
        cfg.model, cfg.spec, 0.0, lam, cfg.fixed_point.quad_nodes);
    double z = 0.0;
    bool ok;
    if (mc.se > 0.0) {
      z = (mc.mean - quad) / mc.se;
      ok = std::abs(z) <= 3.0;
    } else {
      ok = std::abs(mc.mean - quad) <= 1e-10 * std::max(1.0, std::abs(quad));
    }
    all_ok = all_ok && ok;
    char line[160];
    std::snprintf(line, sizeof(line), "%-10.4g %-13.8g %-13.8g %-8.3f %s", lam,
                  mc.mean, quad, z, ok ? "ok" : "FAIL");
    say(opt, line);
    json r;
    r["lambda"] = lam;
    r["mc_dual"] = mc.mean;
    r["mc_se"] = mc.se;
    r["quad_dual"] = quad;
    r["z"] = z;
    r["pass"] = ok;
    rows.push_back(r);
  }
  json rep;
  rep["rows"] = rows;
  rep["all_pass"] = all_ok;
  fs::create_directories(opt.out_dir);
  write_text_atomic(opt.out_dir + "/oracle_compare.json", rep.dump(2) + "\n");
  return all_ok ? kExitOk : kExitVerifyFailed;
}

int cmd_simulate(const CommandOptions& opt) {
  RunConfig cfg;
  if (int rc = load_config(opt, cfg); rc != kExitOk) return rc;
  try {
    cfg.model.validate_basic();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "validation failed: %s\n", e.what());
    return kExitAssumption;
  }
  FeedbackPolicy policy;
  if (opt.policy == "zero")
    policy = FeedbackPolicy::zero();
  else if (opt.policy == "cash")
    policy = FeedbackPolicy::cash();
  else if (opt.policy == "merton-log")
    policy = FeedbackPolicy::merton_log();
  else if (opt.policy == "merton-power")
    policy = FeedbackPolicy::merton_power(
        cfg.spec.kind == UtilityKind::Power ? cfg.spec.alpha : 0.5);
  else if (opt.policy == "constant")
    policy = FeedbackPolicy::constant(opt.policy_value);
  else {
    std::fprintf(stderr, "unknown --policy '%s'\n", opt.policy.c_str());
    return kExitBadConfig;
  }
  policy.pi_max = cfg.fixed_point.solver.pi_max;

  PathBundle bundle = simulate_factor(cfg.model, cfg.y0,
                                      cfg.fixed_point.solver.sim, 0);
  const std::int64_t clamps = simulate_wealth(cfg.model, policy, cfg.x0, bundle);
  DualControl eta0 = DualControl::zero(1, 1, cfg.spec.tau, -1.0, 1.0, 5.0);
  simulate_dual_density(cfg.model, eta0, bundle);
  fs::create_directories(opt.out_dir);
  write_bundle(bundle, opt.out_dir + "/paths.peri");
  write_terminal_csv(bundle, opt.out_dir + "/terminals.csv");
  if (clamps > 0)
    say(opt, fmt("warning: %.0f policy evaluations clamped to the box",
                 static_cast<double>(clamps)));
  say(opt, "wrote paths.peri and terminals.csv");
  return kExitOk;
}

}  // namespace periopt
