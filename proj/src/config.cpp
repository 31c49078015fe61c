#include "periopt/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "interp.hpp"
#include "json.hpp"

namespace periopt {

using json = nlohmann::ordered_json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ConfigError("config field '" + where + "': " + what);
}

const json& need(const json& j, const std::string& key, const std::string& ctx) {
  if (!j.is_object()) fail(ctx, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(ctx + "." + key, "missing");
  return *it;
}

double need_number(const json& j, const std::string& key,
                   const std::string& ctx) {
  const json& v = need(j, key, ctx);
  if (!v.is_number()) fail(ctx + "." + key, "expected a number");
  return v.get<double>();
}

double opt_number(const json& j, const std::string& key, double def) {
  if (!j.is_object()) return def;
  auto it = j.find(key);
  if (it == j.end()) return def;
  return it->get<double>();
}

std::vector<double> number_list(const json& v, const std::string& ctx) {
  if (!v.is_array()) fail(ctx, "expected an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) fail(ctx, "expected numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

CoefficientFunction parse_coefficient(const json& j, const std::string& ctx) {
  const json& kindv = need(j, "kind", ctx);
  if (!kindv.is_string()) fail(ctx + ".kind", "expected a string");
  const std::string kind = kindv.get<std::string>();
  try {
    if (kind == "constant")
      return CoefficientFunction::constant(need_number(j, "value", ctx));
    if (kind == "affine")
      return CoefficientFunction::affine(need_number(j, "a", ctx),
                                         need_number(j, "b", ctx));
    if (kind == "sigmoid")
      return CoefficientFunction::sigmoid(
          need_number(j, "lo", ctx), need_number(j, "hi", ctx),
          opt_number(j, "center", 0.0), opt_number(j, "scale", 1.0));
    if (kind == "table")
      return CoefficientFunction::table(
          number_list(need(j, "y", ctx), ctx + ".y"),
          number_list(need(j, "values", ctx), ctx + ".values"));
  } catch (const std::invalid_argument& e) {
    fail(ctx, e.what());
  }
  fail(ctx + ".kind", "unknown kind '" + kind +
                          "' (constant|affine|sigmoid|table)");
}

json coefficient_to_json(const CoefficientFunction& f) {
  json j;
  j["kind"] = f.kind_name();
  switch (f.kind()) {
    case CoeffKind::Constant:
      j["value"] = f.params()[0];
      break;
    case CoeffKind::Affine:
      j["a"] = f.params()[0];
      j["b"] = f.params()[1];
      break;
    case CoeffKind::Sigmoid:
      j["lo"] = f.params()[0];
      j["hi"] = f.params()[1];
      j["center"] = f.params()[2];
      j["scale"] = f.params()[3];
      break;
    case CoeffKind::Table:
      j["y"] = f.table_grid();
      j["values"] = f.table_values();
      break;
  }
  return j;
}

std::vector<double> parse_grid(const json& j, const std::string& ctx) {
  if (j.is_array()) {
    auto g = number_list(j, ctx);
    for (std::size_t i = 1; i < g.size(); ++i)
      if (!(g[i] > g[i - 1])) fail(ctx, "grid must be strictly increasing");
    return g;
  }
  if (j.is_object()) {
    const double lo = need_number(j, "lo", ctx);
    const double hi = need_number(j, "hi", ctx);
    const int n = static_cast<int>(need_number(j, "n", ctx));
    if (!(hi > lo) || n < 1) fail(ctx, "need hi > lo and n >= 1");
    return detail::linspace(lo, hi, n);
  }
  fail(ctx, "expected an array or {lo, hi, n}");
}

}  // namespace

RunConfig RunConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }

  RunConfig cfg;
  const json& jm = need(j, "model", "");
  cfg.model.r = need_number(jm, "r", "model");
  cfg.model.rho = opt_number(jm, "rho", 0.0);
  cfg.model.mu = parse_coefficient(need(jm, "mu", "model"), "model.mu");
  cfg.model.sigma = parse_coefficient(need(jm, "sigma", "model"), "model.sigma");
  cfg.model.b = parse_coefficient(need(jm, "b", "model"), "model.b");
  cfg.model.beta = parse_coefficient(need(jm, "beta", "model"), "model.beta");
  cfg.M0_supplied = jm.contains("M0");
  cfg.model.M0 = opt_number(jm, "M0", 0.0);

  cfg.x0 = opt_number(j, "x0", 1.0);
  cfg.y0 = opt_number(j, "y0", 0.0);

  // numerics first: the working grid is needed to tabulate h
  const json jn = j.contains("numerics") ? j["numerics"] : json::object();
  if (jn.contains("y_grid")) {
    cfg.y_grid = parse_grid(jn["y_grid"], "numerics.y_grid");
  } else {
    // default: 41 points spanning y0 +- 5 stationary standard deviations
    // when the factor mean-reverts (b affine with negative slope, beta
    // constant), else a fixed +-2 window
    double half = 2.0;
    if (cfg.model.b.kind() == CoeffKind::Affine &&
        cfg.model.beta.is_constant()) {
      const double slope = cfg.model.b.params()[1];
      const double bconst = cfg.model.beta(0.0);
      if (slope < 0.0 && bconst != 0.0)
        half = 5.0 * std::abs(bconst) / std::sqrt(-2.0 * slope);
    }
    cfg.y_grid = detail::linspace(cfg.y0 - half, cfg.y0 + half, 41);
  }
  if (jn.contains("x_grid"))
    cfg.x_grid = parse_grid(jn["x_grid"], "numerics.x_grid");
  else
    cfg.x_grid = {0.5, 1.0, 2.0};

  const json& ju = need(j, "utility", "");
  const std::string kind = need(ju, "kind", "utility").get<std::string>();
  if (kind == "power") {
    cfg.spec.kind = UtilityKind::Power;
    cfg.spec.alpha = need_number(ju, "alpha", "utility");
  } else if (kind == "log") {
    cfg.spec.kind = UtilityKind::Log;
    cfg.spec.alpha = 0.0;
  } else {
    fail("utility.kind", "expected 'power' or 'log'");
  }
  cfg.spec.gamma = need_number(ju, "gamma", "utility");
  cfg.spec.delta = need_number(ju, "delta", "utility");
  cfg.spec.tau = need_number(ju, "tau", "utility");
  const CoefficientFunction hc =
      parse_coefficient(need(ju, "h", "utility"), "utility.h");
  if (hc.kind() == CoeffKind::Table) {
    cfg.spec.h = GridFunction(hc.table_grid(), hc.table_values());
  } else {
    std::vector<double> hv;
    hv.reserve(cfg.y_grid.size());
    for (double y : cfg.y_grid) hv.push_back(hc(y));
    cfg.spec.h = cfg.y_grid.size() == 1
                     ? GridFunction({cfg.y_grid[0]}, {hc(cfg.y_grid[0])})
                     : GridFunction(cfg.y_grid, std::move(hv));
  }
  if (ju.contains("m"))
    cfg.spec.m = need_number(ju, "m", "utility");
  else
    cfg.spec.m = std::max(1e-6, std::min(0.999999, cfg.spec.h.min_value()));

  FixedPointConfig& fp = cfg.fixed_point;
  fp.y_grid = cfg.y_grid;
  fp.tol = opt_number(jn, "tol", 1e-4);
  fp.max_iter = static_cast<int>(opt_number(jn, "max_iter", 500));
  fp.gap_tol_rel = opt_number(jn, "gap_tol_rel", 1e-2);
  fp.quad_nodes = static_cast<int>(opt_number(jn, "quad_nodes", 64));
  fp.solver.sim.n_paths =
      static_cast<std::int64_t>(opt_number(jn, "n_paths", 1 << 16));
  fp.solver.sim.n_steps = static_cast<int>(opt_number(jn, "n_steps", 64));
  fp.solver.sim.seed =
      static_cast<std::uint64_t>(opt_number(jn, "seed", 42));
  fp.solver.sim.tau = cfg.spec.tau;
  fp.solver.eta_max = opt_number(jn, "eta_max", 5.0);
  fp.solver.pi_max = opt_number(jn, "pi_max", 20.0);
  fp.solver.eta_time_knots =
      static_cast<int>(opt_number(jn, "eta_time_knots", 4));
  fp.solver.eta_factor_knots =
      static_cast<int>(opt_number(jn, "eta_factor_knots", 9));
  fp.solver.policy_time_knots =
      static_cast<int>(opt_number(jn, "policy_time_knots", 2));
  fp.solver.policy_factor_knots =
      static_cast<int>(opt_number(jn, "policy_factor_knots", 5));
  fp.solver.max_sweeps = static_cast<int>(opt_number(jn, "max_sweeps", 8));
  fp.solver.improve_tol = opt_number(jn, "improve_tol", 1e-4);
  fp.solver.lambda_tol = opt_number(jn, "lambda_tol", 1e-8);
  fp.solver.eta_step0 = opt_number(jn, "eta_step0", 0.25);
  fp.solver.pi_step0 = opt_number(jn, "pi_step0", 0.5);
  fp.solver.certify_primal = jn.contains("certify_primal")
                                 ? jn["certify_primal"].get<bool>()
                                 : false;
  if (!cfg.y_grid.empty()) {
    fp.solver.y_span_lo = cfg.y_grid.front();
    fp.solver.y_span_hi = cfg.y_grid.back();
  }
  const std::string engine =
      jn.contains("engine") ? jn["engine"].get<std::string>() : "auto";
  cfg.engine = engine;
  if (engine == "mc")
    fp.engine = InnerEngine::MonteCarlo;
  else if (engine == "quadrature")
    fp.engine = InnerEngine::Quadrature;
  else if (engine == "auto")
    fp.engine = InnerEngine::Auto;
  else
    fail("numerics.engine", "expected auto|mc|quadrature");

  const json jh = j.contains("horizon") ? j["horizon"] : json::object();
  cfg.horizon_n_supplied = jh.contains("n_periods");
  cfg.horizon.n_periods = static_cast<int>(opt_number(jh, "n_periods", 6));
  cfg.horizon.n_paths = static_cast<std::int64_t>(
      opt_number(jh, "n_paths", static_cast<double>(fp.solver.sim.n_paths)));
  cfg.horizon.n_steps =
      static_cast<int>(opt_number(jh, "n_steps", fp.solver.sim.n_steps));
  cfg.horizon.seed = static_cast<std::uint64_t>(
      opt_number(jh, "seed", static_cast<double>(fp.solver.sim.seed) + 1));
  cfg.horizon.tau = cfg.spec.tau;
  cfg.horizon.drift_bins = static_cast<int>(opt_number(jh, "bins", 8));

  return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return from_json_text(ss.str());
}

std::string RunConfig::canonical_json() const {
  json j;
  json jm;
  jm["r"] = model.r;
  jm["rho"] = model.rho;
  jm["M0"] = model.M0;
  jm["mu"] = coefficient_to_json(model.mu);
  jm["sigma"] = coefficient_to_json(model.sigma);
  jm["b"] = coefficient_to_json(model.b);
  jm["beta"] = coefficient_to_json(model.beta);
  j["model"] = jm;
  json ju;
  ju["kind"] = spec.kind == UtilityKind::Power ? "power" : "log";
  if (spec.kind == UtilityKind::Power) ju["alpha"] = spec.alpha;
  ju["gamma"] = spec.gamma;
  ju["delta"] = spec.delta;
  ju["tau"] = spec.tau;
  ju["m"] = spec.m;
  ju["h_grid"] = std::vector<double>(spec.h.grid().begin(), spec.h.grid().end());
  ju["h_values"] =
      std::vector<double>(spec.h.values().begin(), spec.h.values().end());
  j["utility"] = ju;
  json jn;
  jn["y_grid"] = y_grid;
  jn["x_grid"] = x_grid;
  jn["n_paths"] = fixed_point.solver.sim.n_paths;
  jn["n_steps"] = fixed_point.solver.sim.n_steps;
  jn["seed"] = fixed_point.solver.sim.seed;
  jn["tol"] = fixed_point.tol;
  jn["max_iter"] = fixed_point.max_iter;
  jn["engine"] = engine;
  jn["eta_max"] = fixed_point.solver.eta_max;
  jn["pi_max"] = fixed_point.solver.pi_max;
  jn["eta_time_knots"] = fixed_point.solver.eta_time_knots;
  jn["eta_factor_knots"] = fixed_point.solver.eta_factor_knots;
  jn["policy_time_knots"] = fixed_point.solver.policy_time_knots;
  jn["policy_factor_knots"] = fixed_point.solver.policy_factor_knots;
  jn["max_sweeps"] = fixed_point.solver.max_sweeps;
  jn["improve_tol"] = fixed_point.solver.improve_tol;
  jn["lambda_tol"] = fixed_point.solver.lambda_tol;
  jn["eta_step0"] = fixed_point.solver.eta_step0;
  jn["pi_step0"] = fixed_point.solver.pi_step0;
  jn["certify_primal"] = fixed_point.solver.certify_primal;
  jn["gap_tol_rel"] = fixed_point.gap_tol_rel;
  jn["quad_nodes"] = fixed_point.quad_nodes;
  j["numerics"] = jn;
  json jh;
  jh["n_periods"] = horizon.n_periods;
  jh["n_paths"] = horizon.n_paths;
  jh["n_steps"] = horizon.n_steps;
  jh["seed"] = horizon.seed;
  jh["bins"] = horizon.drift_bins;
  j["horizon"] = jh;
  j["x0"] = x0;
  j["y0"] = y0;
  return j.dump(2);
}

std::uint64_t RunConfig::config_hash() const {
  const std::string s = canonical_json();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

ValidationReport validate_config(const RunConfig& cfg) {
  ValidationReport rep;
  try {
    cfg.model.validate_basic();
    cfg.spec.validate();
  } catch (const std::exception& e) {
    rep.failure = e.what();
    return rep;
  }
  for (double y : cfg.y_grid) {
    if (!(cfg.model.sigma(y) > 0.0)) {
      rep.failure = "sigma must be strictly positive on the working grid";
      return rep;
    }
  }
  bool beta_vanishes = false;
  for (double y : cfg.y_grid)
    if (cfg.model.beta(y) == 0.0) beta_vanishes = true;
  if (beta_vanishes)
    rep.warnings.push_back(
        "beta vanishes on the working grid: the factor is (locally) "
        "deterministic; off-grid behavior is a modeling responsibility");

  MarketModel m = cfg.model;
  rep.M0_estimate = estimate_M0(m, cfg.y_grid);
  if (cfg.M0_supplied) {
    if (rep.M0_estimate > m.M0 + 1e-12) {
      rep.M0_consistent = false;
      char buf[160];
      std::snprintf(buf, sizeof(buf),
                    "grid estimate of theta^2 (%.6g) exceeds supplied M0 (%.6g)",
                    rep.M0_estimate, m.M0);
      rep.failure = buf;
      return rep;
    }
  } else {
    m.M0 = rep.M0_estimate;
  }
  rep.assumption = check_standing_assumption(m, cfg.spec);
  if (!rep.assumption.pass) {
    rep.failure = "standing assumption fails: " + rep.assumption.detail;
    return rep;
  }
  rep.pass = true;
  return rep;
}

void write_text_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open " + tmp + " for writing");
    os << content;
    if (!os) throw std::runtime_error("write failed: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("rename failed: " + path);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace periopt
