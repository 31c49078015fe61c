#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "periopt/config.hpp"
#include "periopt/version.hpp"

namespace py = pybind11;
using namespace periopt;

namespace {

RunConfig config_from_text(const std::string& text) {
  return RunConfig::from_json_text(text);
}

py::dict fixed_point_to_dict(const FixedPointResult& res) {
  py::dict d;
  d["y_grid"] = std::vector<double>(res.A_star.grid().begin(),
                                    res.A_star.grid().end());
  d["A_star"] = std::vector<double>(res.A_star.values().begin(),
                                    res.A_star.values().end());
  d["se"] = res.se;
  d["iterations"] = res.iterations;
  d["converged"] = res.converged;
  d["certified"] = res.certified;
  d["engine"] = res.engine;
  d["theoretical_q"] = res.theoretical_q;
  d["contraction_ratios"] = res.contraction_ratios;
  d["C_star"] = res.C_star;
  d["final_step"] = res.final_step;
  return d;
}

}  // namespace

PYBIND11_MODULE(_periopt, m) {
  m.doc() = "portfolio optimization under ratio-type periodic evaluation";
  m.attr("__version__") = kVersion;

  py::class_<RunConfig>(m, "RunConfig")
      .def_static("from_text", &config_from_text, py::arg("json_text"))
      .def_static("from_file", &RunConfig::from_file, py::arg("path"))
      .def("canonical_json", &RunConfig::canonical_json)
      .def_property_readonly("y0", [](const RunConfig& c) { return c.y0; })
      .def_property_readonly("x0", [](const RunConfig& c) { return c.x0; });

  m.def("zeta", &zeta, py::arg("r"), py::arg("M0"), py::arg("x"));
  m.def(
      "theta",
      [](const RunConfig& cfg, double y) { return theta(cfg.model, y); },
      py::arg("config"), py::arg("y"));
  m.def(
      "estimate_M0",
      [](const RunConfig& cfg) { return estimate_M0(cfg.model, cfg.y_grid); },
      py::arg("config"));
  m.def(
      "check_standing_assumption",
      [](const RunConfig& cfg) {
        const AssumptionReport rep =
            check_standing_assumption(cfg.model, cfg.spec);
        py::dict d;
        d["pass"] = rep.pass;
        d["zeta_value"] = rep.zeta_value;
        d["margin"] = rep.margin;
        d["detail"] = rep.detail;
        return d;
      },
      py::arg("config"));
  m.def(
      "validate",
      [](const RunConfig& cfg) {
        const ValidationReport rep = validate_config(cfg);
        py::dict d;
        d["pass"] = rep.pass;
        d["failure"] = rep.failure;
        d["M0_estimate"] = rep.M0_estimate;
        d["warnings"] = rep.warnings;
        return d;
      },
      py::arg("config"));

  m.def("C_star", &C_star, py::arg("gamma"), py::arg("delta"), py::arg("tau"));
  m.def(
      "log_optimal_policy",
      [](const RunConfig& cfg, double y) {
        return log_optimal_policy(cfg.model, y);
      },
      py::arg("config"), py::arg("y"));
  m.def(
      "contraction_factor",
      [](const RunConfig& cfg) {
        MarketModel model = cfg.model;
        if (!cfg.M0_supplied) model.M0 = estimate_M0(model, cfg.y_grid);
        return contraction_factor(model, cfg.spec);
      },
      py::arg("config"));

  m.def(
      "solve_fixed_point",
      [](const RunConfig& cfg) {
        MarketModel model = cfg.model;
        if (!cfg.M0_supplied) model.M0 = estimate_M0(model, cfg.y_grid);
        const FixedPointResult res =
            iterate_to_fixed_point(model, cfg.spec, cfg.fixed_point);
        py::dict d = fixed_point_to_dict(res);
        const BoundReport b = cfg.spec.kind == UtilityKind::Power
                                  ? check_bounds_power(res, model, cfg.spec)
                                  : check_bounds_log(res, model, cfg.spec);
        d["bound_lower"] = b.lower;
        d["bound_upper"] = b.upper;
        d["bounds_pass"] = b.pass;
        return d;
      },
      py::arg("config"));

  m.def(
      "value_function",
      [](const RunConfig& cfg, const std::vector<double>& y_grid,
         const std::vector<double>& a_values, double x, double y) {
        FixedPointResult res;
        res.A_star = GridFunction(y_grid, a_values);
        res.converged = true;
        return value_function(res, cfg.spec, x, y);
      },
      py::arg("config"), py::arg("y_grid"), py::arg("a_values"), py::arg("x"),
      py::arg("y"));

  m.def(
      "quadrature_oracle",
      [](const RunConfig& cfg, double A_const, double lambda, int nodes) {
        return quadrature_oracle_constant(cfg.model, cfg.spec, A_const, lambda,
                                          nodes);
      },
      py::arg("config"), py::arg("A_const"), py::arg("lambda_"),
      py::arg("nodes") = 64);

  m.def(
      "solve_one_period",
      [](const RunConfig& cfg, const std::vector<double>& a_values, double y0) {
        GridFunction A = a_values.empty()
                             ? GridFunction()
                             : GridFunction(cfg.y_grid, a_values);
        const OnePeriodSolution sol =
            solve_dual(cfg.model, cfg.spec, A, y0, cfg.fixed_point.solver);
        py::dict d;
        d["lambda_star"] = sol.lambda_star;
        d["dual_value"] = sol.dual_value.mean;
        d["dual_se"] = sol.dual_value.se;
        d["budget_residual"] = sol.budget_residual;
        d["eta_on_boundary"] = sol.eta_on_boundary;
        return d;
      },
      py::arg("config"), py::arg("a_values"), py::arg("y0"));

  m.def(
      "simulate_terminal_stats",
      [](const RunConfig& cfg, const std::string& policy_name) {
        FeedbackPolicy policy = FeedbackPolicy::zero();
        if (policy_name == "merton-log")
          policy = FeedbackPolicy::merton_log();
        else if (policy_name == "merton-power")
          policy = FeedbackPolicy::merton_power(
              cfg.spec.kind == UtilityKind::Power ? cfg.spec.alpha : 0.5);
        else if (policy_name != "zero" && policy_name != "cash")
          throw std::invalid_argument("unknown policy: " + policy_name);
        PathBundle bundle = simulate_factor(cfg.model, cfg.y0,
                                            cfg.fixed_point.solver.sim, 0);
        simulate_wealth(cfg.model, policy, cfg.x0, bundle);
        std::vector<double> xt(static_cast<std::size_t>(bundle.n_paths()));
        std::vector<double> yt(static_cast<std::size_t>(bundle.n_paths()));
        for (std::int64_t p = 0; p < bundle.n_paths(); ++p) {
          xt[static_cast<std::size_t>(p)] = bundle.terminal_X(p);
          yt[static_cast<std::size_t>(p)] = bundle.terminal_Y(p);
        }
        const McStat xs = mc_stat(xt);
        const McStat ys = mc_stat(yt);
        py::dict d;
        d["X_mean"] = xs.mean;
        d["X_se"] = xs.se;
        d["Y_mean"] = ys.mean;
        d["Y_se"] = ys.se;
        d["n_paths"] = bundle.n_paths();
        return d;
      },
      py::arg("config"), py::arg("policy") = "merton-log");
}
