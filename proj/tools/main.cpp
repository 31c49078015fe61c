#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "periopt/commands.hpp"
#include "periopt/version.hpp"

int main(int argc, char** argv) {
  CLI::App app{"periopt: periodic-evaluation portfolio solver and verifier"};
  app.set_version_flag("--version", periopt::kVersion);
  app.require_subcommand(1);

  periopt::CommandOptions opt;
  std::uint64_t seed = 0;
  std::int64_t paths = 0;

  const auto add_common = [&](CLI::App* sub, bool needs_out) {
    sub->add_option("--config", opt.config_path, "JSON run configuration")
        ->required();
    if (needs_out)
      sub->add_option("--out", opt.out_dir, "output directory");
    sub->add_option("--seed", seed, "override the base seed");
    sub->add_option("--paths", paths, "override the Monte Carlo path count");
    sub->add_flag("--refine", opt.refine,
                  "refine control/policy knots and search effort");
    sub->add_flag("--quiet", opt.quiet, "suppress progress output");
  };

  CLI::App* validate = app.add_subcommand("validate", "check a configuration");
  add_common(validate, false);

  CLI::App* solve = app.add_subcommand("solve", "solve the fixed point");
  add_common(solve, true);
  solve->add_option("--utility", opt.utility_override,
                    "override the utility kind (power|log)");
  solve->add_flag("--timing", opt.timing, "emit timing.log");

  CLI::App* verify = app.add_subcommand("verify", "run the verification suite");
  add_common(verify, true);
  verify->add_flag("--solve-first", opt.solve_first,
                   "run solve before verifying");
  verify->add_flag("--allow-uncertified", opt.allow_uncertified,
                   "proceed with uncertified one-period solutions");

  CLI::App* oracle =
      app.add_subcommand("oracle-compare", "Monte Carlo vs quadrature table");
  add_common(oracle, true);

  CLI::App* simulate = app.add_subcommand("simulate", "dump simulated paths");
  add_common(simulate, true);
  simulate->add_option("--policy", opt.policy,
                       "zero|cash|merton-log|merton-power|constant");
  simulate->add_option("--policy-value", opt.policy_value,
                       "proportion for --policy constant");

  CLI11_PARSE(app, argc, argv);

  if (seed != 0 || app.count_all() == 0) {
    // CLI11 leaves the variable untouched when the flag is absent
  }
  for (CLI::App* sub : {validate, solve, verify, oracle, simulate}) {
    if (sub->parsed()) {
      if (sub->count("--seed")) opt.seed = seed;
      if (sub->count("--paths")) opt.paths = paths;
    }
  }

  try {
    if (validate->parsed()) return periopt::cmd_validate(opt);
    if (solve->parsed()) return periopt::cmd_solve(opt);
    if (verify->parsed()) return periopt::cmd_verify(opt);
    if (oracle->parsed()) return periopt::cmd_oracle_compare(opt);
    if (simulate->parsed()) return periopt::cmd_simulate(opt);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return periopt::kExitError;
  }
  return periopt::kExitError;
}
