#pragma once

#include <optional>
#include <string>

namespace periopt {

// Exit codes shared by the CLI and the in-process command API:
// 0 ok, 2 assumption failure / wrong model class, 3 malformed config,
// 4 non-convergence, 5 verification failure, 1 unexpected error.
enum ExitCode {
  kExitOk = 0,
  kExitError = 1,
  kExitAssumption = 2,
  kExitBadConfig = 3,
  kExitNoConvergence = 4,
  kExitVerifyFailed = 5,
};

struct CommandOptions {
  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> paths;
  bool refine = false;
  bool allow_uncertified = false;
  bool solve_first = false;
  std::string utility_override;  // "", "power" or "log"
  std::string policy = "merton-log";
  double policy_value = 0.0;  // for --policy constant
  bool timing = false;
  bool quiet = false;
};

int cmd_validate(const CommandOptions& opt);
int cmd_solve(const CommandOptions& opt);
int cmd_verify(const CommandOptions& opt);
int cmd_oracle_compare(const CommandOptions& opt);
int cmd_simulate(const CommandOptions& opt);

}  // namespace periopt
