#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "periopt/fixed_point.hpp"
#include "periopt/horizon.hpp"

namespace periopt {

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Parsed run configuration: model block, utility block, numerics block and
// command options. One JSON file, one canonical schema (see README).
struct RunConfig {
  MarketModel model;
  UtilitySpec spec;
  double x0 = 1.0;
  double y0 = 0.0;
  bool M0_supplied = false;

  std::vector<double> y_grid;
  std::vector<double> x_grid;  // for the value surface
  FixedPointConfig fixed_point;
  HorizonPlan horizon;
  bool horizon_n_supplied = false;
  std::string engine = "auto";

  static RunConfig from_file(const std::string& path);   // throws ConfigError
  static RunConfig from_json_text(const std::string& text);
  std::string canonical_json() const;
  std::uint64_t config_hash() const;  // FNV-1a over the canonical dump
};

struct ValidationReport {
  bool pass = false;
  AssumptionReport assumption;
  double M0_estimate = 0.0;
  bool M0_consistent = true;
  std::vector<std::string> warnings;
  std::string failure;
};

ValidationReport validate_config(const RunConfig& cfg);

// Deterministic text artifacts: '.' decimal, %.17g floats, atomic
// temp-then-rename writes.
void write_text_atomic(const std::string& path, const std::string& content);
std::string format_double(double v);

}  // namespace periopt
