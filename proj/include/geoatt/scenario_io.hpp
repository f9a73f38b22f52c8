#ifndef GEOATT_SCENARIO_IO_HPP_
#define GEOATT_SCENARIO_IO_HPP_

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "geoatt/sim.hpp"

namespace geoatt::io {

using nlohmann::json;

/// Reads a JSON file; ConfigError if unreadable or malformed.
json load_json(const std::string& path);

/// Applies `a.b.0.c=value` assignments. The value is parsed as JSON when
/// possible and taken as a string otherwise. Intermediate objects are created;
/// array indices must exist. Unknown keys are caught later by scenario_from_json.
void apply_overrides(json& doc, const std::vector<std::string>& overrides);

/// Strict parse: unknown keys, wrong types and out-of-range values raise
/// ConfigError. Angles are degrees in the file.
/// Rotations: {"axis": [x, y, z], "angle_deg": a} or 9 numbers, row-major.
sim::Scenario scenario_from_json(const json& doc);

/// Rotations are written as row-major matrices. Custom disturbances throw.
json scenario_to_json(const sim::Scenario& s);

sim::Scenario load_scenario(const std::string& path,
                            const std::vector<std::string>& overrides = {});

so3::Rotation rotation_from_json(const json& j);

enum class ExitStatus : int {
  kOk = 0,
  kPropertyFailure = 1,
  kConstraintViolated = 2,
  kInvalidConfig = 3,
  kInfeasible = 4,
};

struct RunSummary {
  std::string scenario;
  double terminal_psi = 0.0;
  double terminal_delta_error_inf = 0.0;
  std::vector<double> min_margin_deg;
  std::size_t lyapunov_violations = 0;
  bool lyapunov_applicable = false;
  double max_lyapunov_increase = 0.0;
  double max_psi_rate_residual = 0.0;
  double wall_time_s = 0.0;
  std::size_t steps = 0;
  int substeps = 0;
  ExitStatus exit_status = ExitStatus::kOk;
  std::optional<sim::Violation> violation;
};

RunSummary summarize(const sim::Scenario& s, const sim::RunResult& r);
json summary_to_json(const RunSummary& s);
void write_summary(const RunSummary& s, const std::string& path);

}  // namespace geoatt::io

#endif  // GEOATT_SCENARIO_IO_HPP_
