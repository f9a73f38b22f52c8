#ifndef GEOATT_CLI_HPP_
#define GEOATT_CLI_HPP_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace geoatt::cli {

struct SimulateOptions {
  /// One config runs alone; several fan out across worker threads.
  std::vector<std::string> configs;
  std::string out_dir = ".";
  std::vector<std::string> overrides;
  std::optional<double> dt;
  std::optional<double> duration;
  std::optional<std::uint64_t> seed;
  unsigned workers = 0;  // 0: hardware concurrency
};

/// Writes <name>.csv and <name>.summary.json per scenario and prints a table.
/// Exit 0 ok, 2 constraint violated, 3 invalid config, 4 infeasible start or
/// goal; with several configs the largest code wins.
int cmd_simulate(const SimulateOptions& opt, std::ostream& out, std::ostream& err);

struct GainOptions {
  std::string config;
  std::vector<std::string> overrides;
  std::size_t samples = 20000;  // for the n1, n2 estimate
  std::uint64_t seed = 7;
};

/// Prints the bound ledger, sampled (n1, n2), c_max and the W1/W2/M verdicts.
/// Exit 3 on invalid config, 0 otherwise (the verdict is printed, not encoded).
int cmd_validate_gains(const GainOptions& opt, std::ostream& out, std::ostream& err);

struct EulerOptions {
  std::string out_path;
  double from_deg = 0.05;
  double to_deg = 120.0;
  int samples = 2400;
  /// When set, angles come from simulating this scenario instead of a sweep.
  std::optional<std::string> config;
};

/// Writes the 3-1-3 table; exit 3 when the path is not writable.
int cmd_demo_euler(const EulerOptions& opt, std::ostream& out, std::ostream& err);

struct VerifyOptions {
  std::uint64_t seed = 42;
  std::size_t samples = 100;
  /// Test hook: negate e_RB while the suites run.
  bool flip_eRB_sign = false;
};

/// Exit 0 when every property holds, 1 otherwise, 3 for samples = 0.
int cmd_verify(const VerifyOptions& opt, std::ostream& out, std::ostream& err);

/// Reads GEOATT_LOG_LEVEL (error, warn, info, debug); logs go to stderr.
void configure_logging();

/// Full command-line front end.
int run(int argc, char** argv);

}  // namespace geoatt::cli

#endif  // GEOATT_CLI_HPP_
