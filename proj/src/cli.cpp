#include "geoatt/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <variant>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "geoatt/errors.hpp"
#include "geoatt/scenario_io.hpp"
#include "geoatt/sim.hpp"
#include "geoatt/verify.hpp"

namespace geoatt::cli {

namespace fs = std::filesystem;
using io::ExitStatus;

namespace {

int code(ExitStatus s) { return static_cast<int>(s); }

std::vector<std::string> all_overrides(const SimulateOptions& opt) {
  std::vector<std::string> out = opt.overrides;
  if (opt.dt) out.push_back(fmt::format("dt={:.17g}", *opt.dt));
  if (opt.duration) out.push_back(fmt::format("T={:.17g}", *opt.duration));
  if (opt.seed) out.push_back(fmt::format("seed={}", *opt.seed));
  return out;
}

// Loads and validates one config; on failure prints the reason and returns
// the exit status instead.
std::variant<sim::Scenario, ExitStatus> prepare(const std::string& path,
                                                const std::vector<std::string>& overrides,
                                                std::ostream& err) {
  try {
    sim::Scenario s = io::load_scenario(path, overrides);
    sim::validate_scenario(s);
    return s;
  } catch (const InfeasibleGoal& e) {
    fmt::print(err, "{}: infeasible: {}\n", path, e.what());
    return ExitStatus::kInfeasible;
  } catch (const ConfigError& e) {
    fmt::print(err, "{}: invalid config: {}\n", path, e.what());
    return ExitStatus::kInvalidConfig;
  } catch (const DomainInvalid& e) {
    fmt::print(err, "{}: invalid config: {}\n", path, e.what());
    return ExitStatus::kInvalidConfig;
  }
}

std::string join(const std::vector<double>& v, const char* spec) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    s += (i ? " " : "") + fmt::format(fmt::runtime(spec), v[i]);
  }
  return s;
}

void print_summary_table(const std::vector<io::RunSummary>& rows, std::ostream& out) {
  fmt::print(out, "{:<28} {:>6} {:>12} {:>12} {:>8} {:>9}  {}\n", "scenario", "status",
             "terminal_psi", "|dbar-d|inf", "lyap_vio", "wall_s", "min_margin_deg");
  for (const io::RunSummary& r : rows) {
    fmt::print(out, "{:<28} {:>6} {:>12.4e} {:>12.4e} {:>8} {:>9.3f}  {}\n", r.scenario,
               static_cast<int>(r.exit_status), r.terminal_psi, r.terminal_delta_error_inf,
               r.lyapunov_violations, r.wall_time_s, join(r.min_margin_deg, "{:.3f}"));
  }
}

}  // namespace

int cmd_simulate(const SimulateOptions& opt, std::ostream& out, std::ostream& err) {
  if (opt.configs.empty()) {
    fmt::print(err, "simulate: no config given\n");
    return code(ExitStatus::kInvalidConfig);
  }
  try {
    fs::create_directories(opt.out_dir);
  } catch (const fs::filesystem_error& e) {
    fmt::print(err, "cannot create output directory {}: {}\n", opt.out_dir, e.what());
    return code(ExitStatus::kInvalidConfig);
  }

  const std::vector<std::string> overrides = all_overrides(opt);
  int worst = 0;
  std::vector<sim::Scenario> scenarios;
  for (const std::string& path : opt.configs) {
    auto prepared = prepare(path, overrides, err);
    if (auto* status = std::get_if<ExitStatus>(&prepared)) {
      worst = std::max(worst, code(*status));
    } else {
      scenarios.push_back(std::move(std::get<sim::Scenario>(prepared)));
    }
  }

  std::map<std::string, int> seen;
  for (const sim::Scenario& s : scenarios) {
    if (++seen[s.name] > 1) {
      fmt::print(err, "duplicate scenario name '{}' would overwrite outputs\n", s.name);
      return code(ExitStatus::kInvalidConfig);
    }
  }

  std::vector<sim::RunResult> results;
  try {
    results = scenarios.size() == 1 ? std::vector<sim::RunResult>{sim::run(scenarios[0])}
                                    : sim::run_batch(scenarios, opt.workers);
  } catch (const Error& e) {
    fmt::print(err, "simulation failed: {}\n", e.what());
    return code(ExitStatus::kInvalidConfig);
  }

  std::vector<io::RunSummary> rows;
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    const sim::Scenario& s = scenarios[i];
    io::RunSummary summary = io::summarize(s, results[i]);
    const fs::path base = fs::path(opt.out_dir) / s.name;
    try {
      sim::write_csv(results[i].log, base.string() + ".csv");
      io::write_summary(summary, base.string() + ".summary.json");
    } catch (const Error& e) {
      fmt::print(err, "{}\n", e.what());
      return code(ExitStatus::kInvalidConfig);
    }
    if (summary.violation) {
      fmt::print(err, "{}: constraint {} violated at t={:.6g}\n", s.name,
                 summary.violation->cone_index + 1, summary.violation->t);
    }
    worst = std::max(worst, code(summary.exit_status));
    rows.push_back(std::move(summary));
  }
  print_summary_table(rows, out);
  return worst;
}

int cmd_validate_gains(const GainOptions& opt, std::ostream& out, std::ostream& err) {
  sim::Scenario s = [&] {
    auto prepared = prepare(opt.config, opt.overrides, err);
    if (auto* status = std::get_if<ExitStatus>(&prepared)) throw *status;
    return std::get<sim::Scenario>(std::move(prepared));
  }();
  if (opt.samples == 0) {
    fmt::print(err, "samples must be positive\n");
    return code(ExitStatus::kInvalidConfig);
  }
  const auto& model = s.model;
  if (model.cones.empty()) {
    fmt::print(err, "validate-gains needs at least one cone\n");
    return code(ExitStatus::kInvalidConfig);
  }
  try {
    const double psi_cap = s.psi_cap.value_or(geometry::default_psi_cap(model.weights));
    const std::vector<double> betas =
        s.beta_caps.empty() ? geometry::default_beta_caps(model) : s.beta_caps;

    fmt::print(out, "scenario {}: kR={} kOmega={} kDelta={} c={} lambda_min(J)={:.6g} "
                    "lambda_max(J)={:.6g}\n",
               s.name, s.params.kR, s.params.kOmega, s.params.kDelta, s.params.c,
               s.params.J.lambda_min(), s.params.J.lambda_max());
    fmt::print(out, "domain: psi_cap={:.6g} beta_caps={}\n", psi_cap, join(betas, "{:.6g}"));

    const geometry::QuadraticBounds nb = geometry::estimate_quadratic_bounds(
        s.Rd, model, psi_cap, betas, opt.samples, opt.seed);
    fmt::print(out, "sampled quadratic bounds: n1={:.6g} n2={:.6g} ({} accepted of {}; "
                    "sampling estimate, not a proof)\n",
               nb.n1, nb.n2, nb.accepted, opt.samples);
    const geometry::QuadraticBounds safe = nb.widened(2.0);
    fmt::print(out, "gain checks use n1={:.6g} n2={:.6g} (2x margin)\n", safe.n1, safe.n2);

    for (auto constants : {geometry::BoundConstants::kMinBased,
                           geometry::BoundConstants::kMaxBased}) {
      const bool min_based = constants == geometry::BoundConstants::kMinBased;
      std::vector<geometry::BoundLedger> ledgers;
      fmt::print(out, "\nledger ({} constants{})\n", min_based ? "min-based" : "max-based",
                 min_based ? "" : ", e_RA bound holds");
      fmt::print(out, "{:>4} {:>8} {:>8} {:>8} {:>8} {:>8} {:>9} {:>9} {:>8} {:>9} {:>10} "
                      "{:>10} {:>10} {:>10} {:>10} {:>10} {:>10}\n",
                 "cone", "h1", "h2", "h3", "h4", "h5", "b1", "b2", "cA", "cB", "|E|<=",
                 "|F|<=", "|F|sup<=", "|e_RA|<=", "|e_RB|<=", "|e_RB|sup", "H");
      for (std::size_t i = 0; i < model.cones.size(); ++i) {
        const auto l = geometry::bound_ledger(model.weights, model.cones[i], model.shape,
                                              psi_cap, betas[i], constants);
        fmt::print(out, "{:>4} {:>8.4g} {:>8.4g} {:>8.4g} {:>8.4g} {:>8.4g} {:>9.5g} {:>9.5g} "
                        "{:>8.4g} {:>9.5g} {:>10.5g} {:>10.5g} {:>10.5g} {:>10.5g} {:>10.5g} {:>10.5g} "
                        "{:>10.5g}\n",
                   i + 1, l.h1, l.h2, l.h3, l.h4, l.h5, l.b1, l.b2, l.cA, l.cB, l.normE_bound,
                   l.normF_bound, l.normF_sup, l.eRA_bound, l.eRB_bound, l.eRB_sup, l.H);
        ledgers.push_back(l);
      }
      const double h = geometry::combined_rate_bound(ledgers);
      const control::GainCheck gc = control::validate_c(s.params, h, safe.n1);
      const control::DefinitenessReport dr =
          control::check_matrices_W1_W2_M(s.params, h, safe.n1, safe.n2);
      fmt::print(out, "combined H={:.6g}\n", h);
      fmt::print(out, "c_max={:.6g} (energy {:.6g}, rate {:.6g}); c={} -> {}\n", gc.c_max,
                 gc.c_max_energy, gc.c_max_rate, s.params.c,
                 gc.ok ? "OK" : "EXCEEDS c_max");
      fmt::print(out, "W1 {} | W2 {} | M {}\n",
                 dr.W1_positive ? "positive definite" : "NOT positive definite",
                 dr.W2_positive ? "positive definite" : "NOT positive definite",
                 dr.M_positive ? "positive definite" : "NOT positive definite");
    }
  } catch (const DomainInvalid& e) {
    fmt::print(err, "invalid config: {}\n", e.what());
    return code(ExitStatus::kInvalidConfig);
  }
  return 0;
}

int cmd_demo_euler(const EulerOptions& opt, std::ostream& out, std::ostream& err) {
  std::vector<sim::EulerSample> samples;
  if (opt.config) {
    auto prepared = prepare(*opt.config, {}, err);
    if (auto* status = std::get_if<ExitStatus>(&prepared)) return code(*status);
    const sim::RunResult r = sim::run(std::get<sim::Scenario>(prepared));
    samples = sim::euler313_demo(r.log);
  } else {
    if (opt.samples < 2 || !(opt.to_deg > opt.from_deg)) {
      fmt::print(err, "sweep needs samples >= 2 and to > from\n");
      return code(ExitStatus::kInvalidConfig);
    }
    sim::EulerSweep sw;
    sw.theta2_from_deg = opt.from_deg;
    sw.theta2_to_deg = opt.to_deg;
    sw.samples = opt.samples;
    samples = sim::euler313_sweep(sw);
  }
  std::ofstream f(opt.out_path, std::ios::binary);
  if (!f) {
    fmt::print(err, "cannot write {}\n", opt.out_path);
    return code(ExitStatus::kInvalidConfig);
  }
  sim::write_euler_csv(samples, f);
  f.close();
  if (!f) {
    fmt::print(err, "write failed for {}\n", opt.out_path);
    return code(ExitStatus::kInvalidConfig);
  }

  std::size_t flagged = 0;
  double max_th1 = 0.0;
  double at_deg = 0.0;
  for (const auto& e : samples) {
    flagged += e.singular ? 1 : 0;
    if (std::abs(e.rates(0)) > max_th1) {
      max_th1 = std::abs(e.rates(0));
      at_deg = e.angles(1) * 180.0 / M_PI;
    }
  }
  fmt::print(out, "{} rows, {} flagged singular (|sin theta2| < {})\n", samples.size(), flagged,
             sim::kEulerSingularSin);
  fmt::print(out, "max |theta1_dot| = {:.6g} rad/s at theta2 = {:.4g} deg\n", max_th1, at_deg);
  return 0;
}

int cmd_verify(const VerifyOptions& opt, std::ostream& out, std::ostream& err) {
  if (opt.samples == 0) {
    fmt::print(err, "samples must be positive\n");
    return code(ExitStatus::kInvalidConfig);
  }
  struct FlipGuard {
    explicit FlipGuard(bool on) { geometry::testing::set_flip_eRB_sign(on); }
    ~FlipGuard() { geometry::testing::set_flip_eRB_sign(false); }
  } guard(opt.flip_eRB_sign);

  const std::vector<verify::CheckResult> results =
      verify::run_all({.seed = opt.seed, .samples = opt.samples});
  for (const auto& r : results) {
    fmt::print(out, "[{}] {:<52} value={:.4g} threshold={:.4g} samples={} failures={}{}{}\n",
               r.passed ? "PASS" : "FAIL", r.name, r.value, r.threshold, r.samples, r.failures,
               r.detail.empty() ? "" : "  ", r.detail);
  }
  const bool ok = verify::all_passed(results);
  fmt::print(out, "{}\n", ok ? "all properties hold" : "property failure");
  return ok ? 0 : code(ExitStatus::kPropertyFailure);
}

void configure_logging() {
  auto logger = spdlog::get("geoatt");
  if (!logger) {
    logger = spdlog::stderr_color_mt("geoatt");
    spdlog::set_default_logger(logger);
  }
  spdlog::level::level_enum level = spdlog::level::warn;
  if (const char* env = std::getenv("GEOATT_LOG_LEVEL")) {
    const std::string v(env);
    if (v == "error") level = spdlog::level::err;
    else if (v == "warn") level = spdlog::level::warn;
    else if (v == "info") level = spdlog::level::info;
    else if (v == "debug") level = spdlog::level::debug;
    else spdlog::warn("ignoring GEOATT_LOG_LEVEL={} (use error, warn, info or debug)", v);
  }
  spdlog::set_level(level);
}

int run(int argc, char** argv) {
  configure_logging();
  CLI::App app{"Constrained geometric attitude control: simulation and checks"};
  app.require_subcommand(1);

  SimulateOptions sim_opt;
  std::vector<std::string> batch;
  double dt = 0.0;
  double duration = 0.0;
  std::uint64_t seed = 0;
  auto* simulate = app.add_subcommand("simulate", "Run a scenario and write CSV + summary");
  auto* config_opt = simulate->add_option("--config", sim_opt.configs, "Scenario JSON")
                         ->check(CLI::ExistingFile);
  auto* batch_opt = simulate->add_option("--batch", batch, "Several scenario JSONs, run in parallel")
                        ->check(CLI::ExistingFile);
  config_opt->excludes(batch_opt);
  simulate->add_option("--out", sim_opt.out_dir, "Output directory");
  simulate->add_option("--override", sim_opt.overrides, "KEY=VALUE, dotted path (repeatable)");
  auto* dt_opt = simulate->add_option("--dt", dt, "Log step (s)");
  auto* dur_opt = simulate->add_option("--duration", duration, "Duration T (s)");
  auto* seed_opt = simulate->add_option("--seed", seed, "Scenario seed");
  simulate->add_option("--workers", sim_opt.workers, "Worker threads for --batch");

  GainOptions gain_opt;
  auto* gains = app.add_subcommand("validate-gains", "Print bound ledger and c_max verdicts");
  gains->add_option("--config", gain_opt.config, "Scenario JSON")->required()
      ->check(CLI::ExistingFile);
  gains->add_option("--override", gain_opt.overrides, "KEY=VALUE (repeatable)");
  gains->add_option("--samples", gain_opt.samples, "Samples for n1, n2");
  gains->add_option("--seed", gain_opt.seed, "Sampling seed");

  EulerOptions euler_opt;
  std::string euler_config;
  auto* euler = app.add_subcommand("demo-euler", "Write the 3-1-3 singularity table");
  euler->add_option("--out", euler_opt.out_path, "Output CSV path")->required();
  euler->add_option("--from", euler_opt.from_deg, "Sweep start, theta2 in degrees");
  euler->add_option("--to", euler_opt.to_deg, "Sweep end, theta2 in degrees");
  euler->add_option("--samples", euler_opt.samples, "Sweep rows");
  auto* euler_cfg = euler->add_option("--config", euler_config,
                                      "Take angles from this scenario's trajectory");

  VerifyOptions verify_opt;
  auto* verify = app.add_subcommand("verify", "Run the property suites");
  verify->add_option("--seed", verify_opt.seed, "Seed");
  verify->add_option("--samples", verify_opt.samples, "Gradient draws (bound draws x1000)");
  verify->add_flag("--inject-eRB-sign-flip", verify_opt.flip_eRB_sign,
                   "Test hook: negate e_RB");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return code(ExitStatus::kInvalidConfig);
  }

  try {
    if (*simulate) {
      if (!batch.empty()) sim_opt.configs = batch;
      if (*dt_opt) sim_opt.dt = dt;
      if (*dur_opt) sim_opt.duration = duration;
      if (*seed_opt) sim_opt.seed = seed;
      return cmd_simulate(sim_opt, std::cout, std::cerr);
    }
    if (*gains) return cmd_validate_gains(gain_opt, std::cout, std::cerr);
    if (*euler) {
      if (*euler_cfg) euler_opt.config = euler_config;
      return cmd_demo_euler(euler_opt, std::cout, std::cerr);
    }
    if (*verify) return cmd_verify(verify_opt, std::cout, std::cerr);
  } catch (const ExitStatus& s) {
    return code(s);
  } catch (const ConfigError& e) {
    fmt::print(std::cerr, "invalid config: {}\n", e.what());
    return code(ExitStatus::kInvalidConfig);
  } catch (const InfeasibleGoal& e) {
    fmt::print(std::cerr, "infeasible: {}\n", e.what());
    return code(ExitStatus::kInfeasible);
  }
  return code(ExitStatus::kInvalidConfig);
}

}  // namespace geoatt::cli
