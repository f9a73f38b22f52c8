#include "geoatt/sim.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <ostream>
#include <thread>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "geoatt/errors.hpp"

namespace geoatt::sim {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

std::size_t step_count(const Scenario& s) {
  return static_cast<std::size_t>(std::llround(s.T / s.dt));
}

// Target attitude of each segment: waypoints in order, then the final goal.
std::vector<Rotation> targets(const Scenario& s) {
  std::vector<Rotation> out;
  out.reserve(s.waypoints.size() + 1);
  for (const Waypoint& w : s.waypoints) out.push_back(w.R);
  out.push_back(s.Rd);
  return out;
}

}  // namespace

void validate_scenario(const Scenario& s) {
  auto positive = [](double x) { return std::isfinite(x) && x > 0.0; };
  if (!positive(s.T)) throw ConfigError("T must be positive");
  if (!positive(s.dt)) throw ConfigError("dt must be positive");
  if (s.dt > s.T) throw ConfigError("dt must not exceed T");
  if (s.substeps < 0) throw ConfigError("substeps must be >= 0");
  if (!s.omega0.allFinite()) throw ConfigError("Omega0 must be finite");
  if (!(s.waypoint_psi_threshold >= 0.0)) {
    throw ConfigError("waypoint_psi_threshold must be >= 0");
  }
  if (!positive(s.estimate_clamp_factor)) {
    throw ConfigError("estimate_clamp_factor must be positive");
  }
  for (const Waypoint& w : s.waypoints) {
    if (!(w.dwell_s > 0.0) || !std::isfinite(w.dwell_s)) {
      throw ConfigError("waypoint dwell_s must be positive");
    }
  }
  if (s.psi_cap && !positive(*s.psi_cap)) throw ConfigError("psi_cap must be positive");
  if (!s.beta_caps.empty() && s.beta_caps.size() != s.model.cones.size()) {
    throw ConfigError("beta_caps needs one entry per cone");
  }
  try {
    control::validate(s.params);
  } catch (const DomainInvalid& e) {
    throw ConfigError(e.what());
  }
  if (s.params.mode == control::Mode::kAdaptive && s.disturbance.dim() <= 0) {
    throw ConfigError("adaptive mode needs a disturbance dimension p > 0");
  }

  if (!geometry::is_feasible(s.R0, s.model)) {
    throw InfeasibleGoal("initial attitude R0 violates a constraint");
  }
  if (!geometry::is_feasible(s.Rd, s.model)) {
    throw InfeasibleGoal("desired attitude Rd violates a constraint");
  }
  for (std::size_t i = 0; i < s.waypoints.size(); ++i) {
    if (!geometry::is_feasible(s.waypoints[i].R, s.model)) {
      throw InfeasibleGoal(fmt::format("waypoint {} violates a constraint", i + 1));
    }
  }
}

int effective_substeps(const Scenario& s) {
  if (s.substeps > 0) return s.substeps;
  const double lm = s.params.J.lambda_min();
  const double trace_g = s.model.weights.trace();
  const double fast = s.params.kOmega / lm + std::sqrt(s.params.kR * trace_g / lm);
  return std::max(1, static_cast<int>(std::ceil(s.dt * fast / 0.3)));
}

RunResult run(const Scenario& s) {
  validate_scenario(s);
  const auto wall_start = std::chrono::steady_clock::now();

  const control::ControllerParams& params = s.params;
  const geometry::ErrorModel& model = s.model;
  const dynamics::DisturbanceModel& dist = s.disturbance;
  const bool adaptive = params.mode == control::Mode::kAdaptive;
  const int p = dist.dim();
  const std::vector<Rotation> goals = targets(s);
  const std::size_t last_segment = goals.size() - 1;

  RunResult result;
  TrajectoryLog& log = result.log;
  log.scenario_name = s.name;
  log.mode = params.mode;
  log.disturbance_kind = dist.kind();
  log.dt = s.dt;
  log.kOmega = params.kOmega;
  log.kR = params.kR;
  log.cone_count = model.cones.size();
  log.p = p;
  for (const auto& cone : model.cones) {
    log.cone_theta_deg.push_back(cone.theta() / kDeg);
    log.cone_v.push_back(cone.v());
  }
  log.notes = s.notes;
  log.has_waypoints = !s.waypoints.empty();

  const std::size_t n_steps = step_count(s);
  const int substeps = effective_substeps(s);
  const double h = s.dt / substeps;
  log.records.reserve(n_steps + 1);

  std::size_t segment = 0;
  double segment_start = 0.0;
  const Rotation* rd = &goals[0];

  const double clamp = s.estimate_clamp_factor * dist.bound_delta();
  bool clamp_warned = false;

  auto field = [&](double tau, const dynamics::BodyState& b, const VecX& aux) {
    const geometry::ErrorTerms terms = geometry::evaluate(b.R, *rd, model);
    const dynamics::Mat3X w = dist.W(b.R, b.omega);
    const Vec3 u = control::control_from_terms(b, terms, params, w, aux);
    const Vec3 wd = dynamics::omega_dot(b, u, params.J, dist, tau, params.gravity);
    VecX ad = adaptive ? control::estimator_rate_from_terms(b, terms, params, w) : VecX();
    return std::pair<Vec3, VecX>{wd, std::move(ad)};
  };

  auto record = [&](double t, const dynamics::AugmentedState& x) {
    LogRecord rec;
    rec.t = t;
    rec.R = x.body.R.matrix();
    rec.omega = x.body.omega;
    const geometry::ErrorTerms terms = geometry::evaluate(x.body.R, *rd, model);
    rec.e_R = terms.e_R;
    rec.psi = terms.psi;
    rec.A = terms.A;
    rec.B = terms.B;
    const dynamics::Mat3X w = dist.W(x.body.R, x.body.omega);
    rec.u = control::control_from_terms(x.body, terms, params, w, x.aux);
    rec.delta_true = dist.delta(t);
    rec.delta_bar = adaptive ? x.aux : VecX::Zero(p);
    rec.angle_deg.reserve(model.cones.size());
    for (const auto& cone : model.cones) {
      rec.angle_deg.push_back(geometry::cone_angle_deg(x.body.R, model.sensor, cone));
    }
    if (adaptive) {
      rec.V = control::lyapunov_adaptive(x.body, terms, rec.delta_bar - rec.delta_true, params);
    } else {
      rec.V = control::lyapunov_smooth(x.body, terms.psi, params);
    }
    rec.segment = static_cast<int>(segment);
    log.records.push_back(std::move(rec));
  };

  dynamics::AugmentedState x{dynamics::BodyState{s.R0, s.omega0},
                             adaptive ? VecX(VecX::Zero(p)) : VecX()};
  record(0.0, x);
  dist.check_bounds(x.body.R, x.body.omega, 0.0);

  for (std::size_t k = 1; k <= n_steps; ++k) {
    const double t0 = static_cast<double>(k - 1) * s.dt;
    double substep_end = t0;
    try {
      for (int j = 0; j < substeps; ++j) {
        const double ts = t0 + j * h;
        substep_end = ts + h;
        x = dynamics::step_augmented(x, ts, h, s.integrator, field);
        geometry::require_feasible(x.body.R, model, ts + h);
        if (adaptive && clamp > 0.0) {
          const double peak = x.aux.cwiseAbs().maxCoeff();
          if (peak > clamp) {
            if (!clamp_warned) {
              spdlog::warn("{}: disturbance estimate clamped at t={:.6g} (|est|={:.6g})",
                           s.name, ts + h, peak);
              clamp_warned = true;
            }
            x.aux = x.aux.cwiseMax(-clamp).cwiseMin(clamp);
          }
        }
        if (!x.body.omega.allFinite() || !x.body.R.matrix().allFinite()) {
          throw Degenerate(fmt::format("state became non-finite at t={}", ts + h));
        }
      }
    } catch (const ConstraintViolated& e) {
      // Stage evaluations carry no time; blame the substep they belong to.
      const double tv = std::isnan(e.time()) ? substep_end : e.time();
      result.violation = Violation{tv, e.cone_index()};
      spdlog::error("{}: constraint {} violated at t={:.6g}; log truncated", s.name,
                    e.cone_index() + 1, tv);
      break;
    }
    const double t = static_cast<double>(k) * s.dt;
    record(t, x);
    dist.check_bounds(x.body.R, x.body.omega, t);

    if (segment < last_segment) {
      const bool reached = log.records.back().psi < s.waypoint_psi_threshold;
      const bool expired = t - segment_start >= s.waypoints[segment].dwell_s - 1e-12;
      if (reached || expired) {
        ++segment;
        segment_start = t;
        rd = &goals[segment];
        spdlog::info("{}: switching to set point {} at t={:.6g}", s.name, segment + 1, t);
      }
    }
  }

  estimate_vdot(log);
  result.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  return result;
}

std::vector<RunResult> run_batch(const std::vector<Scenario>& scenarios, unsigned workers) {
  std::vector<RunResult> results(scenarios.size());
  std::vector<std::exception_ptr> errors(scenarios.size());
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < scenarios.size(); i = next++) {
      try {
        results[i] = run(scenarios[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const unsigned n = std::min<unsigned>(workers, static_cast<unsigned>(scenarios.size()));
  for (unsigned i = 0; i < n; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

// --- reference scenarios -----------------------------------------------------

std::string renormalization_note(const std::vector<Vec3>& given) {
  std::string norms;
  bool changed = false;
  for (std::size_t i = 0; i < given.size(); ++i) {
    const double n = given[i].norm();
    changed = changed || std::abs(n - 1.0) > 1e-12;
    norms += fmt::format("{}{:.6f}", i ? "," : "", n);
  }
  if (!changed) return {};
  return "constraint vectors renormalized to unit length; given norms " + norms;
}

std::vector<Vec3> reference_cone_vectors() {
  return {Vec3(0.174, -0.934, -0.034), Vec3(0.0, 0.7071, 0.7071),
          Vec3(-0.853, 0.436, -0.286), Vec3(-0.122, -0.140, -0.983)};
}

namespace {

Mat3 reference_inertia() {
  Mat3 j;
  j << 5.5, 0.06, -0.03,
       0.06, 5.5, 0.01,
       -0.03, 0.01, 0.1;
  return 1e-3 * j;
}

Rotation yaw(double deg) { return so3::exp_so3(deg * kDeg * Vec3::UnitZ()); }

// Attitude whose sensor axis e1 points at (azimuth, elevation).
Rotation point_e1(double az_deg, double el_deg) {
  return yaw(az_deg) * so3::exp_so3(-el_deg * kDeg * Vec3::UnitY());
}

Scenario base_multi_constraint() {
  const std::vector<double> thetas{40.0, 40.0, 40.0, 20.0};
  const std::vector<Vec3> printed = reference_cone_vectors();
  std::vector<geometry::ConstraintCone> cones;
  for (std::size_t i = 0; i < printed.size(); ++i) {
    cones.emplace_back(so3::UnitVec3::normalized(printed[i]), thetas[i] * kDeg);
  }
  Scenario s{
      .name = "",
      .params = control::ControllerParams{.kR = 0.4, .kOmega = 0.296, .kDelta = 0.5, .c = 1.0,
                                          .J = dynamics::InertiaMatrix(reference_inertia()),
                                          .mode = control::Mode::kSmooth,
                                          .gravity = std::nullopt},
      .model = geometry::ErrorModel{geometry::AttractiveWeights(Vec3(0.9, 1.1, 1.0)),
                                    so3::UnitVec3(Vec3::UnitX()), std::move(cones),
                                    geometry::BarrierShape(15.0)},
      .R0 = yaw(225.0),
      .Rd = Rotation::identity(),
  };
  s.disturbance = dynamics::make_reference_disturbances().first;
  s.T = 20.0;
  s.dt = 1e-3;
  s.notes.push_back(renormalization_note(printed));
  return s;
}

Scenario base_single_cone() {
  Scenario s = base_multi_constraint();
  s.model.cones = {geometry::ConstraintCone(
      so3::UnitVec3::normalized(Vec3(1.0, 1.0, 0.0)), 12.0 * kDeg)};
  s.R0 = yaw(90.0);
  s.notes.clear();
  return s;
}

}  // namespace

ReferenceScenarios make_paper_scenarios() {
  ReferenceScenarios out{base_multi_constraint(), base_multi_constraint(), base_single_cone(),
                     base_single_cone()};

  out.multi_constraint_smooth.name = "multi_constraint_smooth";
  out.multi_constraint_smooth.params.mode = control::Mode::kSmooth;

  out.multi_constraint_adaptive.name = "multi_constraint_adaptive";
  out.multi_constraint_adaptive.params.mode = control::Mode::kAdaptive;

  Scenario& tv = out.time_varying;
  tv.name = "time_varying";
  tv.params.mode = control::Mode::kAdaptive;
  tv.disturbance = dynamics::make_reference_disturbances().second;

  Scenario& ex = out.experiment_like;
  ex.name = "experiment_like";
  ex.params.mode = control::Mode::kAdaptive;
  ex.params.kR = 0.4;
  ex.params.kOmega = 0.7;
  ex.params.c = 0.1;
  ex.params.kDelta = 0.05;
  ex.model.shape = geometry::BarrierShape(8.0);
  ex.params.gravity = dynamics::GravityMoment{Vec3(0.0, 0.0, 0.05), 1.0, 9.81};
  ex.disturbance = dynamics::DisturbanceModel::constant(Vec3(0.02, 0.02, 0.02));
  ex.waypoints = {Waypoint{point_e1(65.0, 16.0), 10.0}, Waypoint{point_e1(25.0, 16.0), 10.0}};
  ex.T = 40.0;
  ex.notes.push_back(
      "assumed values: inertia, r_cg, mass, disturbance and both set points");
  return out;
}

// --- monitors ---------------------------------------------------------------

double lyapunov_tolerance(double dt) { return 1e-6 + 10.0 * dt * dt; }

void estimate_vdot(TrajectoryLog& log) {
  auto& r = log.records;
  const std::size_t n = r.size();
  if (n < 2) {
    if (n == 1) r[0].Vdot_estimate = 0.0;
    return;
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (k == 0) {
      r[k].Vdot_estimate = (r[1].V - r[0].V) / (r[1].t - r[0].t);
    } else if (k == n - 1) {
      r[k].Vdot_estimate = (r[k].V - r[k - 1].V) / (r[k].t - r[k - 1].t);
    } else {
      r[k].Vdot_estimate = (r[k + 1].V - r[k - 1].V) / (r[k + 1].t - r[k - 1].t);
    }
  }
}

MonitorReport monitors(const TrajectoryLog& log) {
  MonitorReport rep;
  const auto& r = log.records;
  rep.min_margin_deg.assign(log.cone_count, std::numeric_limits<double>::infinity());
  if (r.empty()) return rep;

  using Kind = dynamics::DisturbanceModel::Kind;
  const bool smooth = log.mode == control::Mode::kSmooth;
  const bool still = log.disturbance_kind == Kind::kNone;
  const bool constant = still || log.disturbance_kind == Kind::kConstant;
  rep.lyapunov_applicable = !log.has_waypoints && (smooth ? still : constant);

  const double tol = lyapunov_tolerance(log.dt);
  rep.max_lyapunov_increase = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < r.size(); ++k) {
    if (r[k].segment != r[k + 1].segment) continue;
    const double step = r[k + 1].t - r[k].t;
    const double dv = r[k + 1].V - r[k].V;
    rep.max_lyapunov_increase = std::max(rep.max_lyapunov_increase, dv);
    double allowed = tol * step;
    if (smooth) {
      const double w2 = std::min(r[k].omega.squaredNorm(), r[k + 1].omega.squaredNorm());
      allowed = (-log.kOmega * w2 + tol) * step;
    }
    if (rep.lyapunov_applicable && dv > allowed) ++rep.lyapunov_violations;
  }
  if (r.size() < 2) rep.max_lyapunov_increase = 0.0;

  for (std::size_t k = 1; k + 1 < r.size(); ++k) {
    if (r[k - 1].segment != r[k + 1].segment) continue;
    const double rate = (r[k + 1].psi - r[k - 1].psi) / (r[k + 1].t - r[k - 1].t);
    rep.max_psi_rate_residual =
        std::max(rep.max_psi_rate_residual, std::abs(rate - r[k].e_R.dot(r[k].omega)));
  }

  for (const LogRecord& rec : r) {
    for (std::size_t i = 0; i < log.cone_count; ++i) {
      rep.min_margin_deg[i] =
          std::min(rep.min_margin_deg[i], rec.angle_deg[i] - log.cone_theta_deg[i]);
    }
  }

  rep.terminal_psi = r.back().psi;
  rep.terminal_delta_error_inf =
      r.back().delta_bar.size() > 0
          ? (r.back().delta_bar - r.back().delta_true).cwiseAbs().maxCoeff()
          : 0.0;

  if (smooth && still && !log.has_waypoints && log.kR > 0.0) {
    const double cap = r.front().V / log.kR;
    for (const LogRecord& rec : r) {
      if (rec.psi > cap * (1.0 + 1e-9) + 1e-12) {
        rep.psi_bounded_by_V0 = false;
        break;
      }
    }
  }
  return rep;
}

// --- CSV --------------------------------------------------------------------

std::vector<std::string> csv_columns(const TrajectoryLog& log) {
  std::vector<std::string> cols{"t"};
  for (int i = 1; i <= 3; ++i) {
    for (int j = 1; j <= 3; ++j) cols.push_back(fmt::format("R_{}{}", i, j));
  }
  for (int i = 1; i <= 3; ++i) cols.push_back(fmt::format("Omega_{}", i));
  for (int i = 1; i <= 3; ++i) cols.push_back(fmt::format("e_R_{}", i));
  cols.emplace_back("Psi");
  cols.emplace_back("A");
  for (std::size_t i = 1; i <= log.cone_count; ++i) cols.push_back(fmt::format("B_{}", i));
  for (int i = 1; i <= 3; ++i) cols.push_back(fmt::format("u_{}", i));
  for (int i = 1; i <= log.p; ++i) cols.push_back(fmt::format("delta_bar_{}", i));
  for (int i = 1; i <= log.p; ++i) cols.push_back(fmt::format("delta_true_{}", i));
  for (std::size_t i = 1; i <= log.cone_count; ++i) {
    cols.push_back(fmt::format("angle_to_cone_{}", i));
  }
  cols.emplace_back("V");
  cols.emplace_back("Vdot_estimate");
  return cols;
}

namespace {

std::string join_doubles(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += fmt::format("{}{:.17g}", i ? "," : "", v[i]);
  return s;
}

}  // namespace

void write_csv(const TrajectoryLog& log, std::ostream& out) {
  std::string meta = fmt::format("# scenario={}; mode={}; disturbance={}; dt={:.17g}; cones={}",
                                 log.scenario_name, control::to_string(log.mode),
                                 dynamics::to_string(log.disturbance_kind), log.dt,
                                 log.cone_count);
  meta += "; cone_theta_deg=" + join_doubles(log.cone_theta_deg);
  for (std::size_t i = 0; i < log.cone_v.size(); ++i) {
    const Vec3& v = log.cone_v[i];
    meta += fmt::format("; cone_v_{}={:.17g} {:.17g} {:.17g}", i + 1, v.x(), v.y(), v.z());
  }
  out << meta << '\n';
  for (const std::string& note : log.notes) out << "# note: " << note << '\n';

  const std::vector<std::string> cols = csv_columns(log);
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';

  fmt::memory_buffer buf;
  auto put = [&](double x) { fmt::format_to(std::back_inserter(buf), ",{:.17g}", x); };
  for (const LogRecord& r : log.records) {
    buf.clear();
    fmt::format_to(std::back_inserter(buf), "{:.17g}", r.t);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) put(r.R(i, j));
    }
    for (int i = 0; i < 3; ++i) put(r.omega(i));
    for (int i = 0; i < 3; ++i) put(r.e_R(i));
    put(r.psi);
    put(r.A);
    for (double b : r.B) put(b);
    for (int i = 0; i < 3; ++i) put(r.u(i));
    for (Eigen::Index i = 0; i < r.delta_bar.size(); ++i) put(r.delta_bar(i));
    for (Eigen::Index i = 0; i < r.delta_true.size(); ++i) put(r.delta_true(i));
    for (double a : r.angle_deg) put(a);
    put(r.V);
    put(r.Vdot_estimate);
    buf.push_back('\n');
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  }
}

void write_csv(const TrajectoryLog& log, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open " + path + " for writing");
  write_csv(log, f);
  if (!f) throw Error("write failed for " + path);
}

// --- Euler 3-1-3 ------------------------------------------------------------

Rotation euler313_matrix(const Vec3& angles) {
  return so3::exp_so3(angles(0) * Vec3::UnitZ()) * so3::exp_so3(angles(1) * Vec3::UnitX()) *
         so3::exp_so3(angles(2) * Vec3::UnitZ());
}

Vec3 euler313_angles(const Rotation& r) {
  const Mat3& m = r.matrix();
  const double c2 = std::clamp(m(2, 2), -1.0, 1.0);
  const double th2 = std::acos(c2);
  if (std::abs(std::sin(th2)) < 1e-12) {
    // Gimbal lock: only theta1 +- theta3 is defined; put it all in theta1.
    return Vec3(std::atan2(m(1, 0), m(0, 0)), th2, 0.0);
  }
  const double th1 = std::atan2(m(0, 2), -m(1, 2));
  const double th3 = std::atan2(m(2, 0), m(2, 1));
  return Vec3(th1, th2, th3);
}

Vec3 euler313_rates(const Vec3& angles, const Vec3& omega) {
  const double s2 = std::sin(angles(1));
  const double c2 = std::cos(angles(1));
  const double s3 = std::sin(angles(2));
  const double c3 = std::cos(angles(2));
  const double q = omega(0) * s3 + omega(1) * c3;
  return Vec3(q / s2, omega(0) * c3 - omega(1) * s3, -q * c2 / s2 + omega(2));
}

namespace {

EulerSample make_sample(double t, const Vec3& angles, const Vec3& omega) {
  EulerSample e;
  e.t = t;
  e.angles = angles;
  e.singular = std::abs(std::sin(angles(1))) < kEulerSingularSin;
  e.rates = euler313_rates(angles, omega);
  return e;
}

}  // namespace

std::vector<EulerSample> euler313_demo(const TrajectoryLog& log) {
  std::vector<EulerSample> out;
  out.reserve(log.records.size());
  for (const LogRecord& r : log.records) {
    const Vec3 angles = euler313_angles(Rotation::unchecked(r.R));
    out.push_back(make_sample(r.t, angles, r.omega));
  }
  return out;
}

std::vector<EulerSample> euler313_sweep(const EulerSweep& sweep) {
  if (sweep.samples < 2) throw ConfigError("euler sweep needs at least 2 samples");
  std::vector<EulerSample> out;
  out.reserve(static_cast<std::size_t>(sweep.samples));
  for (int i = 0; i < sweep.samples; ++i) {
    const double f = static_cast<double>(i) / (sweep.samples - 1);
    const double th2 = sweep.theta2_from_deg + f * (sweep.theta2_to_deg - sweep.theta2_from_deg);
    const Vec3 angles(sweep.theta1_deg * kDeg, th2 * kDeg, sweep.theta3_deg * kDeg);
    out.push_back(make_sample(static_cast<double>(i), angles, sweep.omega));
  }
  return out;
}

double max_rate_in_window(const std::vector<EulerSample>& samples, double lo_deg,
                          double hi_deg) {
  double best = 0.0;
  for (const EulerSample& e : samples) {
    const double th2 = e.angles(1) / kDeg;
    if (th2 >= lo_deg && th2 <= hi_deg) best = std::max(best, e.rates.norm());
  }
  return best;
}

void write_euler_csv(const std::vector<EulerSample>& samples, std::ostream& out) {
  out << "t,theta1,theta2,theta3,theta1_dot,theta2_dot,theta3_dot,singular\n";
  for (const EulerSample& e : samples) {
    out << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{}\n", e.t,
                       e.angles(0), e.angles(1), e.angles(2), e.rates(0), e.rates(1),
                       e.rates(2), e.singular ? 1 : 0);
  }
}

}  // namespace geoatt::sim
