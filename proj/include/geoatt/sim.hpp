#ifndef GEOATT_SIM_HPP_
#define GEOATT_SIM_HPP_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "geoatt/control.hpp"
#include "geoatt/dynamics.hpp"
#include "geoatt/error_geometry.hpp"

namespace geoatt::sim {

using dynamics::VecX;
using so3::Rotation;

struct Waypoint {
  Rotation R;
  double dwell_s = 0.0;
};

struct Scenario {
  std::string name;
  control::ControllerParams params;
  geometry::ErrorModel model;
  Rotation R0;
  Rotation Rd;
  Vec3 omega0 = Vec3::Zero();
  dynamics::DisturbanceModel disturbance = dynamics::DisturbanceModel::none();
  std::vector<Waypoint> waypoints;
  double T = 20.0;
  double dt = 1e-3;
  std::uint64_t seed = 0;
  dynamics::Integrator integrator = dynamics::Integrator::kLieRk4;
  /// Integration steps per logged step; 0 picks a count from the fastest
  /// closed-loop rate.
  int substeps = 0;
  /// Switch to the next waypoint when Psi to the current one drops below this.
  double waypoint_psi_threshold = 0.02;
  /// Estimate components are clamped to +-factor * B_Delta (tripwire only).
  double estimate_clamp_factor = 10.0;
  std::optional<double> psi_cap;
  std::vector<double> beta_caps;
  /// Free-form lines copied into the CSV metadata header.
  std::vector<std::string> notes;
};

/// Throws ConfigError for invalid numbers and InfeasibleGoal when R0, Rd or
/// a waypoint is not strictly feasible.
void validate_scenario(const Scenario& s);

/// Substep count actually used by run().
int effective_substeps(const Scenario& s);

struct LogRecord {
  double t = 0.0;
  Mat3 R = Mat3::Identity();
  Vec3 omega = Vec3::Zero();
  Vec3 e_R = Vec3::Zero();
  double psi = 0.0;
  double A = 0.0;
  std::vector<double> B;
  Vec3 u = Vec3::Zero();
  VecX delta_bar;
  VecX delta_true;
  std::vector<double> angle_deg;
  double V = 0.0;
  double Vdot_estimate = 0.0;
  /// Index of the active set point (waypoints first, final goal last).
  int segment = 0;
};

struct TrajectoryLog {
  std::string scenario_name;
  control::Mode mode = control::Mode::kSmooth;
  dynamics::DisturbanceModel::Kind disturbance_kind = dynamics::DisturbanceModel::Kind::kNone;
  double dt = 0.0;
  double kOmega = 0.0;
  double kR = 0.0;
  std::size_t cone_count = 0;
  int p = 3;
  std::vector<double> cone_theta_deg;
  std::vector<Vec3> cone_v;
  std::vector<std::string> notes;
  bool has_waypoints = false;
  std::vector<LogRecord> records;
};

struct Violation {
  double t = 0.0;
  std::size_t cone_index = 0;
};

struct RunResult {
  TrajectoryLog log;
  /// Set when a constraint was hit; log then ends at the last feasible step.
  std::optional<Violation> violation;
  double wall_time_s = 0.0;
  [[nodiscard]] bool completed() const { return !violation.has_value(); }
};

/// Closed-loop simulation. The controller is evaluated inside every
/// integrator stage; feasibility is checked after every substep.
RunResult run(const Scenario& s);

/// Runs scenarios on up to `workers` threads (0: hardware concurrency).
/// Results keep input order; the first exception is rethrown after all finish.
std::vector<RunResult> run_batch(const std::vector<Scenario>& scenarios, unsigned workers = 0);

struct ReferenceScenarios {
  Scenario multi_constraint_smooth;
  Scenario multi_constraint_adaptive;
  Scenario time_varying;
  Scenario experiment_like;
};

/// Reference constraint vectors as given (not exactly unit length).
std::vector<Vec3> reference_cone_vectors();

ReferenceScenarios make_paper_scenarios();

/// Metadata line recording the norms of constraint vectors that were not unit
/// length before normalization; empty if all were unit.
std::string renormalization_note(const std::vector<Vec3>& given);

struct MonitorReport {
  bool lyapunov_applicable = false;
  double max_lyapunov_increase = 0.0;   // max over steps of V_{k+1} - V_k
  std::size_t lyapunov_violations = 0;
  double max_psi_rate_residual = 0.0;   // |central diff Psi - e_R . Omega|
  std::vector<double> min_margin_deg;   // min over time of angle_i - theta_i
  double terminal_psi = 0.0;
  double terminal_delta_error_inf = 0.0;
  bool psi_bounded_by_V0 = true;        // Psi(t) <= V(0) / kR, smooth runs
};

/// Per-step Lyapunov tolerance rate, 1e-6 + 10 dt^2.
double lyapunov_tolerance(double dt);

MonitorReport monitors(const TrajectoryLog& log);

/// Fills Vdot_estimate by central differences (one-sided at the ends).
void estimate_vdot(TrajectoryLog& log);

// CSV: one metadata comment line, a header row, then one row per record.
// Floats use 17 significant digits; LF line endings.
std::vector<std::string> csv_columns(const TrajectoryLog& log);
void write_csv(const TrajectoryLog& log, std::ostream& out);
void write_csv(const TrajectoryLog& log, const std::string& path);

// --- Euler 3-1-3 demo -------------------------------------------------------

struct EulerSample {
  double t = 0.0;
  Vec3 angles = Vec3::Zero();  // theta1, theta2, theta3 (rad)
  Vec3 rates = Vec3::Zero();   // rad/s
  bool singular = false;       // |sin theta2| < 0.01
};

inline constexpr double kEulerSingularSin = 0.01;

/// R = Rz(theta1) Rx(theta2) Rz(theta3)
Rotation euler313_matrix(const Vec3& angles);
/// theta2 in [0, pi]; theta1, theta3 in (-pi, pi].
Vec3 euler313_angles(const Rotation& r);
/// Euler-angle rates from body angular velocity. Infinite/NaN at theta2 = 0, pi.
Vec3 euler313_rates(const Vec3& angles, const Vec3& omega);

std::vector<EulerSample> euler313_demo(const TrajectoryLog& log);

struct EulerSweep {
  double theta2_from_deg = 0.05;
  double theta2_to_deg = 120.0;
  int samples = 2400;
  double theta1_deg = 30.0;
  double theta3_deg = 45.0;
  Vec3 omega = Vec3(1.0, 1.0, 0.0);
};

/// Synthetic sweep of theta2 with fixed theta1, theta3 and body rate; t is
/// the sample index.
std::vector<EulerSample> euler313_sweep(const EulerSweep& sweep);

/// Largest |rates| (Euclidean) among samples with theta2 in [lo, hi] degrees;
/// 0 if none.
double max_rate_in_window(const std::vector<EulerSample>& samples, double lo_deg,
                          double hi_deg);

void write_euler_csv(const std::vector<EulerSample>& samples, std::ostream& out);

}  // namespace geoatt::sim

#endif  // GEOATT_SIM_HPP_
