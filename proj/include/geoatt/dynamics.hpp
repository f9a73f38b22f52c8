#ifndef GEOATT_DYNAMICS_HPP_
#define GEOATT_DYNAMICS_HPP_

#include <functional>
#include <optional>
#include <string_view>
#include <utility>

#include <Eigen/Dense>

#include "geoatt/so3.hpp"

namespace geoatt::dynamics {

using so3::Rotation;
using VecX = Eigen::VectorXd;
using Mat3X = Eigen::Matrix<double, 3, Eigen::Dynamic>;

struct BodyState {
  Rotation R;
  Vec3 omega = Vec3::Zero();  // body frame, rad/s
};

/// Symmetric positive-definite inertia (kg m^2).
class InertiaMatrix {
 public:
  explicit InertiaMatrix(const Mat3& j);

  [[nodiscard]] const Mat3& matrix() const { return j_; }
  [[nodiscard]] const Mat3& inverse() const { return j_inv_; }
  [[nodiscard]] double lambda_min() const { return lambda_min_; }
  [[nodiscard]] double lambda_max() const { return lambda_max_; }

 private:
  Mat3 j_;
  Mat3 j_inv_;
  double lambda_min_;
  double lambda_max_;
};

/// Matched disturbance W(R, Omega) Delta(t), Delta in R^p.
class DisturbanceModel {
 public:
  enum class Kind { kNone, kConstant, kTimeVarying, kCustom };

  using DeltaFn = std::function<VecX(double)>;
  using WFn = std::function<Mat3X(const Rotation&, const Vec3&)>;

  static DisturbanceModel none(int p = 3);
  /// W = I.
  static DisturbanceModel constant(const Vec3& delta);
  /// Delta(t) = bias + amplitude [sin wt, cos wt, (sin wt + cos wt)/2], W = I.
  static DisturbanceModel time_varying(const Vec3& bias, double amplitude,
                                       double frequency);
  static DisturbanceModel custom(int p, DeltaFn delta, WFn w, double bound_w,
                                 double bound_delta);

  [[nodiscard]] Kind kind() const { return kind_; }
  [[nodiscard]] int dim() const { return p_; }
  [[nodiscard]] VecX delta(double t) const;
  [[nodiscard]] Mat3X W(const Rotation& r, const Vec3& omega) const;
  [[nodiscard]] Vec3 torque(const Rotation& r, const Vec3& omega, double t) const;
  [[nodiscard]] double bound_W() const { return bound_w_; }
  [[nodiscard]] double bound_delta() const { return bound_delta_; }

  /// Parameters of the built-in kinds, for serialization.
  [[nodiscard]] const Vec3& bias() const { return bias_; }
  [[nodiscard]] double amplitude() const { return amplitude_; }
  [[nodiscard]] double frequency() const { return frequency_; }

  void set_bounds(double bound_w, double bound_delta);

  /// Logs a warning (once per model) if |W| > B_W or |Delta| > B_Delta.
  /// Returns whether both bounds held.
  bool check_bounds(const Rotation& r, const Vec3& omega, double t) const;

 private:
  Kind kind_ = Kind::kNone;
  int p_ = 3;
  DeltaFn delta_fn_;
  WFn w_fn_;
  double bound_w_ = 1.0;
  double bound_delta_ = 0.0;
  Vec3 bias_ = Vec3::Zero();
  double amplitude_ = 0.0;
  double frequency_ = 0.0;
  mutable bool warned_ = false;
};

std::string_view to_string(DisturbanceModel::Kind kind);

/// Moment r_cg x m g R^T e3 about a pivot offset from the mass center.
struct GravityMoment {
  Vec3 r_cg = Vec3::Zero();  // m, body frame
  double mass = 0.0;         // kg
  double g = 9.81;

  [[nodiscard]] Vec3 moment(const Rotation& r) const;
};

/// J^{-1} (-Omega x J Omega + u + W Delta(t) [+ M_g])
Vec3 omega_dot(const BodyState& state, const Vec3& u, const InertiaMatrix& j,
               const DisturbanceModel& dist, double t,
               const std::optional<GravityMoment>& gravity = std::nullopt);

enum class Integrator { kRk4Project, kLieEuler, kLieRk4 };

std::string_view to_string(Integrator method);
std::optional<Integrator> integrator_from_string(std::string_view name);

/// Body state plus any extra states integrated alongside it (the
/// disturbance estimate in closed loop).
struct AugmentedState {
  BodyState body;
  VecX aux;
};

/// Field(t, body, aux) -> pair<Vec3 omega_dot, VecX aux_dot>.
template <class Field>
AugmentedState step_augmented(const AugmentedState& x, double t, double h,
                              Integrator method, const Field& field);

/// One step with u held constant over [t, t + dt].
BodyState step(const BodyState& state, const Vec3& u, const InertiaMatrix& j,
               const DisturbanceModel& dist, double t, double dt, Integrator method,
               const std::optional<GravityMoment>& gravity = std::nullopt);

/// The two disturbance models of the numerical examples:
/// constant [0.2, 0.2, 0.2] N m, and that bias plus
/// 0.02 [sin 9t, cos 9t, (sin 9t + cos 9t)/2] N m. Both with W = I.
std::pair<DisturbanceModel, DisturbanceModel> make_reference_disturbances();

/// 0.5 Omega^T J Omega
double kinetic_energy(const BodyState& state, const InertiaMatrix& j);

// ---------------------------------------------------------------------------

template <class Field>
AugmentedState step_augmented(const AugmentedState& x, double t, double h,
                              Integrator method, const Field& field) {
  const Mat3& r0 = x.body.R.matrix();
  const Vec3& w0 = x.body.omega;
  switch (method) {
    case Integrator::kLieEuler: {
      const auto [wd, ad] = field(t, x.body, x.aux);
      AugmentedState out;
      out.body.R = x.body.R * so3::exp_so3(h * w0);
      out.body.omega = w0 + h * wd;
      out.aux = x.aux + h * ad;
      return out;
    }
    case Integrator::kLieRk4: {
      // Runge-Kutta-Munthe-Kaas: R = R0 exp(theta), theta' = dexp^{-1} Omega.
      const auto [wd1, ad1] = field(t, x.body, x.aux);
      const Vec3 th1 = w0;

      const Vec3 theta2 = 0.5 * h * th1;
      BodyState b2{x.body.R * so3::exp_so3(theta2), w0 + 0.5 * h * wd1};
      const VecX a2 = x.aux + 0.5 * h * ad1;
      const auto [wd2, ad2] = field(t + 0.5 * h, b2, a2);
      const Vec3 th2 = so3::right_jacobian_inv(theta2) * b2.omega;

      const Vec3 theta3 = 0.5 * h * th2;
      BodyState b3{x.body.R * so3::exp_so3(theta3), w0 + 0.5 * h * wd2};
      const VecX a3 = x.aux + 0.5 * h * ad2;
      const auto [wd3, ad3] = field(t + 0.5 * h, b3, a3);
      const Vec3 th3 = so3::right_jacobian_inv(theta3) * b3.omega;

      const Vec3 theta4 = h * th3;
      BodyState b4{x.body.R * so3::exp_so3(theta4), w0 + h * wd3};
      const VecX a4 = x.aux + h * ad3;
      const auto [wd4, ad4] = field(t + h, b4, a4);
      const Vec3 th4 = so3::right_jacobian_inv(theta4) * b4.omega;

      AugmentedState out;
      out.body.R = x.body.R * so3::exp_so3(h / 6.0 * (th1 + 2.0 * th2 + 2.0 * th3 + th4));
      out.body.omega = w0 + h / 6.0 * (wd1 + 2.0 * wd2 + 2.0 * wd3 + wd4);
      out.aux = x.aux + h / 6.0 * (ad1 + 2.0 * ad2 + 2.0 * ad3 + ad4);
      return out;
    }
    case Integrator::kRk4Project:
    default: {
      // Classical RK4 on the nine entries of R, then back onto SO(3).
      const auto [wd1, ad1] = field(t, x.body, x.aux);
      const Mat3 k1 = r0 * so3::hat(w0);

      BodyState b2{Rotation::unchecked(r0 + 0.5 * h * k1), w0 + 0.5 * h * wd1};
      const VecX a2 = x.aux + 0.5 * h * ad1;
      const auto [wd2, ad2] = field(t + 0.5 * h, b2, a2);
      const Mat3 k2 = b2.R.matrix() * so3::hat(b2.omega);

      BodyState b3{Rotation::unchecked(r0 + 0.5 * h * k2), w0 + 0.5 * h * wd2};
      const VecX a3 = x.aux + 0.5 * h * ad2;
      const auto [wd3, ad3] = field(t + 0.5 * h, b3, a3);
      const Mat3 k3 = b3.R.matrix() * so3::hat(b3.omega);

      BodyState b4{Rotation::unchecked(r0 + h * k3), w0 + h * wd3};
      const VecX a4 = x.aux + h * ad3;
      const auto [wd4, ad4] = field(t + h, b4, a4);
      const Mat3 k4 = b4.R.matrix() * so3::hat(b4.omega);

      AugmentedState out;
      out.body.R = so3::project_so3(r0 + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
      out.body.omega = w0 + h / 6.0 * (wd1 + 2.0 * wd2 + 2.0 * wd3 + wd4);
      out.aux = x.aux + h / 6.0 * (ad1 + 2.0 * ad2 + 2.0 * ad3 + ad4);
      return out;
    }
  }
}

}  // namespace geoatt::dynamics

#endif  // GEOATT_DYNAMICS_HPP_
