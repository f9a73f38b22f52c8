#include "geoatt/dynamics.hpp"

#include <cmath>

#include <spdlog/spdlog.h>

#include "geoatt/errors.hpp"

namespace geoatt::dynamics {

InertiaMatrix::InertiaMatrix(const Mat3& j) : j_(j) {
  if (!j.allFinite()) {
    throw DomainInvalid("inertia has non-finite entries");
  }
  if ((j - j.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, j.norm())) {
    throw DomainInvalid("inertia must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat3> eig(j);
  lambda_min_ = eig.eigenvalues().minCoeff();
  lambda_max_ = eig.eigenvalues().maxCoeff();
  if (!(lambda_min_ > 0.0)) {
    throw DomainInvalid("inertia must be positive definite");
  }
  j_inv_ = j.inverse();
}

DisturbanceModel DisturbanceModel::none(int p) {
  DisturbanceModel m;
  m.kind_ = Kind::kNone;
  m.p_ = p;
  return m;
}

DisturbanceModel DisturbanceModel::constant(const Vec3& delta) {
  DisturbanceModel m;
  m.kind_ = Kind::kConstant;
  m.bias_ = delta;
  m.bound_delta_ = delta.norm();
  return m;
}

DisturbanceModel DisturbanceModel::time_varying(const Vec3& bias, double amplitude,
                                                double frequency) {
  DisturbanceModel m;
  m.kind_ = Kind::kTimeVarying;
  m.bias_ = bias;
  m.amplitude_ = amplitude;
  m.frequency_ = frequency;
  // |[s, c, (s + c)/2]| <= sqrt(1 + 1/2) over all t.
  m.bound_delta_ = bias.norm() + std::abs(amplitude) * std::sqrt(1.5);
  return m;
}

DisturbanceModel DisturbanceModel::custom(int p, DeltaFn delta, WFn w, double bound_w,
                                          double bound_delta) {
  if (p <= 0 || !delta || !w) {
    throw DomainInvalid("custom disturbance needs p > 0 and both functions");
  }
  DisturbanceModel m;
  m.kind_ = Kind::kCustom;
  m.p_ = p;
  m.delta_fn_ = std::move(delta);
  m.w_fn_ = std::move(w);
  m.bound_w_ = bound_w;
  m.bound_delta_ = bound_delta;
  return m;
}

VecX DisturbanceModel::delta(double t) const {
  switch (kind_) {
    case Kind::kNone:
      return VecX::Zero(p_);
    case Kind::kConstant:
      return bias_;
    case Kind::kTimeVarying: {
      const double s = std::sin(frequency_ * t);
      const double c = std::cos(frequency_ * t);
      return bias_ + amplitude_ * Vec3(s, c, 0.5 * (s + c));
    }
    case Kind::kCustom:
      return delta_fn_(t);
  }
  return VecX::Zero(p_);
}

Mat3X DisturbanceModel::W(const Rotation& r, const Vec3& omega) const {
  if (kind_ == Kind::kCustom) {
    return w_fn_(r, omega);
  }
  return Mat3X::Identity(3, p_);
}

Vec3 DisturbanceModel::torque(const Rotation& r, const Vec3& omega, double t) const {
  if (kind_ == Kind::kNone) {
    return Vec3::Zero();
  }
  if (kind_ == Kind::kCustom) {
    return W(r, omega) * delta(t);
  }
  return delta(t).head<3>();
}

void DisturbanceModel::set_bounds(double bound_w, double bound_delta) {
  bound_w_ = bound_w;
  bound_delta_ = bound_delta;
}

bool DisturbanceModel::check_bounds(const Rotation& r, const Vec3& omega, double t) const {
  const double w_norm = W(r, omega).operatorNorm();
  const double d_norm = delta(t).norm();
  const bool ok = w_norm <= bound_w_ * (1 + 1e-12) && d_norm <= bound_delta_ * (1 + 1e-12);
  if (!ok && !warned_) {
    warned_ = true;
    spdlog::warn("disturbance bound exceeded at t={:.6g}: |W|={:.6g} (B_W={:.6g}), "
                 "|Delta|={:.6g} (B_Delta={:.6g})",
                 t, w_norm, bound_w_, d_norm, bound_delta_);
  }
  return ok;
}

std::string_view to_string(DisturbanceModel::Kind kind) {
  switch (kind) {
    case DisturbanceModel::Kind::kNone:
      return "none";
    case DisturbanceModel::Kind::kConstant:
      return "constant";
    case DisturbanceModel::Kind::kTimeVarying:
      return "time_varying";
    case DisturbanceModel::Kind::kCustom:
      return "custom";
  }
  return "none";
}

Vec3 GravityMoment::moment(const Rotation& r) const {
  return r_cg.cross(mass * g * (r.matrix().transpose() * Vec3::UnitZ()));
}

Vec3 omega_dot(const BodyState& state, const Vec3& u, const InertiaMatrix& j,
               const DisturbanceModel& dist, double t,
               const std::optional<GravityMoment>& gravity) {
  const Vec3& w = state.omega;
  Vec3 moment = -w.cross(j.matrix() * w) + u + dist.torque(state.R, w, t);
  if (gravity) {
    moment += gravity->moment(state.R);
  }
  return j.inverse() * moment;
}

std::string_view to_string(Integrator method) {
  switch (method) {
    case Integrator::kRk4Project:
      return "rk4_project";
    case Integrator::kLieEuler:
      return "lie_euler";
    case Integrator::kLieRk4:
      return "lie_rk4";
  }
  return "lie_rk4";
}

std::optional<Integrator> integrator_from_string(std::string_view name) {
  if (name == "rk4_project") return Integrator::kRk4Project;
  if (name == "lie_euler") return Integrator::kLieEuler;
  if (name == "lie_rk4") return Integrator::kLieRk4;
  return std::nullopt;
}

BodyState step(const BodyState& state, const Vec3& u, const InertiaMatrix& j,
               const DisturbanceModel& dist, double t, double dt, Integrator method,
               const std::optional<GravityMoment>& gravity) {
  if (!(dt > 0.0)) {
    throw DomainInvalid("step: dt must be positive");
  }
  const auto field = [&](double tau, const BodyState& b, const VecX&) {
    return std::pair<Vec3, VecX>{omega_dot(b, u, j, dist, tau, gravity), VecX()};
  };
  return step_augmented(AugmentedState{state, VecX()}, t, dt, method, field).body;
}

std::pair<DisturbanceModel, DisturbanceModel> make_reference_disturbances() {
  const Vec3 bias(0.2, 0.2, 0.2);
  return {DisturbanceModel::constant(bias),
          DisturbanceModel::time_varying(bias, 0.02, 9.0)};
}

double kinetic_energy(const BodyState& state, const InertiaMatrix& j) {
  return 0.5 * state.omega.dot(j.matrix() * state.omega);
}

}  // namespace geoatt::dynamics
