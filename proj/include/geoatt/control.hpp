#ifndef GEOATT_CONTROL_HPP_
#define GEOATT_CONTROL_HPP_

#include <optional>
#include <span>
#include <string_view>

#include "geoatt/dynamics.hpp"
#include "geoatt/error_geometry.hpp"

namespace geoatt::control {

using dynamics::BodyState;
using dynamics::Mat3X;
using dynamics::VecX;
using geometry::ErrorModel;
using geometry::ErrorTerms;
using so3::Rotation;

enum class Mode { kSmooth, kAdaptive };

std::string_view to_string(Mode mode);
std::optional<Mode> mode_from_string(std::string_view name);

struct ControllerParams {
  double kR = 0.0;
  double kOmega = 0.0;
  double kDelta = 0.0;
  double c = 0.0;
  dynamics::InertiaMatrix J;
  Mode mode = Mode::kSmooth;
  /// Feedforward -M_g is added when set.
  std::optional<dynamics::GravityMoment> gravity;
};

/// Throws DomainInvalid unless every gain used by params.mode is positive.
void validate(const ControllerParams& params);

struct EstimatorState {
  VecX delta_bar;
};

/// -kR e_R - kOmega Omega + Omega x J Omega [- M_g]
Vec3 control_smooth(const BodyState& state, const Rotation& rd, const ErrorModel& model,
                    const ControllerParams& params);

/// control_smooth(...) - W delta_bar
Vec3 control_adaptive(const BodyState& state, const EstimatorState& est,
                      const Rotation& rd, const ErrorModel& model, const Mat3X& w,
                      const ControllerParams& params);

/// kDelta W^T (e_Omega + c e_R)
VecX estimator_rate(const BodyState& state, const EstimatorState& est,
                    const Rotation& rd, const ErrorModel& model, const Mat3X& w,
                    const ControllerParams& params);

/// Same laws from error terms already evaluated at state.R; delta_bar may
/// be empty in smooth mode.
Vec3 control_from_terms(const BodyState& state, const ErrorTerms& terms,
                        const ControllerParams& params, const Mat3X& w,
                        const VecX& delta_bar);
VecX estimator_rate_from_terms(const BodyState& state, const ErrorTerms& terms,
                               const ControllerParams& params, const Mat3X& w);

struct GainCheck {
  bool ok = false;
  double c_max = 0.0;
  double c_max_energy = 0.0;   // sqrt(2 lambda_m kR n1 / lambda_M^2)
  double c_max_rate = 0.0;     // 4 kR kOmega / (kOmega^2 + 4 kR lambda_M H)
};

/// ok iff 0 < c < c_max. Throws DomainInvalid for non-positive n1 or H.
GainCheck validate_c(const ControllerParams& params, double rate_bound_H, double n1);
GainCheck validate_c(const ControllerParams& params, const geometry::BoundLedger& ledger,
                     double n1);

struct DefinitenessReport {
  Mat3 W1 = Mat3::Zero();
  Mat3 W2 = Mat3::Zero();
  Eigen::Matrix2d M = Eigen::Matrix2d::Zero();
  bool W1_positive = false;
  bool W2_positive = false;
  bool M_positive = false;
  [[nodiscard]] bool all_positive() const { return W1_positive && W2_positive && M_positive; }
};

/// Builds the sandwich matrices W1, W2 of the adaptive Lyapunov function and
/// the decay matrix M; verdicts from leading principal minors.
DefinitenessReport check_matrices_W1_W2_M(const ControllerParams& params,
                                          double rate_bound_H, double n1, double n2);

/// Positive definiteness by Sylvester's criterion.
bool leading_minors_positive(const Eigen::MatrixXd& m);

/// 0.5 Omega . J Omega + kR Psi
double lyapunov_smooth(const BodyState& state, double psi, const ControllerParams& params);

/// lyapunov_smooth + c J Omega . e_R + |e_Delta|^2 / (2 kDelta)
double lyapunov_adaptive(const BodyState& state, const ErrorTerms& terms,
                         const VecX& e_delta, const ControllerParams& params);

}  // namespace geoatt::control

#endif  // GEOATT_CONTROL_HPP_
