#include "geoatt/control.hpp"

#include <algorithm>
#include <cmath>

#include "geoatt/errors.hpp"

namespace geoatt::control {

std::string_view to_string(Mode mode) {
  return mode == Mode::kAdaptive ? "adaptive" : "smooth";
}

std::optional<Mode> mode_from_string(std::string_view name) {
  if (name == "smooth") return Mode::kSmooth;
  if (name == "adaptive") return Mode::kAdaptive;
  return std::nullopt;
}

void validate(const ControllerParams& params) {
  auto positive = [](double x) { return std::isfinite(x) && x > 0.0; };
  if (!positive(params.kR)) throw DomainInvalid("kR must be positive");
  if (!positive(params.kOmega)) throw DomainInvalid("kOmega must be positive");
  if (params.mode == Mode::kAdaptive) {
    if (!positive(params.kDelta)) throw DomainInvalid("kDelta must be positive");
    if (!positive(params.c)) throw DomainInvalid("c must be positive");
  }
}

namespace {

void require_goal_feasible(const Rotation& rd, const ErrorModel& model) {
  if (!geometry::is_feasible(rd, model)) {
    throw InfeasibleGoal("desired attitude violates a constraint");
  }
}

}  // namespace

Vec3 control_from_terms(const BodyState& state, const ErrorTerms& terms,
                        const ControllerParams& params, const Mat3X& w,
                        const VecX& delta_bar) {
  const Vec3& omega = state.omega;
  Vec3 u = -params.kR * terms.e_R - params.kOmega * omega +
           omega.cross(params.J.matrix() * omega);
  if (params.gravity) {
    u -= params.gravity->moment(state.R);
  }
  if (params.mode == Mode::kAdaptive && delta_bar.size() > 0) {
    u -= w * delta_bar;
  }
  return u;
}

VecX estimator_rate_from_terms(const BodyState& state, const ErrorTerms& terms,
                               const ControllerParams& params, const Mat3X& w) {
  return params.kDelta * (w.transpose() * (state.omega + params.c * terms.e_R));
}

Vec3 control_smooth(const BodyState& state, const Rotation& rd, const ErrorModel& model,
                    const ControllerParams& params) {
  require_goal_feasible(rd, model);
  const ErrorTerms terms = geometry::evaluate(state.R, rd, model);
  ControllerParams smooth = params;
  smooth.mode = Mode::kSmooth;
  return control_from_terms(state, terms, smooth, Mat3X(3, 0), VecX());
}

Vec3 control_adaptive(const BodyState& state, const EstimatorState& est,
                      const Rotation& rd, const ErrorModel& model, const Mat3X& w,
                      const ControllerParams& params) {
  require_goal_feasible(rd, model);
  if (w.cols() != est.delta_bar.size()) {
    throw DomainInvalid("W columns must match the estimate dimension");
  }
  const ErrorTerms terms = geometry::evaluate(state.R, rd, model);
  ControllerParams adaptive = params;
  adaptive.mode = Mode::kAdaptive;
  return control_from_terms(state, terms, adaptive, w, est.delta_bar);
}

VecX estimator_rate(const BodyState& state, const EstimatorState& est,
                    const Rotation& rd, const ErrorModel& model, const Mat3X& w,
                    const ControllerParams& params) {
  if (w.cols() != est.delta_bar.size()) {
    throw DomainInvalid("W columns must match the estimate dimension");
  }
  const ErrorTerms terms = geometry::evaluate(state.R, rd, model);
  return estimator_rate_from_terms(state, terms, params, w);
}

GainCheck validate_c(const ControllerParams& params, double rate_bound_H, double n1) {
  if (!(n1 > 0.0) || !std::isfinite(n1)) {
    throw DomainInvalid("validate_c: n1 must be positive");
  }
  if (!(rate_bound_H > 0.0) || !std::isfinite(rate_bound_H)) {
    throw DomainInvalid("validate_c: rate bound H must be positive");
  }
  const double lm = params.J.lambda_min();
  const double lM = params.J.lambda_max();
  GainCheck g;
  g.c_max_energy = std::sqrt(2.0 * lm * params.kR * n1 / (lM * lM));
  g.c_max_rate = 4.0 * params.kR * params.kOmega /
                 (params.kOmega * params.kOmega + 4.0 * params.kR * lM * rate_bound_H);
  g.c_max = std::min(g.c_max_energy, g.c_max_rate);
  g.ok = params.c > 0.0 && params.c < g.c_max;
  return g;
}

GainCheck validate_c(const ControllerParams& params, const geometry::BoundLedger& ledger,
                     double n1) {
  return validate_c(params, ledger.H, n1);
}

bool leading_minors_positive(const Eigen::MatrixXd& m) {
  for (Eigen::Index k = 1; k <= m.rows(); ++k) {
    if (!(m.topLeftCorner(k, k).determinant() > 0.0)) {
      return false;
    }
  }
  return true;
}

DefinitenessReport check_matrices_W1_W2_M(const ControllerParams& params,
                                          double rate_bound_H, double n1, double n2) {
  const double lm = params.J.lambda_min();
  const double lM = params.J.lambda_max();
  const double c = params.c;
  const double inv2kd = 1.0 / (2.0 * params.kDelta);
  DefinitenessReport rep;
  rep.W1 << params.kR * n1, -0.5 * c * lM, 0.0,
            -0.5 * c * lM, 0.5 * lm, 0.0,
            0.0, 0.0, inv2kd;
  rep.W2 << params.kR * n2, 0.5 * c * lM, 0.0,
            0.5 * c * lM, 0.5 * lM, 0.0,
            0.0, 0.0, inv2kd;
  rep.M << params.kR * c, 0.5 * params.kOmega * c,
           0.5 * params.kOmega * c, params.kOmega - c * lM * rate_bound_H;
  rep.W1_positive = leading_minors_positive(rep.W1);
  rep.W2_positive = leading_minors_positive(rep.W2);
  rep.M_positive = leading_minors_positive(rep.M);
  return rep;
}

double lyapunov_smooth(const BodyState& state, double psi, const ControllerParams& params) {
  return 0.5 * state.omega.dot(params.J.matrix() * state.omega) + params.kR * psi;
}

double lyapunov_adaptive(const BodyState& state, const ErrorTerms& terms,
                         const VecX& e_delta, const ControllerParams& params) {
  return lyapunov_smooth(state, terms.psi, params) +
         params.c * (params.J.matrix() * state.omega).dot(terms.e_R) +
         e_delta.squaredNorm() / (2.0 * params.kDelta);
}

}  // namespace geoatt::control
