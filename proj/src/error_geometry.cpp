#include "geoatt/error_geometry.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <random>
#include <string>

#include "geoatt/errors.hpp"

namespace geoatt::geometry {

using so3::hat;

AttractiveWeights::AttractiveWeights(const Vec3& g, double tie_tol) : g_(g) {
  if (!g.allFinite() || (g.array() <= 0.0).any()) {
    throw DomainInvalid("G entries must be positive");
  }
  for (int i = 0; i < 3; ++i) {
    for (int j = i + 1; j < 3; ++j) {
      if (std::abs(g[i] - g[j]) <= tie_tol) {
        throw DomainInvalid("G entries must be pairwise distinct");
      }
    }
  }
}

ConstraintCone::ConstraintCone(const UnitVec3& v, double theta_rad)
    : v_(v), theta_(theta_rad), cos_theta_(std::cos(theta_rad)) {
  if (!(theta_rad > 0.0) || theta_rad > M_PI / 2 + 1e-15) {
    throw DomainInvalid("cone half-angle must lie in (0, 90] degrees");
  }
}

BarrierShape::BarrierShape(double alpha) : alpha_(alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw DomainInvalid("barrier shape alpha must be positive");
  }
}

double cone_cosine(const Rotation& r, const Vec3& sensor, const ConstraintCone& cone) {
  return (r.matrix() * sensor).dot(cone.v());
}

double cone_angle_deg(const Rotation& r, const Vec3& sensor, const ConstraintCone& cone) {
  const double c = std::clamp(cone_cosine(r, sensor, cone), -1.0, 1.0);
  return std::acos(c) * 180.0 / M_PI;
}

namespace {

std::atomic<bool> g_flip_eRB{false};

bool violates(double cone_cos, const ConstraintCone& cone) {
  return !(cone_cos < cone.cos_theta() - kFeasibilityMargin);
}

[[noreturn]] void throw_violation(std::size_t index, double time) {
  throw ConstraintViolated(index, time,
                           "constraint " + std::to_string(index + 1) + " violated");
}

double barrier_from_cosine(double cone_cos, const ConstraintCone& cone,
                           const BarrierShape& shape) {
  const double c = cone.cos_theta();
  return 1.0 - std::log((c - cone_cos) / (1.0 + c)) / shape.alpha();
}

Vec3 eRB_from(const Vec3& body_v, const Vec3& sensor, double cone_cos,
              const ConstraintCone& cone, const BarrierShape& shape) {
  const Vec3 e = body_v.cross(sensor) / (shape.alpha() * (cone_cos - cone.cos_theta()));
  return g_flip_eRB.load(std::memory_order_relaxed) ? Vec3(-e) : e;
}

}  // namespace

bool is_feasible(const Rotation& r, const ErrorModel& model) {
  return std::none_of(model.cones.begin(), model.cones.end(), [&](const auto& cone) {
    return violates(cone_cosine(r, model.sensor, cone), cone);
  });
}

void require_feasible(const Rotation& r, const ErrorModel& model, double time) {
  for (std::size_t i = 0; i < model.cones.size(); ++i) {
    if (violates(cone_cosine(r, model.sensor, model.cones[i]), model.cones[i])) {
      throw_violation(i, time);
    }
  }
}

double attractive_A(const Rotation& r, const Rotation& rd, const AttractiveWeights& g) {
  const Mat3 rel = rd.matrix().transpose() * r.matrix();
  // 0.5 tr[G (I - Rd^T R)] with G diagonal.
  return 0.5 * (g.diagonal().array() * (1.0 - rel.diagonal().array())).sum();
}

double barrier_B(const Rotation& r, const Vec3& sensor, const ConstraintCone& cone,
                 const BarrierShape& shape) {
  const double x = cone_cosine(r, sensor, cone);
  if (violates(x, cone)) {
    throw_violation(0, std::numeric_limits<double>::quiet_NaN());
  }
  return barrier_from_cosine(x, cone, shape);
}

Vec3 err_vec_eRA(const Rotation& r, const Rotation& rd, const AttractiveWeights& g) {
  const Mat3 x = g.matrix() * rd.matrix().transpose() * r.matrix();
  return 0.5 * so3::vee(x - x.transpose());
}

Vec3 err_vec_eRB(const Rotation& r, const Vec3& sensor, const ConstraintCone& cone,
                 const BarrierShape& shape) {
  const Vec3 body_v = r.matrix().transpose() * cone.v();
  const double x = body_v.dot(sensor);
  if (violates(x, cone)) {
    throw_violation(0, std::numeric_limits<double>::quiet_NaN());
  }
  return eRB_from(body_v, sensor, x, cone, shape);
}

ErrorTerms evaluate(const Rotation& r, const Rotation& rd, const ErrorModel& model) {
  ErrorTerms t;
  const std::size_t k = model.cones.size();
  t.B.resize(k);
  t.cone_cos.resize(k);
  t.e_RB.resize(k);
  t.A = attractive_A(r, rd, model.weights);
  t.e_RA = err_vec_eRA(r, rd, model.weights);
  double barrier_sum = 1.0;
  Vec3 eRB_sum = Vec3::Zero();
  const Mat3 rt = r.matrix().transpose();
  for (std::size_t i = 0; i < k; ++i) {
    const auto& cone = model.cones[i];
    const Vec3 body_v = rt * cone.v();
    const double x = body_v.dot(model.sensor.vec());
    if (violates(x, cone)) {
      throw_violation(i, std::numeric_limits<double>::quiet_NaN());
    }
    t.cone_cos[i] = x;
    t.B[i] = barrier_from_cosine(x, cone, model.shape);
    t.e_RB[i] = eRB_from(body_v, model.sensor, x, cone, model.shape);
    barrier_sum += t.B[i] - 1.0;
    eRB_sum += t.e_RB[i];
  }
  t.psi = t.A * barrier_sum;
  t.e_R = t.e_RA * barrier_sum + t.A * eRB_sum;
  return t;
}

double psi(const Rotation& r, const Rotation& rd, const ErrorModel& model) {
  return evaluate(r, rd, model).psi;
}

Vec3 err_vec_eR(const Rotation& r, const Rotation& rd, const ErrorModel& model) {
  return evaluate(r, rd, model).e_R;
}

Mat3 matrix_E(const Rotation& r, const Rotation& rd, const AttractiveWeights& g) {
  const Mat3 m = r.matrix().transpose() * rd.matrix() * g.matrix();
  return 0.5 * (m.trace() * Mat3::Identity() - m);
}

Mat3 matrix_F(const Rotation& r, const Vec3& sensor, const ConstraintCone& cone,
              const BarrierShape& shape) {
  const Mat3& rm = r.matrix();
  const Vec3 body_v = rm.transpose() * cone.v();
  const double x = body_v.dot(sensor);
  if (violates(x, cone)) {
    throw_violation(0, std::numeric_limits<double>::quiet_NaN());
  }
  const double d = x - cone.cos_theta();
  const Mat3 curvature = rm.transpose() * hat(cone.v()) * rm * sensor *
                         cone.v().transpose() * rm * hat(sensor);
  const Mat3 bracket =
      x * Mat3::Identity() - body_v * sensor.transpose() + curvature / d;
  return bracket / (shape.alpha() * d);
}

BoundLedger bound_ledger(const AttractiveWeights& g, const ConstraintCone& cone,
                         const BarrierShape& shape, double psi_cap, double beta_cap,
                         BoundConstants constants) {
  const Vec3& w = g.diagonal();
  const std::array<double, 3> sums{w[0] + w[1], w[1] + w[2], w[2] + w[0]};
  const std::array<double, 3> diffs_sq{(w[0] - w[1]) * (w[0] - w[1]),
                                       (w[1] - w[2]) * (w[1] - w[2]),
                                       (w[2] - w[0]) * (w[2] - w[0])};
  const std::array<double, 3> sums_sq{sums[0] * sums[0], sums[1] * sums[1],
                                      sums[2] * sums[2]};
  auto min3 = [](const std::array<double, 3>& a) { return std::min({a[0], a[1], a[2]}); };
  auto max3 = [](const std::array<double, 3>& a) { return std::max({a[0], a[1], a[2]}); };

  BoundLedger l;
  l.h1 = min3(sums);
  l.h5 = min3(sums_sq);
  if (constants == BoundConstants::kMinBased) {
    l.h2 = min3(diffs_sq);
    l.h3 = min3(sums_sq);
    l.h4 = min3(sums);
  } else {
    l.h2 = max3(diffs_sq);
    l.h3 = max3(sums_sq);
    l.h4 = max3(sums);
  }

  const double c = cone.cos_theta();
  if (!(psi_cap > 0.0 && psi_cap < l.h1)) {
    throw DomainInvalid("psi cap must satisfy 0 < psi < h1 = " + std::to_string(l.h1));
  }
  if (!(beta_cap > 0.0 && beta_cap < c)) {
    throw DomainInvalid("beta cap must satisfy 0 < beta < cos(theta) = " +
                        std::to_string(c));
  }
  const double alpha = shape.alpha();
  l.psi_cap = psi_cap;
  l.beta_cap = beta_cap;
  l.b1 = l.h1 / (l.h2 + l.h3);
  l.b2 = l.h1 * l.h4 / (l.h5 * (l.h1 - psi_cap));
  // Psi = A B < psi with B > 1 gives A < psi; r^T R^T v < beta caps B directly.
  l.cA = psi_cap;
  l.cB = 1.0 - std::log((c - beta_cap) / (1.0 + c)) / alpha;
  l.normE_bound = g.trace() / std::sqrt(2.0);
  const double bc = beta_cap - c;
  const double b2sq = beta_cap * beta_cap;
  l.normF_bound = ((b2sq + 1.0) * bc * bc + 1.0 + b2sq * (b2sq - 2.0)) /
                  (alpha * alpha * bc * bc * bc * bc);
  l.normF_sup = (2.0 + 1.0 / (c - beta_cap)) / (alpha * (c - beta_cap));
  l.eRA_bound = std::sqrt(psi_cap / l.b1);
  l.eRB_bound = std::sin(cone.theta()) / (alpha * (c - beta_cap));
  l.eRB_sup = std::sqrt(1.0 - b2sq) / (alpha * (c - beta_cap));
  l.H = l.cB * l.normE_bound + 2.0 * l.eRA_bound * l.eRB_bound + l.cA * l.normF_bound;
  return l;
}

double combined_rate_bound(std::span<const BoundLedger> ledgers) {
  if (ledgers.empty()) {
    throw DomainInvalid("combined_rate_bound needs at least one ledger");
  }
  double barrier_sum = 1.0;
  double eRB_sum = 0.0;
  double F_sum = 0.0;
  for (const auto& l : ledgers) {
    barrier_sum += l.cB - 1.0;
    eRB_sum += l.eRB_bound;
    F_sum += l.normF_bound;
  }
  const auto& first = ledgers.front();
  return barrier_sum * first.normE_bound + 2.0 * first.eRA_bound * eRB_sum +
         first.cA * F_sum;
}

double default_psi_cap(const AttractiveWeights& g) {
  const Vec3& w = g.diagonal();
  return 0.9 * std::min({w[0] + w[1], w[1] + w[2], w[2] + w[0]});
}

std::vector<double> default_beta_caps(const ErrorModel& model) {
  std::vector<double> caps;
  caps.reserve(model.cones.size());
  for (const auto& cone : model.cones) {
    caps.push_back(0.9 * cone.cos_theta());
  }
  return caps;
}

Mat3 hessian_psi_at_goal(const Rotation& rd, const ErrorModel& model) {
  require_feasible(rd, model);
  double barrier_sum = 1.0;
  for (const auto& cone : model.cones) {
    barrier_sum += barrier_B(rd, model.sensor, cone, model.shape) - 1.0;
  }
  const auto& g = model.weights;
  return 0.5 * barrier_sum * (g.trace() * Mat3::Identity() - g.matrix());
}

Rotation sample_near_goal(const Rotation& rd, const AttractiveWeights& g,
                          double psi_cap, double u_angle, const Vec3& gaussian) {
  // Psi >= A >= 0.5 h1 (1 - cos(angle)), so D lies inside this ball.
  const Vec3& w = g.diagonal();
  const double h1 = std::min({w[0] + w[1], w[1] + w[2], w[2] + w[0]});
  const double max_angle = std::acos(std::max(-1.0, 1.0 - 2.0 * psi_cap / h1));
  const double angle = max_angle * std::cbrt(u_angle);
  const double n = gaussian.norm();
  const Vec3 axis = n > 1e-12 ? Vec3(gaussian / n) : Vec3::UnitX();
  return rd * so3::exp_so3(angle * axis);
}

bool in_domain(const Rotation& r, const Rotation& rd, const ErrorModel& model,
               double psi_cap, std::span<const double> beta_caps) {
  for (std::size_t i = 0; i < model.cones.size(); ++i) {
    if (!(cone_cosine(r, model.sensor, model.cones[i]) < beta_caps[i])) {
      return false;
    }
  }
  return psi(r, rd, model) < psi_cap;
}

QuadraticBounds estimate_quadratic_bounds(const Rotation& rd, const ErrorModel& model,
                                          double psi_cap,
                                          std::span<const double> beta_caps,
                                          std::size_t samples, std::uint64_t seed) {
  if (samples == 0) {
    throw DomainInvalid("estimate_quadratic_bounds: samples must be positive");
  }
  if (beta_caps.size() != model.cones.size()) {
    throw DomainInvalid("estimate_quadratic_bounds: one beta cap per cone required");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  QuadraticBounds out;
  out.n1 = std::numeric_limits<double>::infinity();
  out.n2 = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    const Vec3 gaussian{normal(rng), normal(rng), normal(rng)};
    const Rotation r = sample_near_goal(rd, model.weights, psi_cap, uniform(rng), gaussian);
    if (!in_domain(r, rd, model, psi_cap, beta_caps)) {
      continue;
    }
    const ErrorTerms t = evaluate(r, rd, model);
    const double e2 = t.e_R.squaredNorm();
    if (t.e_R.norm() < 1e-9) {
      continue;
    }
    const double ratio = t.psi / e2;
    out.n1 = std::min(out.n1, ratio);
    out.n2 = std::max(out.n2, ratio);
    ++out.accepted;
  }
  if (out.accepted == 0) {
    throw DomainInvalid("estimate_quadratic_bounds: no samples landed in the domain");
  }
  return out;
}

namespace testing {

void set_flip_eRB_sign(bool on) { g_flip_eRB.store(on); }
bool flip_eRB_sign() { return g_flip_eRB.load(); }

}  // namespace testing

}  // namespace geoatt::geometry
