#include "geoatt/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Geometry>
#include <fmt/format.h>

#include "geoatt/dynamics.hpp"
#include "geoatt/errors.hpp"
#include "geoatt/sim.hpp"

namespace geoatt::verify {

namespace {

CheckResult finish(CheckResult r, bool passed) {
  r.passed = passed;
  return r;
}

Vec3 gaussian3(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  const double a = n(rng);
  const double b = n(rng);
  const double c = n(rng);
  return Vec3(a, b, c);
}

}  // namespace

bool all_passed(const std::vector<CheckResult>& results) {
  return std::all_of(results.begin(), results.end(),
                     [](const CheckResult& r) { return r.passed; });
}

Rotation random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Vector4d q;
  do {
    for (int i = 0; i < 4; ++i) q(i) = n(rng);
  } while (q.norm() < 1e-6);
  q.normalize();
  const Eigen::Quaterniond quat(q(0), q(1), q(2), q(3));
  return so3::project_so3(quat.toRotationMatrix());
}

Vec3 random_unit(std::mt19937_64& rng) {
  Vec3 g;
  do {
    g = gaussian3(rng);
  } while (g.norm() < 1e-6);
  return g.normalized();
}

Rotation random_feasible(std::mt19937_64& rng, const geometry::ErrorModel& model) {
  for (int attempt = 0; attempt < 1000000; ++attempt) {
    const Rotation r = random_rotation(rng);
    if (geometry::is_feasible(r, model)) return r;
  }
  throw DomainInvalid("no feasible attitude found by sampling");
}

CheckResult identity_suite(std::uint64_t seed, std::size_t samples) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, std::numbers::pi - 1e-3);
  CheckResult r{.name = "so3 identities", .threshold = 1e-12, .samples = samples};
  for (std::size_t k = 0; k < samples; ++k) {
    const Vec3 x = gaussian3(rng);
    const Vec3 y = gaussian3(rng);
    const Vec3 z = gaussian3(rng);
    Mat3 a;
    for (int i = 0; i < 3; ++i) a.col(i) = gaussian3(rng);
    const Rotation rot = random_rotation(rng);
    const so3::IdentityReport rep = so3::check_identities(x, y, z, a, rot);
    r.value = std::max(r.value, rep.max_residual);
    if (!rep.ok()) {
      ++r.failures;
      if (r.detail.empty()) r.detail = rep.failures.front().name;
    }
    // exp/log round trip away from the cut locus.
    const Vec3 w = random_unit(rng) * angle(rng);
    const double err = (so3::log_so3(so3::exp_so3(w)) - w).norm() / std::max(1.0, w.norm());
    if (err > 1e-9) {
      ++r.failures;
      if (r.detail.empty()) r.detail = "log(exp(w)) != w";
    }
  }
  return finish(r, r.failures == 0);
}

CheckResult gradient_psi(const geometry::ErrorModel& model, const Rotation& rd,
                         std::uint64_t seed, const GradientOptions& opt) {
  std::mt19937_64 rng(seed);
  CheckResult r{.name = "gradient: Psi vs eta . e_R", .threshold = opt.tol,
                .samples = opt.samples};
  for (std::size_t k = 0; k < opt.samples; ++k) {
    Rotation rot;
    Vec3 eta;
    // Both probe points must stay feasible.
    do {
      rot = random_feasible(rng, model);
      eta = random_unit(rng);
    } while (!geometry::is_feasible(rot * so3::exp_so3(opt.eps * eta), model) ||
             !geometry::is_feasible(rot * so3::exp_so3(-opt.eps * eta), model));
    const double fd = (geometry::psi(rot * so3::exp_so3(opt.eps * eta), rd, model) -
                       geometry::psi(rot * so3::exp_so3(-opt.eps * eta), rd, model)) /
                      (2.0 * opt.eps);
    const double an = eta.dot(geometry::err_vec_eR(rot, rd, model));
    const double rel = std::abs(fd - an) / std::max(std::abs(an), 1e-8);
    r.value = std::max(r.value, rel);
    if (!(rel < opt.tol)) ++r.failures;
  }
  return finish(r, r.failures == 0);
}

CheckResult rate_eRA(const geometry::ErrorModel& model, const Rotation& rd,
                     std::uint64_t seed, const GradientOptions& opt) {
  std::mt19937_64 rng(seed);
  CheckResult r{.name = "rate: d/dt e_RA vs E Omega", .threshold = opt.tol,
                .samples = opt.samples};
  const auto& g = model.weights;
  for (std::size_t k = 0; k < opt.samples; ++k) {
    const Rotation rot = random_rotation(rng);
    const Vec3 w = gaussian3(rng);
    const Vec3 fd = (geometry::err_vec_eRA(rot * so3::exp_so3(opt.eps * w), rd, g) -
                     geometry::err_vec_eRA(rot * so3::exp_so3(-opt.eps * w), rd, g)) /
                    (2.0 * opt.eps);
    const Vec3 an = geometry::matrix_E(rot, rd, g) * w;
    const double rel = (fd - an).norm() / std::max(an.norm(), 1e-8);
    r.value = std::max(r.value, rel);
    if (!(rel < opt.tol)) ++r.failures;
  }
  return finish(r, r.failures == 0);
}

CheckResult rate_eRB(const geometry::ErrorModel& model, std::uint64_t seed,
                     const GradientOptions& opt) {
  std::mt19937_64 rng(seed);
  CheckResult r{.name = "rate: d/dt e_RB vs F Omega", .threshold = opt.tol,
                .samples = opt.samples * model.cones.size()};
  for (std::size_t k = 0; k < opt.samples; ++k) {
    Rotation rot;
    Vec3 w;
    do {
      rot = random_feasible(rng, model);
      w = gaussian3(rng);
    } while (!geometry::is_feasible(rot * so3::exp_so3(opt.eps * w), model) ||
             !geometry::is_feasible(rot * so3::exp_so3(-opt.eps * w), model));
    for (const auto& cone : model.cones) {
      const Vec3 fd =
          (geometry::err_vec_eRB(rot * so3::exp_so3(opt.eps * w), model.sensor, cone,
                                 model.shape) -
           geometry::err_vec_eRB(rot * so3::exp_so3(-opt.eps * w), model.sensor, cone,
                                 model.shape)) /
          (2.0 * opt.eps);
      const Vec3 an = geometry::matrix_F(rot, model.sensor, cone, model.shape) * w;
      const double rel = (fd - an).norm() / std::max(an.norm(), 1e-8);
      r.value = std::max(r.value, rel);
      if (!(rel < opt.tol)) ++r.failures;
    }
  }
  return finish(r, r.failures == 0);
}

CheckResult bound_eRA(const geometry::ErrorModel& model, const Rotation& rd,
                      std::uint64_t seed, const BoundOptions& opt) {
  std::mt19937_64 rng(seed);
  const auto& g = model.weights;
  const geometry::BoundLedger l = geometry::bound_ledger(
      g, model.cones.front(), model.shape, geometry::default_psi_cap(g),
      0.9 * model.cones.front().cos_theta(), opt.constants);
  CheckResult r{.name = "bound: |e_RA|^2 <= A/b1", .threshold = 0.0, .samples = opt.samples};
  r.value = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < opt.samples; ++k) {
    const Rotation rot = random_rotation(rng);
    const double a = geometry::attractive_A(rot, rd, g);
    const double lhs = geometry::err_vec_eRA(rot, rd, g).squaredNorm();
    const double excess = lhs - (a / l.b1 + 1e-12);
    r.value = std::max(r.value, excess);
    if (excess > 0.0) ++r.failures;
  }
  r.detail = fmt::format("b1={:.6g}; value is the worst excess over A/b1", l.b1);
  return finish(r, r.failures == 0);
}

CheckResult bound_E(const geometry::ErrorModel& model, const Rotation& rd,
                    std::uint64_t seed, const BoundOptions& opt) {
  std::mt19937_64 rng(seed);
  const auto& g = model.weights;
  const double bound = g.trace() / std::sqrt(2.0);
  CheckResult r{.name = "bound: |E| <= tr[G]/sqrt(2)", .threshold = bound,
                .samples = opt.samples};
  for (std::size_t k = 0; k < opt.samples; ++k) {
    const Rotation rot = random_rotation(rng);
    const Mat3 e = geometry::matrix_E(rot, rd, g);
    const double n = Eigen::JacobiSVD<Mat3>(e).singularValues()(0);
    r.value = std::max(r.value, n);
    if (n > bound * (1.0 + 1e-12)) ++r.failures;
  }
  return finish(r, r.failures == 0);
}

namespace {

template <class Metric>
CheckResult cone_bound(const geometry::ErrorModel& model, std::uint64_t seed,
                       const BoundOptions& opt, std::string name, Metric metric) {
  std::mt19937_64 rng(seed);
  const auto& g = model.weights;
  const double psi_cap = geometry::default_psi_cap(g);
  const std::vector<double> betas = geometry::default_beta_caps(model);
  std::vector<geometry::BoundLedger> ledgers;
  for (std::size_t i = 0; i < model.cones.size(); ++i) {
    ledgers.push_back(geometry::bound_ledger(g, model.cones[i], model.shape, psi_cap, betas[i],
                                             opt.constants));
  }
  CheckResult r{.name = std::move(name), .threshold = 1.0};
  double worst_ratio = 0.0;
  for (std::size_t k = 0; k < opt.samples; ++k) {
    const Rotation rot = random_rotation(rng);
    for (std::size_t i = 0; i < model.cones.size(); ++i) {
      const auto& cone = model.cones[i];
      if (!(geometry::cone_cosine(rot, model.sensor, cone) <= betas[i])) continue;
      const auto [value, bound] = metric(rot, cone, ledgers[i]);
      ++r.samples;
      worst_ratio = std::max(worst_ratio, value / bound);
      if (value > bound * (1.0 + 1e-12)) ++r.failures;
    }
  }
  r.value = worst_ratio;
  r.detail = "value is the worst ratio to the bound";
  return finish(r, r.failures == 0 && r.samples > 0);
}

}  // namespace

CheckResult bound_eRB(const geometry::ErrorModel& model, std::uint64_t seed,
                      const BoundOptions& opt) {
  const std::string name = opt.sound_bounds
                               ? "bound: |e_RB| <= sup over r^T R^T v <= beta"
                               : "bound: |e_RB| <= sin(theta)/(alpha(cos(theta)-beta))";
  return cone_bound(model, seed, opt, name,
                    [&](const Rotation& rot, const geometry::ConstraintCone& cone,
                        const geometry::BoundLedger& l) {
                      const double v =
                          geometry::err_vec_eRB(rot, model.sensor, cone, model.shape).norm();
                      return std::pair<double, double>{v, opt.sound_bounds ? l.eRB_sup
                                                                          : l.eRB_bound};
                    });
}

CheckResult bound_F(const geometry::ErrorModel& model, std::uint64_t seed,
                    const BoundOptions& opt) {
  const std::string name = opt.sound_bounds ? "bound: |F| <= (2 + 1/d)/(alpha d), d = cos(theta)-beta"
                                            : "bound: |F| <= printed F bound";
  return cone_bound(model, seed, opt, name,
                    [&](const Rotation& rot, const geometry::ConstraintCone& cone,
                        const geometry::BoundLedger& l) {
                      const Mat3 f = geometry::matrix_F(rot, model.sensor, cone, model.shape);
                      const double v = Eigen::JacobiSVD<Mat3>(f).singularValues()(0);
                      return std::pair<double, double>{v, opt.sound_bounds ? l.normF_sup
                                                                          : l.normF_bound};
                    });
}

CheckResult hessian_check(const geometry::ErrorModel& model, const Rotation& rd,
                          std::uint64_t seed, std::size_t samples, double eps) {
  std::mt19937_64 rng(seed);
  const Mat3 h = geometry::hessian_psi_at_goal(rd, model);
  const double eig_min = Eigen::SelfAdjointEigenSolver<Mat3>(h).eigenvalues().minCoeff();
  CheckResult r{.name = "hessian at goal", .threshold = 0.10, .samples = samples};
  const double psi0 = geometry::psi(rd, rd, model);
  for (std::size_t k = 0; k < samples; ++k) {
    const Vec3 eta = random_unit(rng);
    const double second = (geometry::psi(rd * so3::exp_so3(eps * eta), rd, model) - 2.0 * psi0 +
                           geometry::psi(rd * so3::exp_so3(-eps * eta), rd, model)) /
                          (eps * eps);
    const double quad = eta.dot(h * eta);
    const double rel = std::abs(second - quad) / quad;
    r.value = std::max(r.value, rel);
    if (!(rel <= r.threshold)) ++r.failures;
  }
  r.detail = fmt::format("min eigenvalue {:.6g}", eig_min);
  return finish(r, eig_min > 0.0 && r.failures == 0);
}

namespace {

// Endpoint attitude error of torque-free spin about the third principal axis.
double spin_error(dynamics::Integrator method, double duration, int steps) {
  const dynamics::InertiaMatrix j(Vec3(1.0, 2.0, 3.0).asDiagonal().toDenseMatrix());
  const dynamics::DisturbanceModel none = dynamics::DisturbanceModel::none();
  const Vec3 w(0.0, 0.0, 5.0);
  dynamics::BodyState s{Rotation::identity(), w};
  const double h = duration / steps;
  for (int k = 0; k < steps; ++k) {
    s = dynamics::step(s, Vec3::Zero(), j, none, k * h, h, method);
  }
  const Rotation exact = so3::exp_so3(duration * w);
  return so3::log_so3(exact.transpose() * s.R).norm();
}

}  // namespace

CheckResult integrator_order(double duration) {
  CheckResult r{.name = "integrator order (rk4_project, steady spin)", .threshold = 0.3};
  std::vector<double> errs;
  std::string detail;
  for (int steps : {20, 40, 80, 160}) {
    errs.push_back(spin_error(dynamics::Integrator::kRk4Project, duration, steps));
    detail += fmt::format("{}n={} err={:.3e}", detail.empty() ? "" : "; ", steps, errs.back());
  }
  r.samples = errs.size();
  double worst = 0.0;
  double last = 0.0;
  for (std::size_t i = 0; i + 1 < errs.size(); ++i) {
    last = std::log2(errs[i] / errs[i + 1]);
    worst = std::max(worst, std::abs(last - 4.0));
  }
  r.value = last;
  r.detail = detail;
  return finish(r, worst <= r.threshold);
}

CheckResult integrator_drift(std::size_t steps, double dt) {
  Mat3 jm;
  jm << 5.5, 0.06, -0.03, 0.06, 5.5, 0.01, -0.03, 0.01, 0.1;
  const dynamics::InertiaMatrix j(1e-3 * jm);
  const dynamics::DisturbanceModel none = dynamics::DisturbanceModel::none();
  dynamics::BodyState s{Rotation::identity(), Vec3(1.0, -2.0, 0.5)};
  for (std::size_t k = 0; k < steps; ++k) {
    s = dynamics::step(s, Vec3::Zero(), j, none, static_cast<double>(k) * dt, dt,
                       dynamics::Integrator::kLieRk4);
  }
  CheckResult r{.name = "SO(3) drift (lie_rk4)", .threshold = 1e-8, .samples = steps};
  r.value = s.R.orthogonality_error();
  return finish(r, r.value < r.threshold);
}

CheckResult euler_rate_scaling() {
  auto window = [](double lo, double hi) {
    sim::EulerSweep sw;
    sw.theta2_from_deg = lo;
    sw.theta2_to_deg = hi;
    sw.samples = 401;
    return sim::max_rate_in_window(sim::euler313_sweep(sw), lo, hi);
  };
  const double near = window(0.1, 0.5);
  const double far = window(1.0, 5.0);
  CheckResult r{.name = "euler 3-1-3 rate scaling", .threshold = 10.0, .samples = 802};
  r.value = near / far;
  const double s1 = std::sin(1.0 * std::numbers::pi / 180.0);
  const double s01 = std::sin(0.1 * std::numbers::pi / 180.0);
  r.detail = fmt::format("max |rates| {:.6g} vs {:.6g}; |theta1_dot| alone scales by {:.6g}",
                         near, far, s1 / s01);
  return finish(r, r.value >= r.threshold);
}

std::vector<CheckResult> run_all(const SuiteOptions& opt) {
  if (opt.samples == 0) throw ConfigError("samples must be positive");
  const sim::ReferenceScenarios ps = sim::make_paper_scenarios();
  const geometry::ErrorModel& model = ps.multi_constraint_adaptive.model;
  const Rotation rd = ps.multi_constraint_adaptive.Rd;

  GradientOptions g;
  g.samples = opt.samples;
  BoundOptions b;
  b.samples = opt.samples * 1000;
  b.constants = geometry::BoundConstants::kMaxBased;
  b.sound_bounds = true;

  std::vector<CheckResult> out;
  out.push_back(identity_suite(opt.seed, opt.samples));
  out.push_back(gradient_psi(model, rd, opt.seed + 1, g));
  out.push_back(rate_eRA(model, rd, opt.seed + 2, g));
  out.push_back(rate_eRB(model, opt.seed + 3, g));
  out.push_back(bound_eRA(model, rd, opt.seed + 4, b));
  out.push_back(bound_E(model, rd, opt.seed + 5, b));
  out.push_back(bound_eRB(model, opt.seed + 6, b));
  out.push_back(bound_F(model, opt.seed + 7, b));
  out.push_back(hessian_check(model, rd, opt.seed + 8, opt.samples));
  out.push_back(integrator_order());
  out.push_back(integrator_drift(std::max<std::size_t>(opt.samples * 100, 1000)));
  return out;
}

}  // namespace geoatt::verify
