#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "geoatt/control.hpp"
#include "geoatt/errors.hpp"
#include "geoatt/sim.hpp"
#include "oracles.hpp"

namespace geoatt::control {
namespace {

using dynamics::InertiaMatrix;

ControllerParams unit_params(double c = 0.4) {
  return ControllerParams{.kR = 1.0,
                          .kOmega = 1.0,
                          .kDelta = 0.5,
                          .c = c,
                          .J = InertiaMatrix(Mat3::Identity()),
                          .mode = Mode::kAdaptive,
                          .gravity = std::nullopt};
}

const sim::Scenario& scenario_a() {
  static const sim::Scenario s = sim::make_paper_scenarios().multi_constraint_adaptive;
  return s;
}

Rotation random_feasible(std::mt19937_64& rng, const ErrorModel& m) {
  for (;;) {
    const Rotation r = Rotation::unchecked(oracle::random_rotation(rng));
    if (geometry::is_feasible(r, m)) return r;
  }
}

Mat3X identity_w() { return Mat3X::Identity(3, 3); }

TEST(Smooth, ZeroAtEquilibrium) {
  const auto& s = scenario_a();
  EXPECT_EQ(control_smooth(BodyState{}, Rotation(), s.model, s.params), Vec3::Zero());
}

TEST(Smooth, PrincipalAxisSpinAtGoal) {
  auto p = scenario_a().params;
  p.J = InertiaMatrix(Vec3(2, 1, 1).asDiagonal().toDenseMatrix());
  const BodyState st{Rotation(), Vec3::UnitZ()};
  const Vec3 u = control_smooth(st, Rotation(), scenario_a().model, p);
  EXPECT_LT((u + p.kOmega * Vec3::UnitZ()).norm(), 1e-15);
}

TEST(Smooth, DefinitionalResidual) {
  const auto& s = scenario_a();
  std::mt19937_64 rng(40);
  for (int i = 0; i < 100; ++i) {
    const BodyState st{random_feasible(rng, s.model), oracle::gaussian3(rng)};
    const Vec3 u = control_smooth(st, s.Rd, s.model, s.params);
    const Vec3 e_R = geometry::err_vec_eR(st.R, s.Rd, s.model);
    const Mat3& j = s.params.J.matrix();
    const Vec3 r = u + s.params.kR * e_R + s.params.kOmega * st.omega -
                   st.omega.cross(j * st.omega);
    EXPECT_LT(r.norm(), 1e-12 * (1 + u.norm()));
  }
}

TEST(Smooth, GravityFeedforward) {
  auto p = scenario_a().params;
  p.gravity = dynamics::GravityMoment{Vec3(0, 0, 0.05), 1.0, 9.81};
  const Rotation r = so3::exp_so3(Vec3(0.3, 0, 0));
  geometry::ErrorModel free = scenario_a().model;
  free.cones.clear();
  const BodyState st{r, Vec3::Zero()};
  const Vec3 with = control_smooth(st, r, free, p);
  EXPECT_LT((with + p.gravity->moment(r)).norm(), 1e-15);
}

TEST(Adaptive, ZeroEstimateMatchesSmooth) {
  const auto& s = scenario_a();
  std::mt19937_64 rng(41);
  const EstimatorState est{VecX::Zero(3)};
  for (int i = 0; i < 20; ++i) {
    const BodyState st{random_feasible(rng, s.model), oracle::gaussian3(rng)};
    EXPECT_EQ(control_adaptive(st, est, s.Rd, s.model, identity_w(), s.params),
              control_smooth(st, s.Rd, s.model, s.params));
  }
}

TEST(Adaptive, PureCancellationAtGoal) {
  const auto& s = scenario_a();
  const EstimatorState est{VecX::Constant(3, 0.2)};
  const Vec3 u = control_adaptive(BodyState{}, est, Rotation(), s.model, identity_w(), s.params);
  EXPECT_LT((u - Vec3(-0.2, -0.2, -0.2)).norm(), 1e-15);
}

TEST(Adaptive, DefinitionalResidual) {
  const auto& s = scenario_a();
  std::mt19937_64 rng(42);
  for (int i = 0; i < 100; ++i) {
    const BodyState st{random_feasible(rng, s.model), oracle::gaussian3(rng)};
    const EstimatorState est{oracle::gaussian3(rng)};
    const Vec3 u = control_adaptive(st, est, s.Rd, s.model, identity_w(), s.params);
    const Vec3 e_R = geometry::err_vec_eR(st.R, s.Rd, s.model);
    const Mat3& j = s.params.J.matrix();
    const Vec3 r = u + s.params.kR * e_R + s.params.kOmega * st.omega -
                   st.omega.cross(j * st.omega) + est.delta_bar;
    EXPECT_LT(r.norm(), 1e-12 * (1 + u.norm()));
  }
}

TEST(Estimator, RateExamples) {
  ControllerParams p = unit_params(1.0);
  ErrorTerms terms;
  terms.e_R = Vec3::UnitY();
  const BodyState st{Rotation(), Vec3::UnitX()};
  const VecX rate = estimator_rate_from_terms(st, terms, p, identity_w());
  EXPECT_LT((rate - Eigen::Vector3d(0.5, 0.5, 0)).norm(), 1e-15);

  p.kDelta = 0.0;
  EXPECT_EQ(estimator_rate_from_terms(st, terms, p, identity_w()), VecX::Zero(3));

  const auto& s = scenario_a();
  const EstimatorState est{VecX::Zero(3)};
  EXPECT_EQ(estimator_rate(BodyState{}, est, Rotation(), s.model, identity_w(), s.params),
            VecX::Zero(3));
}

TEST(Estimator, MatchesFormulaOnScenario) {
  const auto& s = scenario_a();
  std::mt19937_64 rng(43);
  for (int i = 0; i < 20; ++i) {
    const BodyState st{random_feasible(rng, s.model), oracle::gaussian3(rng)};
    const EstimatorState est{VecX::Zero(3)};
    const Vec3 e_R = geometry::err_vec_eR(st.R, s.Rd, s.model);
    const VecX expected = s.params.kDelta * (st.omega + s.params.c * e_R);
    EXPECT_LT((estimator_rate(st, est, s.Rd, s.model, identity_w(), s.params) - expected).norm(),
              1e-12);
  }
}

TEST(GainBound, UnitValues) {
  const GainCheck g = validate_c(unit_params(0.5), 1.0, 1.0);
  EXPECT_NEAR(g.c_max_energy, std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(g.c_max_rate, 0.8, 1e-15);
  EXPECT_NEAR(g.c_max, 0.8, 1e-15);
  EXPECT_TRUE(g.ok);
  EXPECT_FALSE(validate_c(unit_params(0.0), 1.0, 1.0).ok);
  EXPECT_FALSE(validate_c(unit_params(0.9), 1.0, 1.0).ok);
}

TEST(GainBound, VanishingDamping) {
  ControllerParams p = unit_params();
  double prev = 1.0;
  for (double k : {1e-1, 1e-2, 1e-4, 1e-8}) {
    p.kOmega = k;
    const double c_max = validate_c(p, 1.0, 1.0).c_max;
    EXPECT_LT(c_max, prev);
    prev = c_max;
  }
  EXPECT_LT(prev, 1e-7);
}

TEST(GainBound, RejectsMissingInputs) {
  EXPECT_THROW(validate_c(unit_params(), 1.0, 0.0), DomainInvalid);
  EXPECT_THROW(validate_c(unit_params(), 0.0, 1.0), DomainInvalid);
}

TEST(Definiteness, WithinBoundAllPositive) {
  const ControllerParams p = unit_params(0.4);
  const DefinitenessReport rep = check_matrices_W1_W2_M(p, 1.0, 1.0, 1.0);
  EXPECT_TRUE(rep.all_positive());
  EXPECT_DOUBLE_EQ(rep.W1(2, 2), 1.0 / (2 * p.kDelta));
  EXPECT_DOUBLE_EQ(rep.W2(2, 2), 1.0 / (2 * p.kDelta));
}

TEST(Definiteness, OverGainedIsIndefinite) {
  const double c_max = validate_c(unit_params(), 1.0, 1.0).c_max;
  const DefinitenessReport rep = check_matrices_W1_W2_M(unit_params(10 * c_max), 1.0, 1.0, 1.0);
  EXPECT_FALSE(rep.M_positive);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(rep.M);
  EXPECT_LT(eig.eigenvalues().minCoeff(), 0.0);
}

TEST(Definiteness, SylvesterAgreesWithEigenvalues) {
  std::mt19937_64 rng(44);
  for (int i = 0; i < 200; ++i) {
    Mat3 a;
    for (int k = 0; k < 9; ++k) a(k) = oracle::gaussian3(rng).x();
    const Mat3 s = a + a.transpose();
    Eigen::SelfAdjointEigenSolver<Mat3> eig(s);
    EXPECT_EQ(leading_minors_positive(s), eig.eigenvalues().minCoeff() > 0.0);
  }
}

TEST(Params, ValidateRejectsNonPositiveGains) {
  ControllerParams p = unit_params();
  EXPECT_NO_THROW(validate(p));
  p.kR = -0.4;
  EXPECT_THROW(validate(p), DomainInvalid);
  p = unit_params();
  p.kOmega = 0.0;
  EXPECT_THROW(validate(p), DomainInvalid);
  p = unit_params();
  p.kDelta = 0.0;
  EXPECT_THROW(validate(p), DomainInvalid);
  p.mode = Mode::kSmooth;
  EXPECT_NO_THROW(validate(p));
}

TEST(Lyapunov, Formulas) {
  const ControllerParams p = unit_params(0.5);
  const BodyState st{Rotation(), Vec3(1, 2, 0)};
  EXPECT_DOUBLE_EQ(lyapunov_smooth(st, 0.25, p), 0.5 * 5 + 0.25);
  ErrorTerms t;
  t.psi = 0.25;
  t.e_R = Vec3(0, 1, 0);
  const VecX ed = Eigen::Vector3d(1, 0, 0);
  EXPECT_DOUBLE_EQ(lyapunov_adaptive(st, t, ed, p), 2.75 + 0.5 * 2 + 1.0);
}

TEST(Equivariance, RotatingInertialFrame) {
  const auto& s = scenario_a();
  std::mt19937_64 rng(45);
  for (int i = 0; i < 50; ++i) {
    const Mat3 q = oracle::random_rotation(rng);
    geometry::ErrorModel moved = s.model;
    moved.cones.clear();
    for (const auto& c : s.model.cones) {
      moved.cones.emplace_back(geometry::UnitVec3::normalized(q * c.v()), c.theta());
    }
    const Rotation rd = so3::exp_so3(0.2 * oracle::gaussian3(rng));
    if (!geometry::is_feasible(rd, s.model)) continue;
    const BodyState st{random_feasible(rng, s.model), oracle::gaussian3(rng)};
    const BodyState st_q{Rotation::unchecked(q * st.R.matrix()), st.omega};
    const Rotation rd_q = Rotation::unchecked(q * rd.matrix());

    const ErrorTerms a = geometry::evaluate(st.R, rd, s.model);
    const ErrorTerms b = geometry::evaluate(st_q.R, rd_q, moved);
    EXPECT_NEAR(a.psi, b.psi, 1e-10 * (1 + a.psi));
    EXPECT_NEAR(a.e_R.norm(), b.e_R.norm(), 1e-10 * (1 + a.e_R.norm()));
    const double ua = control_smooth(st, rd, s.model, s.params).norm();
    const double ub = control_smooth(st_q, rd_q, moved, s.params).norm();
    EXPECT_NEAR(ua, ub, 1e-10 * (1 + ua));
  }
}

TEST(Modes, NamesRoundTrip) {
  for (Mode m : {Mode::kSmooth, Mode::kAdaptive}) {
    EXPECT_EQ(mode_from_string(to_string(m)), m);
  }
  EXPECT_FALSE(mode_from_string("robust").has_value());
}

}  // namespace
}  // namespace geoatt::control
