#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "geoatt/error_geometry.hpp"
#include "geoatt/errors.hpp"
#include "geoatt/sim.hpp"
#include "oracles.hpp"

namespace geoatt::geometry {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDeg = kPi / 180.0;

const AttractiveWeights kG{Vec3(0.9, 1.1, 1.0)};

ErrorModel single_cone_model(const Vec3& v, double theta_deg, double alpha) {
  return ErrorModel{kG, UnitVec3(Vec3::UnitX()),
                    {ConstraintCone(UnitVec3::normalized(v), theta_deg * kDeg)},
                    BarrierShape(alpha)};
}

const ErrorModel& reference_model() {
  static const ErrorModel m = sim::make_paper_scenarios().multi_constraint_adaptive.model;
  return m;
}

Rotation rot(const Mat3& m) { return Rotation::unchecked(m); }

Rotation random_feasible(std::mt19937_64& rng, const ErrorModel& model) {
  for (;;) {
    const Rotation r = rot(oracle::random_rotation(rng));
    if (is_feasible(r, model)) return r;
  }
}

// Direct transcription of the definitions, sharing no code with the library.
double oracle_A(const Mat3& r, const Mat3& rd, const Vec3& g) {
  return 0.5 * (g.asDiagonal() * (Mat3::Identity() - rd.transpose() * r)).trace();
}

double oracle_B(double x, double theta, double alpha) {
  return 1.0 - std::log((std::cos(theta) - x) / (1.0 + std::cos(theta))) / alpha;
}

TEST(Attractive, HandEvaluations) {
  const Rotation id;
  EXPECT_EQ(attractive_A(id, id, kG), 0.0);
  EXPECT_NEAR(attractive_A(so3::exp_so3(Vec3(0, 0, kPi)), id, kG), 2.0, 1e-15);
  EXPECT_NEAR(attractive_A(so3::exp_so3(Vec3(0, 0, kPi / 2)), id, kG), 1.0, 1e-15);
}

TEST(Attractive, MatchesDefinition) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    const Mat3 r = oracle::random_rotation(rng);
    const Mat3 rd = oracle::random_rotation(rng);
    const double a = attractive_A(rot(r), rot(rd), kG);
    EXPECT_NEAR(a, oracle_A(r, rd, kG.diagonal()), 1e-14);
    EXPECT_GT(a, 0.0);
  }
}

TEST(Barrier, OrthogonalSensorValue) {
  // r = e1, v = e2, R = I: r^T R^T v = 0.
  const ErrorModel m = single_cone_model(Vec3::UnitY(), 40.0, 15.0);
  const double b = barrier_B(Rotation(), m.sensor, m.cones[0], m.shape);
  EXPECT_NEAR(b, 1.05568, 1e-4);
  EXPECT_NEAR(b, oracle_B(0.0, 40 * kDeg, 15.0), 1e-15);
}

TEST(Barrier, AntipodalIsOne) {
  for (double theta : {10.0, 40.0, 90.0}) {
    for (double alpha : {0.5, 15.0}) {
      const ErrorModel m = single_cone_model(-Vec3::UnitX(), theta, alpha);
      EXPECT_NEAR(barrier_B(Rotation(), m.sensor, m.cones[0], m.shape), 1.0, 1e-15);
    }
  }
}

TEST(Barrier, BlowsUpAtBoundaryAndIsMonotone) {
  const double theta = 40 * kDeg;
  const ErrorModel m = single_cone_model(Vec3::UnitX(), 40.0, 15.0);
  double prev = 0.0;
  // Tilt the sensor away from v by angle phi: r^T R^T v = cos(phi).
  for (double phi = kPi; phi > theta + 1e-9; phi -= 0.01) {
    const Rotation r = so3::exp_so3(Vec3(0, 0, phi));
    const double b = barrier_B(r, m.sensor, m.cones[0], m.shape);
    EXPECT_GT(b, prev);
    prev = b;
  }
  const Rotation edge = so3::exp_so3(Vec3(0, 0, theta + 1e-10));
  EXPECT_GT(barrier_B(edge, m.sensor, m.cones[0], m.shape), 2.0);
}

TEST(Barrier, InfeasibleThrows) {
  const ErrorModel m = single_cone_model(Vec3::UnitX(), 40.0, 15.0);
  const Rotation inside = so3::exp_so3(Vec3(0, 0, 20 * kDeg));
  EXPECT_THROW(barrier_B(inside, m.sensor, m.cones[0], m.shape), ConstraintViolated);
  EXPECT_THROW(psi(inside, Rotation(), m), ConstraintViolated);
  EXPECT_FALSE(is_feasible(inside, m));
}

TEST(Barrier, ViolationNamesCone) {
  const ErrorModel& m = reference_model();
  // Point the sensor straight at the third cone axis.
  const Vec3 v3 = m.cones[2].v();
  const Vec3 axis = Vec3::UnitX().cross(v3);
  const double angle = std::acos(Vec3::UnitX().dot(v3));
  const Rotation r = so3::exp_so3(angle * axis.normalized());
  try {
    require_feasible(r, m, 1.5);
    FAIL() << "expected a violation";
  } catch (const ConstraintViolated& e) {
    EXPECT_EQ(e.cone_index(), 2u);
    EXPECT_EQ(e.time(), 1.5);
  }
}

TEST(Psi, ZeroAtGoalPositiveElsewhere) {
  const ErrorModel& m = reference_model();
  const Rotation rd;
  EXPECT_EQ(psi(rd, rd, m), 0.0);
  std::mt19937_64 rng(12);
  for (int i = 0; i < 10000; ++i) {
    EXPECT_GT(psi(random_feasible(rng, m), rd, m), 0.0);
  }
}

TEST(Psi, SingleConeIsProduct) {
  const ErrorModel m = single_cone_model(Vec3(1, 1, 0), 12.0, 15.0);
  std::mt19937_64 rng(13);
  for (int i = 0; i < 100; ++i) {
    const Rotation r = random_feasible(rng, m);
    const double a = attractive_A(r, Rotation(), kG);
    const double b = barrier_B(r, m.sensor, m.cones[0], m.shape);
    EXPECT_NEAR(psi(r, Rotation(), m), a * b, 1e-14 * (1 + a * b));
  }
}

TEST(Psi, DuplicatedConeCountsTwice) {
  ErrorModel one = single_cone_model(Vec3(0, 1, 1), 40.0, 15.0);
  ErrorModel two = one;
  two.cones.push_back(one.cones[0]);
  std::mt19937_64 rng(14);
  for (int i = 0; i < 100; ++i) {
    const Rotation r = random_feasible(rng, one);
    const double a = attractive_A(r, Rotation(), kG);
    const double b = barrier_B(r, one.sensor, one.cones[0], one.shape);
    const double p2 = psi(r, Rotation(), two);
    EXPECT_NEAR(p2, a * (1 + 2 * (b - 1)), 1e-13);
    EXPECT_GE(p2, psi(r, Rotation(), one));
  }
}

TEST(ErrorVectors, HandEvaluations) {
  const Rotation id;
  EXPECT_EQ(err_vec_eRA(id, id, kG), Vec3::Zero());
  const Vec3 e = err_vec_eRA(so3::exp_so3(Vec3(0, 0, kPi / 2)), id, kG);
  EXPECT_LT((e - Vec3(0, 0, 1)).norm(), 1e-15);

  const ErrorModel m = single_cone_model(Vec3::UnitY(), 60.0, 2.0);
  EXPECT_LT((err_vec_eRB(id, m.sensor, m.cones[0], m.shape) - Vec3(0, 0, 1)).norm(), 1e-15);

  const ErrorModel anti = single_cone_model(-Vec3::UnitX(), 40.0, 15.0);
  EXPECT_EQ(err_vec_eRB(id, anti.sensor, anti.cones[0], anti.shape), Vec3::Zero());
  EXPECT_EQ(err_vec_eR(id, id, reference_model()), Vec3::Zero());
}

TEST(ErrorVectors, SingleConeComposition) {
  const ErrorModel m = single_cone_model(Vec3(1, 1, 0), 12.0, 15.0);
  std::mt19937_64 rng(15);
  for (int i = 0; i < 100; ++i) {
    const Rotation r = random_feasible(rng, m);
    const Rotation rd;
    const Vec3 expected =
        err_vec_eRA(r, rd, kG) * barrier_B(r, m.sensor, m.cones[0], m.shape) +
        attractive_A(r, rd, kG) * err_vec_eRB(r, m.sensor, m.cones[0], m.shape);
    EXPECT_LT((err_vec_eR(r, rd, m) - expected).norm(), 1e-13);
  }
}

TEST(ErrorVectors, EvaluateAgreesWithSeparateCalls) {
  const ErrorModel& m = reference_model();
  std::mt19937_64 rng(16);
  const Rotation rd = so3::exp_so3(Vec3(0.1, -0.2, 0.3));
  for (int i = 0; i < 50; ++i) {
    const Rotation r = random_feasible(rng, m);
    const ErrorTerms t = evaluate(r, rd, m);
    EXPECT_EQ(t.psi, psi(r, rd, m));
    EXPECT_EQ(t.e_R, err_vec_eR(r, rd, m));
    EXPECT_EQ(t.A, attractive_A(r, rd, m.weights));
    ASSERT_EQ(t.B.size(), 4u);
  }
}

TEST(Gradient, AttractiveAndBarrierDirectional) {
  const ErrorModel m = single_cone_model(Vec3(0, 1, 1), 40.0, 15.0);
  std::mt19937_64 rng(17);
  for (int i = 0; i < 100; ++i) {
    const Rotation r = random_feasible(rng, m);
    const Vec3 eta = oracle::unit3(rng);
    const double fa = oracle::central_diff(
        [&](const Mat3& x) { return oracle_A(x, Mat3::Identity(), kG.diagonal()); },
        r.matrix(), eta, 1e-6);
    EXPECT_NEAR(fa, eta.dot(err_vec_eRA(r, Rotation(), kG)), 1e-8);

    const double fb = oracle::central_diff(
        [&](const Mat3& x) {
          return oracle_B((x * Vec3::UnitX()).dot(m.cones[0].v()), m.cones[0].theta(), 15.0);
        },
        r.matrix(), eta, 1e-6);
    const Vec3 erb = err_vec_eRB(r, m.sensor, m.cones[0], m.shape);
    EXPECT_NEAR(fb, eta.dot(erb), 1e-7 * (1 + erb.norm()));
  }
}

TEST(Gradient, PsiCentralDifferenceRelative) {
  const ErrorModel& m = reference_model();
  std::mt19937_64 rng(18);
  const Rotation rd;
  for (int i = 0; i < 100; ++i) {
    const Rotation r = random_feasible(rng, m);
    const Vec3 eta = oracle::unit3(rng);
    const double fd = oracle::central_diff(
        [&](const Mat3& x) { return psi(rot(x), rd, m); }, r.matrix(), eta, 1e-6);
    const double an = eta.dot(err_vec_eR(r, rd, m));
    EXPECT_LT(std::abs(fd - an) / std::max(std::abs(an), 1e-8), 1e-4) << i;
  }
}

TEST(Gradient, PsiForwardDifferenceAbsolute) {
  // Away from the cone walls, where the curvature of Psi stays moderate.
  const ErrorModel& m = reference_model();
  const std::vector<double> caps = default_beta_caps(m);
  std::mt19937_64 rng(19);
  const Rotation rd;
  int checked = 0;
  while (checked < 100) {
    const Rotation r = random_feasible(rng, m);
    bool interior = true;
    for (std::size_t k = 0; k < m.cones.size(); ++k) {
      interior = interior && cone_cosine(r, m.sensor, m.cones[k]) <= caps[k];
    }
    if (!interior) continue;
    ++checked;
    const Vec3 eta = oracle::unit3(rng);
    const double an = eta.dot(err_vec_eR(r, rd, m));
    for (double eps : {1e-5, 1e-6}) {
      const double fd =
          (psi(r * so3::exp_so3(eps * eta), rd, m) - psi(r, rd, m)) / eps;
      EXPECT_LE(std::abs(fd - an), 50 * eps) << eps;
    }
  }
}

TEST(Rates, EMatchesFiniteDifference) {
  std::mt19937_64 rng(20);
  const Rotation rd = so3::exp_so3(Vec3(0.3, 0.2, -0.4));
  for (int i = 0; i < 100; ++i) {
    const Rotation r = rot(oracle::random_rotation(rng));
    const Vec3 w = oracle::gaussian3(rng);
    const Vec3 fd = oracle::central_diff_vec(
        [&](const Mat3& x) { return err_vec_eRA(rot(x), rd, kG); }, r.matrix(), w, 1e-6);
    const Vec3 an = matrix_E(r, rd, kG) * w;
    EXPECT_LT((fd - an).norm(), 1e-8 * (1 + an.norm()));
  }
}

TEST(Rates, FMatchesFiniteDifference) {
  const ErrorModel& m = reference_model();
  std::mt19937_64 rng(21);
  for (int i = 0; i < 100; ++i) {
    const Rotation r = random_feasible(rng, m);
    const Vec3 w = oracle::gaussian3(rng);
    for (const auto& cone : m.cones) {
      const Vec3 fd = oracle::central_diff_vec(
          [&](const Mat3& x) { return err_vec_eRB(rot(x), m.sensor, cone, m.shape); },
          r.matrix(), w, 1e-6);
      const Vec3 an = matrix_F(r, m.sensor, cone, m.shape) * w;
      EXPECT_LT((fd - an).norm() / std::max(an.norm(), 1e-8), 1e-4);
    }
  }
}

TEST(Rates, EAtGoal) {
  const Mat3 e = matrix_E(Rotation(), Rotation(), kG);
  EXPECT_LT((e - Vec3(1.05, 0.95, 1.0).asDiagonal().toDenseMatrix()).norm(), 1e-15);
}

TEST(Rates, FFiniteOnFarSide) {
  const ErrorModel m = single_cone_model(-Vec3::UnitX(), 40.0, 15.0);
  const Mat3 far = matrix_F(Rotation(), m.sensor, m.cones[0], m.shape);
  EXPECT_TRUE(far.allFinite());
  const ErrorModel near = single_cone_model(Vec3::UnitX(), 40.0, 15.0);
  const Rotation r = so3::exp_so3(Vec3(0, 0, 41 * kDeg));
  const Mat3 close = matrix_F(r, near.sensor, near.cones[0], near.shape);
  EXPECT_LT(far.norm() * 100, close.norm());
}

TEST(Bounds, NormEOverRandomRotations) {
  std::mt19937_64 rng(22);
  const double bound = kG.trace() / std::sqrt(2.0);
  for (int i = 0; i < 10000; ++i) {
    const Mat3 e = matrix_E(rot(oracle::random_rotation(rng)), Rotation(), kG);
    EXPECT_LE(e.jacobiSvd().singularValues()(0), bound);
  }
}

TEST(Ledger, MinBasedHandValues) {
  const ConstraintCone cone(UnitVec3(Vec3::UnitY()), 40 * kDeg);
  const BoundLedger l = bound_ledger(kG, cone, BarrierShape(15.0), 1.0, 0.5);
  EXPECT_NEAR(l.h1, 1.9, 1e-15);
  EXPECT_NEAR(l.h2, 0.01, 1e-15);
  EXPECT_NEAR(l.h3, 3.61, 1e-14);
  EXPECT_NEAR(l.b1, 1.9 / 3.62, 1e-15);
  EXPECT_NEAR(l.b1, 0.52486, 1e-5);
  EXPECT_NEAR(l.eRB_bound, 0.16106, 2e-5);
  EXPECT_NEAR(l.eRB_bound,
              std::sin(40 * kDeg) / (15.0 * (std::cos(40 * kDeg) - 0.5)), 1e-15);
  EXPECT_NEAR(l.b2, l.h1 * l.h4 / (l.h5 * (l.h1 - 1.0)), 1e-15);
  EXPECT_NEAR(l.normE_bound, 3.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(l.H, l.cB * l.normE_bound + 2 * l.eRA_bound * l.eRB_bound + l.cA * l.normF_bound,
              1e-12);
}

TEST(Ledger, MaxBasedHandValues) {
  const ConstraintCone cone(UnitVec3(Vec3::UnitY()), 40 * kDeg);
  const BoundLedger l =
      bound_ledger(kG, cone, BarrierShape(15.0), 1.0, 0.5, BoundConstants::kMaxBased);
  EXPECT_NEAR(l.h2, 0.04, 1e-15);
  EXPECT_NEAR(l.h3, 4.41, 1e-14);
  EXPECT_NEAR(l.h4, 2.1, 1e-15);
  EXPECT_NEAR(l.b1, 1.9 / 4.45, 1e-15);
}

TEST(Ledger, RejectsEmptyDomain) {
  const ConstraintCone right(UnitVec3(Vec3::UnitY()), 90 * kDeg);
  EXPECT_THROW(bound_ledger(kG, right, BarrierShape(1.0), 1.0, 0.0), DomainInvalid);
  const ConstraintCone cone(UnitVec3(Vec3::UnitY()), 40 * kDeg);
  EXPECT_THROW(bound_ledger(kG, cone, BarrierShape(1.0), 1.9, 0.5), DomainInvalid);
  EXPECT_THROW(bound_ledger(kG, cone, BarrierShape(1.0), 1.0, 0.8), DomainInvalid);
}

TEST(Ledger, MinBasedERABoundHasCounterexample) {
  // Small rotation about e1: |e_RA|^2 / A = 0.5 (g2 + g3)(1 + cos phi) ~ 2.1,
  // above 1 / b1 = 1.905 with the min-based constants.
  const Rotation r = so3::exp_so3(Vec3(0.1, 0, 0));
  const double a = attractive_A(r, Rotation(), kG);
  const double e2 = err_vec_eRA(r, Rotation(), kG).squaredNorm();
  const ConstraintCone cone(UnitVec3(Vec3::UnitY()), 40 * kDeg);
  const BoundLedger lmin = bound_ledger(kG, cone, BarrierShape(15.0), 1.0, 0.5);
  const BoundLedger lmax =
      bound_ledger(kG, cone, BarrierShape(15.0), 1.0, 0.5, BoundConstants::kMaxBased);
  EXPECT_GT(e2, a / lmin.b1);
  EXPECT_LE(e2, a / lmax.b1);
}

TEST(Ledger, MaxBasedERABoundOverSamples) {
  const ConstraintCone cone(UnitVec3(Vec3::UnitY()), 40 * kDeg);
  const BoundLedger l =
      bound_ledger(kG, cone, BarrierShape(15.0), 1.0, 0.5, BoundConstants::kMaxBased);
  std::mt19937_64 rng(23);
  for (int i = 0; i < 100000; ++i) {
    const Rotation r = rot(oracle::random_rotation(rng));
    const double a = attractive_A(r, Rotation(), kG);
    ASSERT_LE(err_vec_eRA(r, Rotation(), kG).squaredNorm(), a / l.b1 + 1e-12);
  }
}

TEST(Ledger, StatedERBBoundBelowSupremum) {
  // |e_RB| = sqrt(1 - x^2) / (alpha (cos theta - x)) increases in x, so the
  // supremum over x <= beta sits at x = beta and exceeds sin(theta) / (...).
  const double theta = 40 * kDeg;
  const double beta = 0.5;
  const ErrorModel m = single_cone_model(Vec3::UnitX(), 40.0, 15.0);
  const BoundLedger l = bound_ledger(kG, m.cones[0], m.shape, 1.0, beta);
  const Rotation at_beta = so3::exp_so3(Vec3(0, 0, std::acos(beta)));
  const double norm = err_vec_eRB(at_beta, m.sensor, m.cones[0], m.shape).norm();
  EXPECT_NEAR(norm, l.eRB_sup, 1e-12);
  EXPECT_GT(norm, l.eRB_bound);
  EXPECT_NEAR(l.eRB_sup, std::sqrt(1 - beta * beta) / (15.0 * (std::cos(theta) - beta)),
              1e-15);

  std::mt19937_64 rng(24);
  for (int i = 0; i < 100000; ++i) {
    const Rotation r = rot(oracle::random_rotation(rng));
    if (cone_cosine(r, m.sensor, m.cones[0]) > beta) continue;
    ASSERT_LE(err_vec_eRB(r, m.sensor, m.cones[0], m.shape).norm(), l.eRB_sup * (1 + 1e-12));
    ASSERT_LE(matrix_F(r, m.sensor, m.cones[0], m.shape).jacobiSvd().singularValues()(0),
              l.normF_sup);
  }
}

TEST(Ledger, PrintedFBoundExceededForLargeAlpha) {
  // The printed bound shrinks like 1/alpha^2 while |F| shrinks like 1/alpha.
  const double beta = 0.5;
  const Rotation at_beta = so3::exp_so3(Vec3(0, 0, std::acos(beta)));
  for (double alpha : {15.0, 50.0}) {
    const ErrorModel m = single_cone_model(Vec3::UnitX(), 40.0, alpha);
    const BoundLedger l = bound_ledger(kG, m.cones[0], m.shape, 1.0, beta);
    const double norm =
        matrix_F(at_beta, m.sensor, m.cones[0], m.shape).jacobiSvd().singularValues()(0);
    EXPECT_GT(norm, l.normF_bound) << alpha;
    EXPECT_LE(norm, l.normF_sup) << alpha;
  }
}

TEST(Ledger, CombinedRateBoundReducesToSingle) {
  const ConstraintCone cone(UnitVec3(Vec3::UnitY()), 40 * kDeg);
  const BoundLedger l = bound_ledger(kG, cone, BarrierShape(15.0), 1.0, 0.5);
  const std::vector<BoundLedger> one{l};
  EXPECT_NEAR(combined_rate_bound(one), l.H, 1e-12);
  const std::vector<BoundLedger> two{l, l};
  EXPECT_GT(combined_rate_bound(two), l.H);
  EXPECT_THROW(combined_rate_bound(std::vector<BoundLedger>{}), DomainInvalid);
}

TEST(Hessian, ClosedFormAtIdentity) {
  const ErrorModel m = single_cone_model(Vec3(1, 1, 0), 12.0, 15.0);
  const double b = barrier_B(Rotation(), m.sensor, m.cones[0], m.shape);
  const Mat3 h = hessian_psi_at_goal(Rotation(), m);
  const Mat3 expected = 0.5 * b * Vec3(2.1, 1.9, 2.0).asDiagonal().toDenseMatrix();
  EXPECT_LT((h - expected).norm(), 1e-14);
}

TEST(Hessian, PositiveAndMatchesSecondDifference) {
  const ErrorModel& m = reference_model();
  const Rotation rd;
  const Mat3 h = hessian_psi_at_goal(rd, m);
  Eigen::SelfAdjointEigenSolver<Mat3> eig(h);
  EXPECT_GT(eig.eigenvalues().minCoeff(), 0.0);
  std::mt19937_64 rng(25);
  for (int i = 0; i < 50; ++i) {
    const Vec3 eta = oracle::unit3(rng);
    const double fd = oracle::second_diff(
        [&](const Mat3& x) { return psi(rot(x), rd, m); }, rd.matrix(), eta, 1e-4);
    const double an = eta.dot(h * eta);
    EXPECT_LT(std::abs(fd - an) / an, 1e-3);
  }
}

TEST(Hessian, InfeasibleGoalThrows) {
  const ErrorModel m = single_cone_model(Vec3::UnitX(), 40.0, 15.0);
  EXPECT_THROW(hessian_psi_at_goal(Rotation(), m), ConstraintViolated);
}

TEST(QuadraticBounds, TinyDomainMatchesHessianConditioning) {
  const ErrorModel& m = reference_model();
  const Rotation rd;
  const std::vector<double> caps = default_beta_caps(m);
  const QuadraticBounds q = estimate_quadratic_bounds(rd, m, 1e-6, caps, 20000, 3);
  Eigen::SelfAdjointEigenSolver<Mat3> eig(hessian_psi_at_goal(rd, m));
  const double lmin = eig.eigenvalues().minCoeff();
  const double lmax = eig.eigenvalues().maxCoeff();
  // Near the goal Psi ~ 0.5 eta^T H eta and e_R ~ H eta.
  EXPECT_NEAR(q.n1, 0.5 / lmax, 0.1 * 0.5 / lmax);
  EXPECT_NEAR(q.n2, 0.5 / lmin, 0.1 * 0.5 / lmin);
  EXPECT_NEAR(q.n2 / q.n1, lmax / lmin, 0.1 * lmax / lmin);
}

TEST(QuadraticBounds, SingleAcceptedSample) {
  const ErrorModel& m = reference_model();
  const std::vector<double> caps = default_beta_caps(m);
  const QuadraticBounds q = estimate_quadratic_bounds(Rotation(), m, 1e-4, caps, 1, 5);
  EXPECT_EQ(q.accepted, 1u);
  EXPECT_EQ(q.n1, q.n2);
  const QuadraticBounds w = q.widened();
  EXPECT_DOUBLE_EQ(w.n1, q.n1 / 2);
  EXPECT_DOUBLE_EQ(w.n2, q.n2 * 2);
  EXPECT_EQ(w.accepted, 1u);
}

TEST(QuadraticBounds, FreshSamplesStayInsideSandwich) {
  const ErrorModel& m = reference_model();
  const Rotation rd;
  const double cap = default_psi_cap(m.weights);
  const std::vector<double> caps = default_beta_caps(m);
  const QuadraticBounds q = estimate_quadratic_bounds(rd, m, cap, caps, 200000, 8);
  ASSERT_GT(q.n1, 0.0);
  ASSERT_LE(q.n1, q.n2);

  std::mt19937_64 rng(26);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t outside = 0;
  std::size_t checked = 0;
  while (checked < 10000) {
    const Rotation r = sample_near_goal(rd, m.weights, cap, u(rng), oracle::gaussian3(rng));
    if (!in_domain(r, rd, m, cap, caps)) continue;
    const ErrorTerms t = evaluate(r, rd, m);
    if (t.e_R.norm() < 1e-9) continue;
    ++checked;
    const double ratio = t.psi / t.e_R.squaredNorm();
    if (ratio < q.n1 || ratio > q.n2) ++outside;
  }
  EXPECT_EQ(outside, 0u);
}

TEST(QuadraticBounds, RejectsNoSamples) {
  const ErrorModel& m = reference_model();
  const std::vector<double> caps = default_beta_caps(m);
  EXPECT_THROW(estimate_quadratic_bounds(Rotation(), m, 1.0, caps, 0, 1), DomainInvalid);
}

TEST(Types, RejectInvalidParameters) {
  EXPECT_THROW(AttractiveWeights(Vec3(1.0, 1.0, 2.0)), DomainInvalid);
  EXPECT_THROW(AttractiveWeights(Vec3(1.0, -1.0, 2.0)), DomainInvalid);
  EXPECT_THROW(BarrierShape(0.0), DomainInvalid);
  EXPECT_THROW(ConstraintCone(UnitVec3(Vec3::UnitX()), 0.0), DomainInvalid);
  EXPECT_THROW(ConstraintCone(UnitVec3(Vec3::UnitX()), 91 * kDeg), DomainInvalid);
  EXPECT_NO_THROW(ConstraintCone(UnitVec3(Vec3::UnitX()), 90 * kDeg));
}

TEST(MutationHook, FlipBreaksGradient) {
  const ErrorModel& m = reference_model();
  std::mt19937_64 rng(27);
  const Rotation r = random_feasible(rng, m);
  const Vec3 before = err_vec_eR(r, Rotation(), m);
  testing::set_flip_eRB_sign(true);
  const Vec3 after = err_vec_eR(r, Rotation(), m);
  testing::set_flip_eRB_sign(false);
  EXPECT_GT((before - after).norm(), 1e-6);
  EXPECT_EQ(err_vec_eR(r, Rotation(), m), before);
}

}  // namespace
}  // namespace geoatt::geometry
