#ifndef GEOATT_ERROR_GEOMETRY_HPP_
#define GEOATT_ERROR_GEOMETRY_HPP_

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "geoatt/so3.hpp"

namespace geoatt::geometry {

using so3::Rotation;
using so3::UnitVec3;

/// r^T R^T v >= cos(theta) - kFeasibilityMargin counts as a violation.
inline constexpr double kFeasibilityMargin = 1e-12;

/// Diagonal of the attractive weight matrix G. Entries must be positive and
/// pairwise distinct.
class AttractiveWeights {
 public:
  explicit AttractiveWeights(const Vec3& g, double tie_tol = 1e-9);

  [[nodiscard]] const Vec3& diagonal() const { return g_; }
  [[nodiscard]] Mat3 matrix() const { return g_.asDiagonal(); }
  [[nodiscard]] double trace() const { return g_.sum(); }

 private:
  Vec3 g_;
};

/// Keep-out cone: the body-fixed sensor r must satisfy r^T R^T v < cos(theta).
class ConstraintCone {
 public:
  ConstraintCone(const UnitVec3& v, double theta_rad);

  [[nodiscard]] const Vec3& v() const { return v_.vec(); }
  [[nodiscard]] double theta() const { return theta_; }
  [[nodiscard]] double cos_theta() const { return cos_theta_; }

 private:
  UnitVec3 v_;
  double theta_;
  double cos_theta_;
};

class BarrierShape {
 public:
  explicit BarrierShape(double alpha);
  [[nodiscard]] double alpha() const { return alpha_; }

 private:
  double alpha_;
};

/// Everything the configuration error function depends on besides R and Rd.
struct ErrorModel {
  AttractiveWeights weights;
  UnitVec3 sensor;
  std::vector<ConstraintCone> cones;
  BarrierShape shape;
};

/// r^T R^T v for one cone.
double cone_cosine(const Rotation& r, const Vec3& sensor, const ConstraintCone& cone);

/// Angle between R r and v, in degrees.
double cone_angle_deg(const Rotation& r, const Vec3& sensor, const ConstraintCone& cone);

/// True when every cone is satisfied with the feasibility margin.
bool is_feasible(const Rotation& r, const ErrorModel& model);

/// Throws ConstraintViolated naming the first violated cone.
void require_feasible(const Rotation& r, const ErrorModel& model,
                      double time = std::numeric_limits<double>::quiet_NaN());

double attractive_A(const Rotation& r, const Rotation& rd, const AttractiveWeights& g);

double barrier_B(const Rotation& r, const Vec3& sensor, const ConstraintCone& cone,
                 const BarrierShape& shape);

/// A * (1 + sum_i (B_i - 1)); equals A * B for a single cone.
double psi(const Rotation& r, const Rotation& rd, const ErrorModel& model);

Vec3 err_vec_eRA(const Rotation& r, const Rotation& rd, const AttractiveWeights& g);

Vec3 err_vec_eRB(const Rotation& r, const Vec3& sensor, const ConstraintCone& cone,
                 const BarrierShape& shape);

/// e_RA (1 + sum_i (B_i - 1)) + A sum_i e_RB,i
Vec3 err_vec_eR(const Rotation& r, const Rotation& rd, const ErrorModel& model);

/// d/dt e_RA = E e_Omega
Mat3 matrix_E(const Rotation& r, const Rotation& rd, const AttractiveWeights& g);

/// d/dt e_RB = F e_Omega
Mat3 matrix_F(const Rotation& r, const Vec3& sensor, const ConstraintCone& cone,
              const BarrierShape& shape);

/// All error-function quantities at one attitude, computed once.
struct ErrorTerms {
  double A = 0.0;
  std::vector<double> B;           // per cone
  std::vector<double> cone_cos;    // r^T R^T v_i
  double psi = 0.0;
  Vec3 e_RA = Vec3::Zero();
  std::vector<Vec3> e_RB;          // per cone
  Vec3 e_R = Vec3::Zero();
};

ErrorTerms evaluate(const Rotation& r, const Rotation& rd, const ErrorModel& model);

/// Which definitions to use for h2..h4. kMinBased takes min{} for every
/// constant; with it the e_RA bound does not hold (rotation about e1 with
/// G = diag(0.9, 1.1, 1.0) gives |e_RA|^2 ~ 2.1 A while 1/b1 = 1.905).
/// kMaxBased uses max{} for h2, h3, h4, which makes every bound hold.
enum class BoundConstants { kMinBased, kMaxBased };

struct BoundLedger {
  double h1 = 0, h2 = 0, h3 = 0, h4 = 0, h5 = 0;
  double b1 = 0, b2 = 0;
  double psi_cap = 0;
  double beta_cap = 0;
  double cA = 0;            // A < cA on the domain
  double cB = 0;            // B < cB on the domain
  double normE_bound = 0;   // tr[G] / sqrt(2)
  /// As printed; scales with 1/alpha^2 and is exceeded for large alpha.
  double normF_bound = 0;
  /// (2 + 1/d) / (alpha d) with d = cos(theta) - beta, from |xI - b r^T| <= 2
  /// and |(b x r)(b x r)^T| <= 1.
  double normF_sup = 0;
  double eRA_bound = 0;     // sqrt(psi / b1)
  double eRB_bound = 0;     // sin(theta) / (alpha (cos(theta) - beta))
  /// True supremum of |e_RB| over r^T R^T v <= beta:
  /// sqrt(1 - beta^2) / (alpha (cos(theta) - beta)). Always >= eRB_bound.
  double eRB_sup = 0;
  double H = 0;             // |d/dt e_R| <= H |e_Omega|
};

/// Throws DomainInvalid unless 0 < psi_cap < h1 and 0 < beta_cap < cos(theta).
BoundLedger bound_ledger(const AttractiveWeights& g, const ConstraintCone& cone,
                         const BarrierShape& shape, double psi_cap, double beta_cap,
                         BoundConstants constants = BoundConstants::kMinBased);

/// Rate bound for several cones, from differentiating A (1 + sum C_i).
/// Reduces to ledgers[0].H for a single cone.
double combined_rate_bound(std::span<const BoundLedger> ledgers);

/// Default domain caps: psi = 0.9 h1, beta_i = 0.9 cos(theta_i).
double default_psi_cap(const AttractiveWeights& g);
std::vector<double> default_beta_caps(const ErrorModel& model);

/// Riemannian Hessian of Psi at Rd in the exponential chart:
/// 0.5 (1 + sum C_i(Rd)) (tr[G] I - G).
Mat3 hessian_psi_at_goal(const Rotation& rd, const ErrorModel& model);

struct QuadraticBounds {
  double n1 = 0;
  double n2 = 0;
  std::size_t accepted = 0;

  /// n1 / factor and n2 * factor, for consumers that need conservative values.
  QuadraticBounds widened(double factor = 2.0) const {
    return {n1 / factor, n2 * factor, accepted};
  }
};

/// Sampled estimate of 0 < n1 <= n2 with n1 |e_R|^2 <= Psi <= n2 |e_R|^2 on
/// D = {Psi < psi_cap, r^T R^T v_i < beta_i}. Throws DomainInvalid when no
/// sample lands in D or samples == 0.
QuadraticBounds estimate_quadratic_bounds(const Rotation& rd, const ErrorModel& model,
                                          double psi_cap,
                                          std::span<const double> beta_caps,
                                          std::size_t samples, std::uint64_t seed);

/// Draws one attitude Rd exp(eta) with |eta| small enough that Psi can be
/// below psi_cap. Exposed for tests that resample the domain.
Rotation sample_near_goal(const Rotation& rd, const AttractiveWeights& g,
                          double psi_cap, double u_angle, const Vec3& gaussian);

/// True when R lies in D.
bool in_domain(const Rotation& r, const Rotation& rd, const ErrorModel& model,
               double psi_cap, std::span<const double> beta_caps);

namespace testing {

/// Mutation hook: negates every e_RB (and so e_R) while set. Process-wide.
void set_flip_eRB_sign(bool on);
bool flip_eRB_sign();

}  // namespace testing

}  // namespace geoatt::geometry

#endif  // GEOATT_ERROR_GEOMETRY_HPP_
