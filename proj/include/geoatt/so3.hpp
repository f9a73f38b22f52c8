#ifndef GEOATT_SO3_HPP_
#define GEOATT_SO3_HPP_

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace geoatt {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

namespace so3 {

inline constexpr double kDefaultOrthTol = 1e-9;

/// Attitude matrix, guaranteed to lie on SO(3) within a tolerance.
class Rotation {
 public:
  Rotation() : m_(Mat3::Identity()) {}

  /// Validates orthogonality and unit determinant; throws DomainInvalid.
  explicit Rotation(const Mat3& m, double orth_tol = kDefaultOrthTol);

  /// Skips validation. Only for matrices that are rotations by construction.
  static Rotation unchecked(const Mat3& m) {
    Rotation r;
    r.m_ = m;
    return r;
  }

  static Rotation identity() { return Rotation{}; }

  [[nodiscard]] const Mat3& matrix() const { return m_; }
  [[nodiscard]] Rotation transpose() const { return unchecked(m_.transpose()); }
  [[nodiscard]] Vec3 operator*(const Vec3& x) const { return m_ * x; }
  [[nodiscard]] Rotation operator*(const Rotation& other) const {
    return unchecked(m_ * other.m_);
  }

  /// ||R^T R - I||_F
  [[nodiscard]] double orthogonality_error() const;

 private:
  Mat3 m_;
};

/// Vector of unit length (|norm - 1| <= 1e-12).
class UnitVec3 {
 public:
  /// Rejects vectors that are not unit length.
  explicit UnitVec3(const Vec3& v);

  /// Rescales a nonzero vector to unit length.
  static UnitVec3 normalized(const Vec3& v);

  [[nodiscard]] const Vec3& vec() const { return v_; }
  operator const Vec3&() const { return v_; }  // NOLINT(google-explicit-constructor)

 private:
  struct Trusted {};
  UnitVec3(const Vec3& v, Trusted) : v_(v) {}
  Vec3 v_;
};

Mat3 hat(const Vec3& x);

/// Inverse of hat(). Antisymmetrizes first; throws NotSkew when the symmetric
/// part exceeds tol.
Vec3 vee(const Mat3& m, double tol = 1e-9);

/// Rodrigues' formula, with a series expansion below angle 1e-6.
Rotation exp_so3(const Vec3& x);

/// Inverse of exp_so3 for angles in [0, pi].
Vec3 log_so3(const Rotation& r);

/// Inverse of the right Jacobian of exp_so3: if R(t) = R0 exp(theta(t)),
/// then theta' = right_jacobian_inv(theta) * Omega.
Mat3 right_jacobian_inv(const Vec3& theta);

/// Orthogonal polar factor of m, the nearest rotation in Frobenius norm.
/// Throws Degenerate if det(m) <= 0 or m is close to rank deficient.
Rotation project_so3(const Mat3& m);

struct IdentityFailure {
  std::string name;
  double residual;
};

struct IdentityReport {
  std::vector<IdentityFailure> failures;
  double max_residual = 0.0;
  [[nodiscard]] bool ok() const { return failures.empty(); }
};

/// Evaluates the hat-map identities on the given arguments. Residuals are
/// relative to the magnitude of the terms involved.
IdentityReport check_identities(const Vec3& x, const Vec3& y, const Vec3& z,
                                const Mat3& a, const Rotation& r,
                                double rel_tol = 1e-12);

}  // namespace so3
}  // namespace geoatt

#endif  // GEOATT_SO3_HPP_
