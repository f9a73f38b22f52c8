#include "geoatt/so3.hpp"

#include <algorithm>
#include <cmath>

#include "geoatt/errors.hpp"

namespace geoatt::so3 {

Rotation::Rotation(const Mat3& m, double orth_tol) : m_(m) {
  if (!m.allFinite()) {
    throw DomainInvalid("rotation has non-finite entries");
  }
  const double orth = orthogonality_error();
  const double det = m.determinant();
  if (orth > orth_tol || std::abs(det - 1.0) > orth_tol) {
    throw DomainInvalid("matrix is not a rotation (||R^T R - I||_F = " +
                        std::to_string(orth) +
                        ", det = " + std::to_string(det) + ")");
  }
}

double Rotation::orthogonality_error() const {
  return (m_.transpose() * m_ - Mat3::Identity()).norm();
}

UnitVec3::UnitVec3(const Vec3& v) : v_(v) {
  if (!v.allFinite() || std::abs(v.norm() - 1.0) > 1e-12) {
    throw DomainInvalid("vector is not unit length");
  }
}

UnitVec3 UnitVec3::normalized(const Vec3& v) {
  const double n = v.norm();
  if (!std::isfinite(n) || n < 1e-12) {
    throw Degenerate("cannot normalize a zero vector");
  }
  return UnitVec3(v / n, Trusted{});
}

Mat3 hat(const Vec3& x) {
  Mat3 m;
  m << 0.0, -x.z(), x.y(),
       x.z(), 0.0, -x.x(),
       -x.y(), x.x(), 0.0;
  return m;
}

Vec3 vee(const Mat3& m, double tol) {
  const Mat3 sym = 0.5 * (m + m.transpose());
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if (sym.cwiseAbs().maxCoeff() > tol * scale) {
    throw NotSkew("vee: matrix is not skew-symmetric");
  }
  const Mat3 skew = 0.5 * (m - m.transpose());
  return {skew(2, 1), skew(0, 2), skew(1, 0)};
}

Rotation exp_so3(const Vec3& x) {
  const double angle = x.norm();
  const Mat3 k = hat(x);
  double a;  // sin(t)/t
  double b;  // (1 - cos(t))/t^2
  if (angle < 1e-6) {
    const double t2 = angle * angle;
    a = 1.0 - t2 / 6.0;
    b = 0.5 - t2 / 24.0;
  } else {
    a = std::sin(angle) / angle;
    b = (1.0 - std::cos(angle)) / (angle * angle);
  }
  return Rotation::unchecked(Mat3::Identity() + a * k + b * k * k);
}

Vec3 log_so3(const Rotation& r) {
  const Mat3& m = r.matrix();
  const double cos_angle = std::clamp(0.5 * (m.trace() - 1.0), -1.0, 1.0);
  const double angle = std::acos(cos_angle);
  const Vec3 skew{m(2, 1) - m(1, 2), m(0, 2) - m(2, 0), m(1, 0) - m(0, 1)};
  if (angle < 1e-6) {
    return 0.5 * skew;
  }
  if (M_PI - angle > 1e-4) {
    return angle / (2.0 * std::sin(angle)) * skew;
  }
  // Near pi the skew part vanishes; recover the axis from R + I = 2 a a^T
  // (approximately) using its largest column.
  const Mat3 s = 0.5 * (m + Mat3::Identity());
  Eigen::Index col = 0;
  s.diagonal().maxCoeff(&col);
  Vec3 axis = s.col(col) / std::sqrt(std::max(s(col, col), 1e-300));
  axis.normalize();
  if (axis.dot(skew) < 0.0) {
    axis = -axis;
  }
  return angle * axis;
}

Mat3 right_jacobian_inv(const Vec3& theta) {
  const double angle = theta.norm();
  const Mat3 k = hat(theta);
  double c;
  if (angle < 1e-4) {
    c = 1.0 / 12.0 + angle * angle / 720.0;
  } else {
    c = 1.0 / (angle * angle) -
        (1.0 + std::cos(angle)) / (2.0 * angle * std::sin(angle));
  }
  return Mat3::Identity() + 0.5 * k + c * k * k;
}

Rotation project_so3(const Mat3& m) {
  if (!m.allFinite()) {
    throw Degenerate("project_so3: non-finite input");
  }
  if (m.determinant() <= 0.0) {
    throw Degenerate("project_so3: determinant is not positive");
  }
  // m = R P with P = (m^T m)^{1/2}; R = m P^{-1}.
  Eigen::SelfAdjointEigenSolver<Mat3> eig(m.transpose() * m);
  const Vec3 lambda = eig.eigenvalues();
  if (lambda.minCoeff() <= 1e-24 * std::max(1.0, lambda.maxCoeff())) {
    throw Degenerate("project_so3: matrix is close to rank deficient");
  }
  const Mat3 v = eig.eigenvectors();
  const Vec3 inv_sqrt = lambda.cwiseSqrt().cwiseInverse();
  const Mat3 p_inv = v * inv_sqrt.asDiagonal() * v.transpose();
  return Rotation::unchecked(m * p_inv);
}

namespace {

double rel(const Mat3& residual, double scale) {
  return residual.norm() / std::max(scale, 1e-300);
}

double rel(const Vec3& residual, double scale) {
  return residual.norm() / std::max(scale, 1e-300);
}

}  // namespace

IdentityReport check_identities(const Vec3& x, const Vec3& y, const Vec3& z,
                                const Mat3& a, const Rotation& r,
                                double rel_tol) {
  IdentityReport report;
  auto record = [&](const char* name, double residual) {
    report.max_residual = std::max(report.max_residual, residual);
    if (!(residual <= rel_tol)) {
      report.failures.push_back({name, residual});
    }
  };
  const double nx = x.norm();
  const double ny = y.norm();
  const double nz = z.norm();
  const double na = a.norm();
  const Mat3 xh = hat(x);
  const Mat3 yh = hat(y);
  const Mat3 zh = hat(z);

  record("hat(x) y = -hat(y) x", rel(Vec3(xh * y + yh * x), nx * ny));
  record("x . hat(y) z = y . hat(z) x",
         std::abs(x.dot(yh * z) - y.dot(zh * x)) /
             std::max(nx * ny * nz, 1e-300));
  record("hat(x cross y) = hat(x) hat(y) - hat(y) hat(x)",
         rel(Mat3(hat(x.cross(y)) - (xh * yh - yh * xh)), nx * ny));

  const Mat3 anti = a - a.transpose();
  const Vec3 anti_vee{anti(2, 1), anti(0, 2), anti(1, 0)};
  record("tr[A hat(x)] = -x^T vee(A - A^T)",
         std::abs((a * xh).trace() + x.dot(anti_vee)) /
             std::max(na * nx, 1e-300));
  record("hat(x) A + A^T hat(x) = hat((tr[A] I - A) x)",
         rel(Mat3(xh * a + a.transpose() * xh -
                  hat((a.trace() * Mat3::Identity() - a) * x)),
             na * nx));
  const Mat3& rm = r.matrix();
  record("R hat(x) R^T = hat(R x)",
         rel(Mat3(rm * xh * rm.transpose() - hat(rm * x)), nx));
  return report;
}

}  // namespace geoatt::so3
