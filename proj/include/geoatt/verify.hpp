#ifndef GEOATT_VERIFY_HPP_
#define GEOATT_VERIFY_HPP_

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "geoatt/error_geometry.hpp"

namespace geoatt::verify {

using so3::Rotation;

struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;      // worst observed metric
  double threshold = 0.0;
  std::size_t samples = 0;
  std::size_t failures = 0;
  std::string detail;
};

bool all_passed(const std::vector<CheckResult>& results);

/// Haar-uniform rotation.
Rotation random_rotation(std::mt19937_64& rng);
/// Uniform on the unit sphere.
Vec3 random_unit(std::mt19937_64& rng);
/// Haar sampling restricted to strictly feasible attitudes.
Rotation random_feasible(std::mt19937_64& rng, const geometry::ErrorModel& model);

/// hat/vee/exp/log/projection identities at random arguments.
CheckResult identity_suite(std::uint64_t seed, std::size_t samples);

struct GradientOptions {
  std::size_t samples = 100;
  double eps = 1e-6;
  double tol = 1e-4;
};

/// Central difference of Psi along R exp(eps eta) against eta . e_R, unit eta.
/// Relative error |fd - an| / max(|an|, 1e-8).
CheckResult gradient_psi(const geometry::ErrorModel& model, const Rotation& rd,
                         std::uint64_t seed, const GradientOptions& opt);
/// d/dt e_RA along R exp(t Omega) against E Omega (vector relative error).
CheckResult rate_eRA(const geometry::ErrorModel& model, const Rotation& rd,
                     std::uint64_t seed, const GradientOptions& opt);
/// d/dt e_RB_i along R exp(t Omega) against F_i Omega, every cone.
CheckResult rate_eRB(const geometry::ErrorModel& model, std::uint64_t seed,
                     const GradientOptions& opt);

struct BoundOptions {
  std::size_t samples = 100000;
  geometry::BoundConstants constants = geometry::BoundConstants::kMinBased;
  /// Compare |e_RB| and |F| with eRB_sup and normF_sup instead of the
  /// printed eRB_bound and normF_bound.
  bool sound_bounds = false;
};

/// |e_RA|^2 <= A / b1 + 1e-12 over Haar samples (independent of the cones).
CheckResult bound_eRA(const geometry::ErrorModel& model, const Rotation& rd,
                      std::uint64_t seed, const BoundOptions& opt);
/// |E|_2 <= tr[G] / sqrt(2).
CheckResult bound_E(const geometry::ErrorModel& model, const Rotation& rd,
                    std::uint64_t seed, const BoundOptions& opt);
/// |e_RB_i| bound on samples with r^T R^T v_i <= beta_i (default caps).
CheckResult bound_eRB(const geometry::ErrorModel& model, std::uint64_t seed,
                      const BoundOptions& opt);
/// |F_i|_2 <= normF_bound (or normF_sup) on the same samples.
CheckResult bound_F(const geometry::ErrorModel& model, std::uint64_t seed,
                    const BoundOptions& opt);

/// Eigenvalues of the analytic Hessian positive, and the central second
/// difference of Psi at Rd within 10% of eta^T H eta for random unit eta.
CheckResult hessian_check(const geometry::ErrorModel& model, const Rotation& rd,
                          std::uint64_t seed, std::size_t samples, double eps = 1e-4);

/// Convergence order of rk4_project on steady spin about a principal axis,
/// from the endpoint error at halving steps. Passes when |order - 4| <= 0.3.
CheckResult integrator_order(double duration = 1.0);

/// Orthogonality drift |R^T R - I|_F of lie_rk4 after `steps` torque-free steps.
CheckResult integrator_drift(std::size_t steps = 100000, double dt = 1e-3);

/// Ratio of the largest Euler-rate magnitude with theta2 in [0.1, 0.5] deg to
/// that in [1, 5] deg; passes at >= 10.
CheckResult euler_rate_scaling();

struct SuiteOptions {
  std::uint64_t seed = 42;
  std::size_t samples = 100;  // gradient draws; bound draws are 1000x this
};

/// Everything `geoatt verify` runs. Bound checks use the constants and
/// suprema under which every inequality actually holds.
std::vector<CheckResult> run_all(const SuiteOptions& opt);

}  // namespace geoatt::verify

#endif  // GEOATT_VERIFY_HPP_
