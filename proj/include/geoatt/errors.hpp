#ifndef GEOATT_ERRORS_HPP_
#define GEOATT_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace geoatt {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A matrix handed to vee() is not skew-symmetric.
class NotSkew : public Error {
 public:
  using Error::Error;
};

/// Input too close to singular for the requested operation.
class Degenerate : public Error {
 public:
  using Error::Error;
};

/// Parameters fall outside the domain where an operation is defined.
class DomainInvalid : public Error {
 public:
  using Error::Error;
};

/// The sensor direction is on or inside a keep-out cone.
class ConstraintViolated : public Error {
 public:
  ConstraintViolated(std::size_t cone_index, double time, const std::string& what)
      : Error(what), cone_index_(cone_index), time_(time) {}

  [[nodiscard]] std::size_t cone_index() const { return cone_index_; }
  /// Simulation time of the violation, NaN outside a simulation.
  [[nodiscard]] double time() const { return time_; }

 private:
  std::size_t cone_index_;
  double time_;
};

/// Malformed or out-of-range configuration input.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// The desired attitude (or a waypoint, or the start) is not strictly feasible.
class InfeasibleGoal : public Error {
 public:
  using Error::Error;
};

}  // namespace geoatt

#endif  // GEOATT_ERRORS_HPP_
