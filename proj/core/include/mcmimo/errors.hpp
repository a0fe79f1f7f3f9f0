#pragma once

#include <stdexcept>
#include <string>

namespace mcmimo {

/// Invalid scenario or solver configuration (bad dimensions, out-of-range values).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// QoS target cannot be transformed into a finite minimum-rate requirement.
class InfeasibleQosError : public std::runtime_error {
 public:
  InfeasibleQosError(const std::string& what, int user, double lambert_arg)
      : std::runtime_error(what), user(user), lambert_arg(lambert_arg) {}
  int user;
  double lambert_arg;
};

/// Numerical breakdown in a linear-algebra kernel (singular factor, NaN).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// The iterative solver diverged or lost its bisection bracket.
class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mcmimo
