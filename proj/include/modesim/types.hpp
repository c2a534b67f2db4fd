#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace modesim {

using Scalar = double;
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
using IntVector = Eigen::Matrix<long, Eigen::Dynamic, 1>;

// <.> : nearest integer, ties away from zero.
inline long nearest_int(Scalar v) { return std::lround(v); }

struct Interval {
  Scalar lo = 0.0;
  Scalar hi = 0.0;
  bool contains(Scalar v) const { return v >= lo && v <= hi; }
  Scalar length() const { return hi - lo; }
};

// Bad scenario/config input. CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Rejected network change (violates an admissibility rule).
struct AdmissibilityError : ConfigError {
  explicit AdmissibilityError(const std::string& msg) : ConfigError(msg) {}
};

// Integrator refuses to run (e.g. step size over the chatter budget).
// CLI maps this to exit code 3.
struct NumericalRefusal : std::runtime_error {
  explicit NumericalRefusal(const std::string& msg) : std::runtime_error(msg) {}
};

using Rng = std::mt19937_64;

// Hand-rolled draws so results do not depend on the stdlib's
// distribution implementations.
inline Scalar uniform_real(Rng& rng, Scalar lo, Scalar hi) {
  const Scalar u = static_cast<Scalar>(rng() >> 11) * 0x1.0p-53;
  return lo + u * (hi - lo);
}

inline long uniform_int(Rng& rng, long lo, long hi) {
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  return lo + static_cast<long>(rng() % span);
}

}  // namespace modesim
