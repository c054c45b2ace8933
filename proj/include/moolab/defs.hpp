#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace moolab {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Index = Eigen::Index;

/// Stationarity predicate everywhere is gap <= tol with this single knob.
inline constexpr double kDefaultTol = 1e-10;

/// Hard limits: instances stay desk-scale, polynomials stay in double range.
inline constexpr Index kMaxDimension = 10000;
inline constexpr Index kMaxDegree = 200;
inline constexpr int kIterationCap = 10000;

/// An iterative solver ran out of budget or hit a degenerate system it
/// cannot certify. Never swallowed: callers either handle or crash loudly.
class SolverFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw std::invalid_argument(message);
}

template <typename Scalar>
bool is_finite(Scalar x) {
  return std::isfinite(static_cast<double>(x));
}

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
  return m.allFinite();
}

}  // namespace moolab
