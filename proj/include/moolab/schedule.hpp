#pragma once

#include <vector>

#include "moolab/defs.hpp"

namespace moolab {

/// Pre-scheduled step sizes with the safe cap 1/L. The schedule is fixed
/// before any oracle call is made.
template <typename Scalar>
struct StepSchedule {
  std::vector<Scalar> alphas;
  Scalar cap;  // 1/L

  StepSchedule(std::vector<Scalar> alphas_in, Scalar cap_in)
      : alphas(std::move(alphas_in)), cap(cap_in) {
    require(is_finite(cap) && cap > Scalar(0), "StepSchedule: cap must be positive");
    for (Scalar a : alphas)
      require(is_finite(a) && a >= Scalar(0) && a <= cap,
              "StepSchedule: steps must lie in [0, cap]");
  }

  static StepSchedule constant(Scalar alpha, std::size_t n, Scalar cap) {
    return StepSchedule(std::vector<Scalar>(n, alpha), cap);
  }

  /// The canonical capped schedule alpha_k = 1/L.
  static StepSchedule constant_for(Scalar L, std::size_t n) {
    require(is_finite(L) && L > Scalar(0), "StepSchedule: L must be positive");
    return constant(Scalar(1) / L, n, Scalar(1) / L);
  }

  std::size_t size() const { return alphas.size(); }

  Scalar partial_sum(std::size_t t) const {
    Scalar s = Scalar(0);
    for (std::size_t k = 0; k < t && k < alphas.size(); ++k) s += alphas[k];
    return s;
  }
};

}  // namespace moolab
