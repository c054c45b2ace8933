#pragma once

#include <cmath>

#include "moolab/defs.hpp"

namespace moolab {

/// Chebyshev polynomial of the first kind via the three-term recurrence.
/// Exact arithmetic graph; O(t) and stable for |x| <= 1, grows fast outside.
template <typename Scalar>
Scalar chebyshev_T_recurrence(int t, Scalar x) {
  require(t >= 0, "chebyshev_T: degree must be nonnegative");
  if (t == 0) return Scalar(1);
  Scalar prev = Scalar(1);
  Scalar cur = x;
  for (int k = 2; k <= t; ++k) {
    Scalar next = Scalar(2) * x * cur - prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

/// Closed-form evaluation: cos(t acos x) on [-1,1], and
/// (w^t + w^-t)/2 with w = |x| + sqrt(x^2-1) outside, sign-corrected.
template <typename Scalar>
Scalar chebyshev_T_closed_form(int t, Scalar x) {
  require(t >= 0, "chebyshev_T: degree must be nonnegative");
  if (t == 0) return Scalar(1);
  const Scalar ax = std::abs(x);
  Scalar value;
  if (ax <= Scalar(1)) {
    value = std::cos(Scalar(t) * std::acos(ax));
  } else {
    const Scalar w = ax + std::sqrt(ax * ax - Scalar(1));
    value = (std::pow(w, Scalar(t)) + std::pow(w, Scalar(-t))) / Scalar(2);
  }
  const bool negate = (x < Scalar(0)) && (t % 2 == 1);
  return negate ? -value : value;
}

template <typename Scalar>
Scalar chebyshev_T(int t, Scalar x) {
  return chebyshev_T_closed_form(t, x);
}

/// min over degree-<=T polynomials with p(0)=1 of max |p| on [mu,L],
/// expressed through kappa = L/mu: 2 / (rho^T + rho^-T).
template <typename Scalar>
Scalar strong_convex_extremal_value(Scalar kappa, int T) {
  require(is_finite(kappa) && kappa > Scalar(1),
          "strong_convex_extremal_value: kappa must exceed 1");
  require(T >= 0, "strong_convex_extremal_value: T must be nonnegative");
  if (T == 0) return Scalar(1);
  const Scalar sq = std::sqrt(kappa);
  const Scalar rho = (sq + Scalar(1)) / (sq - Scalar(1));
  const Scalar value =
      Scalar(2) / (std::pow(rho, Scalar(T)) + std::pow(rho, Scalar(-T)));
  // 2/(a + 1/a) >= 1/a for a >= 1, so the value dominates rho^-T.
  const Scalar linear_rate = std::pow(Scalar(1) / rho, Scalar(T));
  if (value < linear_rate * (Scalar(1) - Scalar(1e-12)))
    throw std::logic_error("strong_convex_extremal_value: rate chain broken");
  return value;
}

/// The affine frame sending [mu,L] to [-1,1]; the normalization point
/// zeta = 0 lands at xi0 with |xi0| > 1, and rho drives the linear rate.
template <typename Scalar>
struct ChebyshevFrame {
  Scalar mu;
  Scalar L;
  Scalar kappa;
  Scalar xi0;
  Scalar rho;

  ChebyshevFrame(Scalar mu_in, Scalar L_in) : mu(mu_in), L(L_in) {
    require(is_finite(mu) && is_finite(L) && L > mu && mu > Scalar(0),
            "ChebyshevFrame: need L > mu > 0");
    kappa = L / mu;
    xi0 = -(L + mu) / (L - mu);
    const Scalar a = std::abs(xi0);
    rho = a + std::sqrt(a * a - Scalar(1));
  }

  Scalar xi(Scalar zeta) const { return (Scalar(2) * zeta - (L + mu)) / (L - mu); }

  /// T_t(xi(zeta)) / T_t(xi0): the optimal residual on [mu,L] at zeta.
  Scalar residual_value(int t, Scalar zeta) const {
    return chebyshev_T(t, xi(zeta)) / chebyshev_T(t, xi0);
  }
};

}  // namespace moolab
