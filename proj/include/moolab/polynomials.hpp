#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <vector>

#include "moolab/chebyshev.hpp"
#include "moolab/defs.hpp"
#include "moolab/schedule.hpp"

namespace moolab {

/// Degree-<=t polynomial in the monomial basis, normalized so p(0) = 1.
/// These are the error maps of first-order methods on quadratics.
template <typename Scalar>
struct ResidualPolynomial {
  Vector<Scalar> coeffs;  // c_0..c_t, lowest degree first

  explicit ResidualPolynomial(Vector<Scalar> coeffs_in) : coeffs(std::move(coeffs_in)) {
    require(coeffs.size() >= 1, "ResidualPolynomial: empty coefficient list");
    require(all_finite(coeffs), "ResidualPolynomial: non-finite coefficient");
    require(std::abs(coeffs[0] - Scalar(1)) <= Scalar(1e-10),
            "ResidualPolynomial: constant term must be 1");
  }

  static ResidualPolynomial one() {
    Vector<Scalar> c(1);
    c[0] = Scalar(1);
    return ResidualPolynomial(std::move(c));
  }

  Index degree() const { return coeffs.size() - 1; }

  Scalar operator()(Scalar zeta) const {
    Scalar acc = Scalar(0);
    for (Index k = coeffs.size() - 1; k >= 0; --k) acc = acc * zeta + coeffs[k];
    return acc;
  }
};

/// Expand prod_k (1 - alpha_k zeta) into monomial coefficients.
template <typename Scalar>
ResidualPolynomial<Scalar> residual_from_schedule(const StepSchedule<Scalar>& schedule) {
  require(static_cast<Index>(schedule.size()) <= kMaxDegree,
          "residual_from_schedule: degree cap is 200");
  Vector<Scalar> c = Vector<Scalar>::Zero(schedule.size() + 1);
  c[0] = Scalar(1);
  Index deg = 0;
  for (Scalar a : schedule.alphas) {
    ++deg;
    for (Index k = deg; k >= 1; --k) c[k] -= a * c[k - 1];
  }
  return ResidualPolynomial<Scalar>(std::move(c));
}

template <typename Scalar>
Scalar markov_floor(Scalar L, int t) {
  require(is_finite(L) && L > Scalar(0), "markov_floor: L must be positive");
  require(t >= 0, "markov_floor: degree must be nonnegative");
  const Scalar d = Scalar(t + 1);
  return L / (Scalar(2) * d * d);
}

/// zeta * prod_{k<size} (1 - alpha_k zeta).
template <typename Scalar>
Scalar product_value(const StepSchedule<Scalar>& schedule, Scalar zeta) {
  Scalar p = zeta;
  for (Scalar a : schedule.alphas) p *= (Scalar(1) - a * zeta);
  return p;
}

template <typename Scalar>
struct ProductExtremal {
  Scalar zeta_star;
  Scalar value;
};

/// Maximize zeta * prod(1 - alpha_k zeta) over [0, L] by a 2048-point grid
/// followed by golden-section refinement of the best bracket. The factors
/// are nonnegative on [0, L] under the cap, so no absolute values needed.
template <typename Scalar>
ProductExtremal<Scalar> product_extremal(const StepSchedule<Scalar>& schedule, Scalar L) {
  require(is_finite(L) && L > Scalar(0), "product_extremal: L must be positive");
  for (Scalar a : schedule.alphas)
    require(a >= Scalar(0) && a <= Scalar(1) / L,
            "product_extremal: schedule violates the 1/L cap");

  constexpr int kGrid = 2048;
  const auto phi = [&](Scalar z) { return product_value(schedule, z); };

  Scalar best_zeta = Scalar(0);
  Scalar best_value = Scalar(0);
  int best_i = 0;
  for (int i = 0; i <= kGrid; ++i) {
    const Scalar z = L * Scalar(i) / Scalar(kGrid);
    const Scalar v = phi(z);
    if (v > best_value) {
      best_value = v;
      best_zeta = z;
      best_i = i;
    }
  }

  // Golden-section on the bracket around the best grid point.
  Scalar lo = L * Scalar(std::max(best_i - 1, 0)) / Scalar(kGrid);
  Scalar hi = L * Scalar(std::min(best_i + 1, kGrid)) / Scalar(kGrid);
  const Scalar inv_gold = (std::sqrt(Scalar(5)) - Scalar(1)) / Scalar(2);
  Scalar x1 = hi - inv_gold * (hi - lo);
  Scalar x2 = lo + inv_gold * (hi - lo);
  Scalar f1 = phi(x1);
  Scalar f2 = phi(x2);
  for (int it = 0; it < 120 && hi - lo > Scalar(1e-14) * L; ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_gold * (hi - lo);
      f2 = phi(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_gold * (hi - lo);
      f1 = phi(x1);
    }
  }
  const Scalar mid = (lo + hi) / Scalar(2);
  const Scalar fmid = phi(mid);
  if (fmid > best_value) {
    best_value = fmid;
    best_zeta = mid;
  }
  if (f1 > best_value) {
    best_value = f1;
    best_zeta = x1;
  }
  if (f2 > best_value) {
    best_value = f2;
    best_zeta = x2;
  }

  if (!(best_value > Scalar(0)) && !schedule.alphas.empty())
    throw SolverFailure("product_extremal: failed to bracket a positive maximum");
  if (schedule.alphas.empty()) {
    // Empty product: the objective is zeta itself.
    best_zeta = L;
    best_value = L;
  }
  return {best_zeta, best_value};
}

template <typename Scalar>
struct MinimaxResult {
  Scalar value;
  ResidualPolynomial<Scalar> poly;
  bool degenerate;  // fewer than T+1 distinct nodes: value 0 by interpolation
};

namespace detail {

/// Solve the signed equioscillation system on the reference nodes (ascending,
/// in the rescaled variable u): 1 + sum_k b_k u_j^k = (-1)^j v.
/// Returns false when the linear system is singular.
template <typename Scalar>
bool solve_equioscillation(const std::vector<Scalar>& ref, int T, Vector<Scalar>& b,
                           Scalar& v) {
  const int n = T + 1;
  Matrix<Scalar> K(n, n);
  Vector<Scalar> rhs(n);
  for (int j = 0; j < n; ++j) {
    Scalar u = ref[static_cast<std::size_t>(j)];
    Scalar power = u;
    for (int k = 0; k < T; ++k) {
      K(j, k) = power;
      power *= u;
    }
    K(j, T) = (j % 2 == 0) ? Scalar(-1) : Scalar(1);  // -s_j, s_j = (-1)^j
    rhs[j] = Scalar(-1);
  }
  Eigen::FullPivLU<Matrix<Scalar>> lu(K);
  if (!lu.isInvertible()) return false;
  Vector<Scalar> sol = lu.solve(rhs);
  b = sol.head(T);
  v = sol[T];
  return true;
}

}  // namespace detail

/// Minimize max_j |p(zeta_j)| over polynomials of degree <= T with p(0) = 1,
/// by a single-point exchange iteration on the finite node set. With exactly
/// T+1 distinct nodes the first equioscillation solve is already optimal.
template <typename Scalar>
MinimaxResult<Scalar> minimax_on_nodes(std::vector<Scalar> nodes, int T) {
  require(!nodes.empty(), "minimax_on_nodes: empty node set");
  require(T >= 0, "minimax_on_nodes: degree must be nonnegative");
  require(T <= static_cast<int>(kMaxDegree), "minimax_on_nodes: degree cap is 200");
  for (Scalar z : nodes)
    require(is_finite(z) && z > Scalar(0), "minimax_on_nodes: nodes must be positive");

  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  const int n = static_cast<int>(nodes.size());

  if (T == 0) return {Scalar(1), ResidualPolynomial<Scalar>::one(), false};

  if (n < T + 1) {
    // Interpolation regime: a polynomial vanishing on every node exists.
    Vector<Scalar> c = Vector<Scalar>::Zero(n + 1);
    c[0] = Scalar(1);
    Index deg = 0;
    for (Scalar z : nodes) {
      ++deg;
      for (Index k = deg; k >= 1; --k) c[k] -= c[k - 1] / z;
    }
    Vector<Scalar> padded = Vector<Scalar>::Zero(T + 1);
    padded.head(n + 1) = c;
    return {Scalar(0), ResidualPolynomial<Scalar>(std::move(padded)), true};
  }

  const Scalar scale = nodes.back();
  std::vector<Scalar> u(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) u[i] = nodes[i] / scale;

  // Reference: T+1 nodes spread across the set.
  std::vector<Scalar> ref;
  ref.reserve(T + 1);
  for (int i = 0; i <= T; ++i)
    ref.push_back(u[static_cast<std::size_t>(
        (static_cast<long long>(i) * (n - 1)) / std::max(T, 1))]);

  const auto to_poly = [&](const Vector<Scalar>& b) {
    Vector<Scalar> c(T + 1);
    c[0] = Scalar(1);
    Scalar s = scale;
    for (int k = 1; k <= T; ++k) {
      c[k] = b[k - 1] / s;
      s *= scale;
    }
    return ResidualPolynomial<Scalar>(std::move(c));
  };

  Vector<Scalar> b;
  Scalar v = Scalar(0);
  Scalar prev_level = Scalar(0);
  Scalar best_max = std::numeric_limits<Scalar>::infinity();
  Vector<Scalar> best_b;
  for (int iter = 0; iter < 200; ++iter) {
    if (!detail::solve_equioscillation(ref, T, b, v))
      throw SolverFailure("minimax_on_nodes: equioscillation system singular");

    const auto eval_u = [&](Scalar x) {
      Scalar acc = Scalar(0);
      for (Index k = b.size() - 1; k >= 0; --k) acc = acc * x + b[k];
      return Scalar(1) + acc * x;
    };

    Scalar max_abs = Scalar(0);
    std::size_t worst = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      const Scalar e = std::abs(eval_u(u[i]));
      if (e > max_abs) {
        max_abs = e;
        worst = i;
      }
    }
    if (max_abs < best_max) {
      best_max = max_abs;
      best_b = b;
    }

    // Converged when the discrete max matches the reference level, or the
    // exchange stopped making progress (the level must strictly grow).
    const bool level_stalled =
        iter > 0 && std::abs(v) <= prev_level * (Scalar(1) + Scalar(1e-13));
    prev_level = std::abs(v);
    if (max_abs <= std::abs(v) * (Scalar(1) + Scalar(1e-8)) || level_stalled)
      return {best_max, to_poly(best_b), false};

    // Exchange the worst node into the reference, preserving alternation.
    const Scalar z = u[worst];
    const Scalar ez = eval_u(z);
    const auto sign_at = [&](Scalar x) { return eval_u(x) >= Scalar(0); };
    if (z < ref.front()) {
      if (sign_at(ref.front()) == (ez >= Scalar(0))) {
        ref.front() = z;
      } else {
        ref.insert(ref.begin(), z);
        ref.pop_back();
      }
    } else if (z > ref.back()) {
      if (sign_at(ref.back()) == (ez >= Scalar(0))) {
        ref.back() = z;
      } else {
        ref.push_back(z);
        ref.erase(ref.begin());
      }
    } else {
      std::size_t j = 0;
      while (j + 1 < ref.size() && !(ref[j] <= z && z <= ref[j + 1])) ++j;
      if (sign_at(ref[j]) == (ez >= Scalar(0)))
        ref[j] = z;
      else
        ref[j + 1] = z;
    }
  }
  throw SolverFailure("minimax_on_nodes: exchange did not converge");
}

template <typename Scalar>
struct ResidualFit {
  ResidualPolynomial<Scalar> poly;
  Scalar fit_residual;          // max |p(zeta_i) - eT_i/e0_i| over used nodes
  std::vector<Index> excluded;  // eigenvalues skipped for zero e0 mass
  Index rank;                   // numerical rank of the design matrix
};

/// Fit the degree-<=T polynomial with p(0)=1 mapping e0 to eT at the given
/// eigenvalues, least squares in the monomial basis with the spectral
/// variable rescaled to [0,1]. Double precision limits useful degrees to a
/// few dozen; the residual reports whatever accuracy was actually achieved.
template <typename Scalar>
ResidualFit<Scalar> fit_residual_from_trace(const Vector<Scalar>& eigs,
                                            const Vector<Scalar>& e0,
                                            const Vector<Scalar>& eT, int T) {
  require(eigs.size() >= 1, "fit_residual_from_trace: need at least one eigenvalue");
  require(eigs.size() == e0.size() && eigs.size() == eT.size(),
          "fit_residual_from_trace: size mismatch");
  require(T >= 0 && T <= static_cast<int>(kMaxDegree),
          "fit_residual_from_trace: degree out of range");
  require(all_finite(eigs) && all_finite(e0) && all_finite(eT),
          "fit_residual_from_trace: non-finite input");

  std::vector<Index> keep;
  std::vector<Index> excluded;
  for (Index i = 0; i < eigs.size(); ++i) {
    if (e0[i] == Scalar(0))
      excluded.push_back(i);
    else
      keep.push_back(i);
  }
  require(!keep.empty(), "fit_residual_from_trace: every e0 component is zero");

  const Index nk = static_cast<Index>(keep.size());
  Vector<Scalar> ratio(nk), zeta(nk);
  for (Index i = 0; i < nk; ++i) {
    ratio[i] = eT[keep[static_cast<std::size_t>(i)]] / e0[keep[static_cast<std::size_t>(i)]];
    zeta[i] = eigs[keep[static_cast<std::size_t>(i)]];
  }

  Scalar scale = zeta.cwiseAbs().maxCoeff();
  if (scale == Scalar(0)) scale = Scalar(1);

  Vector<Scalar> coeffs;
  Index rank = 0;
  if (T == 0) {
    coeffs = Vector<Scalar>::Ones(1);
  } else {
    Matrix<Scalar> A(nk, T);
    for (Index i = 0; i < nk; ++i) {
      const Scalar ui = zeta[i] / scale;
      Scalar power = ui;
      for (int k = 0; k < T; ++k) {
        A(i, k) = power;
        power *= ui;
      }
    }
    Vector<Scalar> rhs = ratio.array() - Scalar(1);
    Eigen::BDCSVD<Matrix<Scalar>> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Vector<Scalar> sol = svd.solve(rhs);
    rank = svd.rank();
    coeffs = Vector<Scalar>(T + 1);
    coeffs[0] = Scalar(1);
    Scalar s = scale;
    for (int k = 1; k <= T; ++k) {
      coeffs[k] = sol[k - 1] / s;
      s *= scale;
    }
  }

  ResidualPolynomial<Scalar> poly(std::move(coeffs));
  Scalar residual = Scalar(0);
  for (Index i = 0; i < nk; ++i)
    residual = std::max(residual, std::abs(poly(zeta[i]) - ratio[i]));
  return {std::move(poly), residual, std::move(excluded), rank};
}

}  // namespace moolab
