#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <vector>

#include "moolab/defs.hpp"

namespace moolab {

/// Nonnegative weights summing to one.
template <typename Scalar>
struct SimplexWeights {
  Vector<Scalar> lambda;

  explicit SimplexWeights(Vector<Scalar> lambda_in) : lambda(std::move(lambda_in)) {
    require(lambda.size() >= 1, "SimplexWeights: empty");
    require(all_finite(lambda), "SimplexWeights: non-finite entry");
    require(lambda.minCoeff() >= Scalar(0), "SimplexWeights: negative entry");
    require(std::abs(lambda.sum() - Scalar(1)) <= Scalar(1e-12),
            "SimplexWeights: entries must sum to 1");
  }

  static SimplexWeights uniform(Index m) {
    return SimplexWeights(Vector<Scalar>::Constant(m, Scalar(1) / Scalar(m)));
  }

  static SimplexWeights unit(Index m, Index i) {
    Vector<Scalar> l = Vector<Scalar>::Zero(m);
    l[i] = Scalar(1);
    return SimplexWeights(std::move(l));
  }

  Index size() const { return lambda.size(); }
};

/// Output of the min-norm-point computation: the gap, the optimal weights,
/// the witness point d = sum lambda_i g_i, and (when the gap clears tol) the
/// unit direction along which every input has strictly negative slope.
template <typename Scalar>
struct GapCertificate {
  Scalar gap;
  SimplexWeights<Scalar> weights;
  Vector<Scalar> min_point;
  std::optional<Vector<Scalar>> descent_dir;
};

namespace detail {

/// min |G w| subject to sum w = 1 with free signs, over the columns in
/// `active`. Solved through the KKT system; returns false when singular
/// (affinely dependent active set).
template <typename Scalar>
bool affine_min_norm(const Matrix<Scalar>& G, const std::vector<Index>& active,
                     Vector<Scalar>& w) {
  const Index k = static_cast<Index>(active.size());
  Matrix<Scalar> K = Matrix<Scalar>::Zero(k + 1, k + 1);
  for (Index a = 0; a < k; ++a)
    for (Index b = 0; b <= a; ++b) {
      const Scalar dot = G.col(active[static_cast<std::size_t>(a)])
                             .dot(G.col(active[static_cast<std::size_t>(b)]));
      K(a, b) = dot;
      K(b, a) = dot;
    }
  K.row(k).head(k).setOnes();
  K.col(k).head(k).setOnes();
  Vector<Scalar> rhs = Vector<Scalar>::Zero(k + 1);
  rhs[k] = Scalar(1);
  Eigen::FullPivLU<Matrix<Scalar>> lu(K);
  if (!lu.isInvertible()) return false;
  Vector<Scalar> sol = lu.solve(rhs);
  if (!all_finite(sol)) return false;
  w = sol.head(k);
  return true;
}

/// Frank-Wolfe with exact line search on min |G lambda|^2 over the simplex.
/// Slow but safe on affinely dependent inputs; used when the active-set
/// linear algebra degenerates.
template <typename Scalar>
GapCertificate<Scalar> frank_wolfe_min_norm(const Matrix<Scalar>& G, Scalar tol) {
  const Index m = G.cols();
  Index start = 0;
  Scalar best = G.col(0).squaredNorm();
  for (Index i = 1; i < m; ++i) {
    const Scalar n2 = G.col(i).squaredNorm();
    if (n2 < best) {
      best = n2;
      start = i;
    }
  }
  Vector<Scalar> lambda = Vector<Scalar>::Zero(m);
  lambda[start] = Scalar(1);
  Vector<Scalar> x = G.col(start);

  for (int it = 0; it < kIterationCap; ++it) {
    Index j = 0;
    Scalar min_dot = x.dot(G.col(0));
    for (Index i = 1; i < m; ++i) {
      const Scalar d = x.dot(G.col(i));
      if (d < min_dot) {
        min_dot = d;
        j = i;
      }
    }
    if (min_dot >= x.squaredNorm() - tol) {
      const Scalar gap = x.norm();
      std::optional<Vector<Scalar>> dir;
      if (gap > tol) dir = (-x / gap).eval();
      return {gap, SimplexWeights<Scalar>(std::move(lambda)), std::move(x),
              std::move(dir)};
    }
    const Vector<Scalar> diff = x - G.col(j);
    const Scalar denom = diff.squaredNorm();
    if (denom <= Scalar(0)) break;  // no progress possible
    Scalar gamma = x.dot(diff) / denom;
    gamma = std::min(Scalar(1), std::max(Scalar(0), gamma));
    x -= gamma * diff;
    lambda *= (Scalar(1) - gamma);
    lambda[j] += gamma;
  }
  throw SolverFailure("min_norm_point: Frank-Wolfe fallback did not converge");
}

}  // namespace detail

/// Minimize |sum lambda_i g_i| over the simplex: Wolfe's active-set
/// min-norm-point iteration with a Frank-Wolfe fallback when the affine
/// solve is singular. Ties in the linear-minimization step go to the lowest
/// index, which makes the reported optimum deterministic.
template <typename Scalar>
GapCertificate<Scalar> min_norm_point(const Matrix<Scalar>& gradients,
                                      Scalar tol = Scalar(kDefaultTol)) {
  const Index m = gradients.cols();
  require(m >= 1, "min_norm_point: need at least one gradient");
  require(gradients.rows() >= 1, "min_norm_point: empty vectors");
  require(all_finite(gradients), "min_norm_point: non-finite gradient");
  require(is_finite(tol) && tol > Scalar(0), "min_norm_point: tol must be positive");

  // Start from the lowest-index minimum-norm vertex; a zero gradient then
  // terminates immediately with unit weight on it.
  Index start = 0;
  Scalar best = gradients.col(0).squaredNorm();
  for (Index i = 1; i < m; ++i) {
    const Scalar n2 = gradients.col(i).squaredNorm();
    if (n2 < best) {
      best = n2;
      start = i;
    }
  }

  std::vector<Index> active{start};
  Vector<Scalar> w = Vector<Scalar>::Ones(1);
  Vector<Scalar> x = gradients.col(start);

  const auto make_certificate = [&]() {
    Vector<Scalar> lambda = Vector<Scalar>::Zero(m);
    for (std::size_t a = 0; a < active.size(); ++a)
      lambda[active[a]] = std::max(w[static_cast<Index>(a)], Scalar(0));
    lambda /= lambda.sum();
    const Scalar gap = x.norm();
    std::optional<Vector<Scalar>> dir;
    if (gap > tol) dir = (-x / gap).eval();
    return GapCertificate<Scalar>{gap, SimplexWeights<Scalar>(std::move(lambda)),
                                  x, std::move(dir)};
  };

  for (int it = 0; it < kIterationCap; ++it) {
    // Linear minimization over the vertices.
    Index j = 0;
    Scalar min_dot = x.dot(gradients.col(0));
    for (Index i = 1; i < m; ++i) {
      const Scalar d = x.dot(gradients.col(i));
      if (d < min_dot) {
        min_dot = d;
        j = i;
      }
    }
    if (min_dot >= x.squaredNorm() - tol) return make_certificate();
    bool already_active = false;
    for (Index a : active) already_active |= (a == j);
    if (already_active) return make_certificate();  // roundoff plateau

    active.push_back(j);
    Vector<Scalar> w_ext(active.size());
    w_ext.head(w.size()) = w;
    w_ext[static_cast<Index>(active.size()) - 1] = Scalar(0);
    w = std::move(w_ext);

    // Minor cycle: pull the affine minimizer back into the simplex.
    for (int minor = 0; minor < kIterationCap; ++minor) {
      Vector<Scalar> v;
      if (!detail::affine_min_norm(gradients, active, v))
        return detail::frank_wolfe_min_norm(gradients, tol);
      if (v.minCoeff() > Scalar(1e-12)) {
        w = v;
        x = Vector<Scalar>::Zero(gradients.rows());
        for (std::size_t a = 0; a < active.size(); ++a)
          x += w[static_cast<Index>(a)] * gradients.col(active[a]);
        break;
      }
      Scalar theta = Scalar(1);
      for (Index a = 0; a < v.size(); ++a)
        if (v[a] <= Scalar(1e-12) && w[a] > v[a])
          theta = std::min(theta, w[a] / (w[a] - v[a]));
      w = (Scalar(1) - theta) * w + theta * v;
      // Drop vanished vertices (keep at least one).
      std::vector<Index> next_active;
      std::vector<Scalar> next_w;
      for (std::size_t a = 0; a < active.size(); ++a) {
        if (w[static_cast<Index>(a)] > Scalar(1e-12)) {
          next_active.push_back(active[a]);
          next_w.push_back(w[static_cast<Index>(a)]);
        }
      }
      if (next_active.empty()) {
        next_active.push_back(active.front());
        next_w.push_back(Scalar(1));
      }
      active = std::move(next_active);
      w = Eigen::Map<Vector<Scalar>>(next_w.data(), static_cast<Index>(next_w.size()));
      x = Vector<Scalar>::Zero(gradients.rows());
      for (std::size_t a = 0; a < active.size(); ++a)
        x += w[static_cast<Index>(a)] * gradients.col(active[a]);
    }
  }
  throw SolverFailure("min_norm_point: iteration cap exceeded");
}

template <typename Scalar>
GapCertificate<Scalar> min_norm_point(const std::vector<Vector<Scalar>>& gradients,
                                      Scalar tol = Scalar(kDefaultTol)) {
  require(!gradients.empty(), "min_norm_point: need at least one gradient");
  const Index d = gradients.front().size();
  for (const auto& g : gradients)
    require(g.size() == d, "min_norm_point: dimension mismatch");
  Matrix<Scalar> G(d, static_cast<Index>(gradients.size()));
  for (std::size_t i = 0; i < gradients.size(); ++i)
    G.col(static_cast<Index>(i)) = gradients[i];
  return min_norm_point(G, tol);
}

/// The executable alternative: either the gap is within tol of zero, or
/// there is a unit vector with strictly negative slope for every input.
template <typename Scalar>
std::optional<Vector<Scalar>> common_descent_direction(
    const Matrix<Scalar>& gradients, Scalar tol = Scalar(kDefaultTol)) {
  return min_norm_point(gradients, tol).descent_dir;
}

/// Euclidean distance from a point to the convex hull of the anchors,
/// via the min-norm point of the translated anchor set.
template <typename Scalar>
Scalar dist_to_hull(const Vector<Scalar>& point, const Matrix<Scalar>& anchors,
                    Scalar tol = Scalar(kDefaultTol)) {
  require(anchors.cols() >= 1, "dist_to_hull: empty anchor set");
  require(anchors.rows() == point.size(), "dist_to_hull: dimension mismatch");
  Matrix<Scalar> shifted = anchors.colwise() - point;
  return min_norm_point(shifted, tol).gap;
}

}  // namespace moolab
