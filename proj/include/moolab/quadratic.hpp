#pragma once

#include <algorithm>
#include <cmath>

#include "moolab/defs.hpp"
#include "moolab/polynomials.hpp"
#include "moolab/schedule.hpp"

namespace moolab {

/// A quadratic 0.5 x^T H x written in the eigenbasis of H: an eigenvalue
/// list and the initial-error coordinates. The minimizer is pinned at the
/// origin, so the gradient at x is componentwise eigs_i * x_i and the
/// initialization radius R is |e0|. Immutable after construction.
template <typename Scalar>
class SpectralQuadratic {
 public:
  SpectralQuadratic(Vector<Scalar> eigs, Vector<Scalar> e0, Scalar mu_bound,
                    Scalar L_bound)
      : eigs_(std::move(eigs)), e0_(std::move(e0)), mu_(mu_bound), L_(L_bound) {
    require(eigs_.size() >= 1, "SpectralQuadratic: empty spectrum");
    require(eigs_.size() <= kMaxDimension, "SpectralQuadratic: dimension cap is 1e4");
    require(eigs_.size() == e0_.size(), "SpectralQuadratic: eigs/e0 size mismatch");
    require(all_finite(eigs_) && all_finite(e0_), "SpectralQuadratic: non-finite input");
    require(is_finite(mu_) && is_finite(L_), "SpectralQuadratic: non-finite bounds");
    require(mu_ >= Scalar(0) && L_ > Scalar(0) && mu_ <= L_,
            "SpectralQuadratic: need 0 <= mu <= L, L > 0");
    require(eigs_.minCoeff() >= mu_ && eigs_.maxCoeff() <= L_,
            "SpectralQuadratic: spectrum escapes [mu, L]");
  }

  const Vector<Scalar>& eigs() const { return eigs_; }
  const Vector<Scalar>& e0() const { return e0_; }
  Scalar mu_bound() const { return mu_; }
  Scalar L_bound() const { return L_; }
  Index dim() const { return eigs_.size(); }

  /// dist(x0, minimizer) = |e0|.
  Scalar radius() const { return e0_.norm(); }

  Scalar value(const Vector<Scalar>& x) const {
    require(x.size() == dim(), "SpectralQuadratic: dimension mismatch");
    return Scalar(0.5) * (eigs_.array() * x.array().square()).sum();
  }

  Vector<Scalar> gradient(const Vector<Scalar>& x) const {
    require(x.size() == dim(), "SpectralQuadratic: dimension mismatch");
    return (eigs_.array() * x.array()).matrix();
  }

  Scalar min_value() const { return Scalar(0); }

 private:
  Vector<Scalar> eigs_;
  Vector<Scalar> e0_;
  Scalar mu_;
  Scalar L_;
};

/// Hard strongly convex instance: the T+1 alternation nodes of the optimal
/// degree-T residual on [mu, L], with equal initial-error mass R/sqrt(T+1)
/// on every node. Endpoint nodes are mu and L exactly.
template <typename Scalar>
SpectralQuadratic<Scalar> make_strongly_convex_hard(Scalar L, Scalar mu, int T,
                                                    Scalar R) {
  require(is_finite(L) && is_finite(mu) && is_finite(static_cast<Scalar>(R)),
          "make_strongly_convex_hard: non-finite input");
  require(mu > Scalar(0), "make_strongly_convex_hard: mu must be positive");
  require(L >= mu, "make_strongly_convex_hard: need L >= mu");
  require(T >= 1, "make_strongly_convex_hard: need T >= 1");
  require(R > Scalar(0), "make_strongly_convex_hard: R must be positive");
  require(T + 1 <= kMaxDimension, "make_strongly_convex_hard: dimension cap");

  const Scalar mid = (L + mu) / Scalar(2);
  const Scalar half = (L - mu) / Scalar(2);
  Vector<Scalar> eigs(T + 1);
  eigs[0] = mu;
  eigs[T] = L;
  for (int j = 1; j < T; ++j) {
    const Scalar node = mid - half * std::cos(Scalar(j) * Scalar(M_PI) / Scalar(T));
    eigs[j] = std::clamp(node, mu, L);
  }
  Vector<Scalar> e0 =
      Vector<Scalar>::Constant(T + 1, R / std::sqrt(Scalar(T + 1)));
  return SpectralQuadratic<Scalar>(std::move(eigs), std::move(e0), mu, L);
}

/// One-dimensional resisting instance for a given oblivious schedule: the
/// single eigenvalue sits where zeta * prod(1 - alpha_k zeta) peaks on [0,L].
template <typename Scalar>
SpectralQuadratic<Scalar> make_convex_hard_for_schedule(
    Scalar L, const StepSchedule<Scalar>& schedule, Scalar R) {
  require(is_finite(L) && L > Scalar(0), "make_convex_hard_for_schedule: bad L");
  require(is_finite(R) && R > Scalar(0), "make_convex_hard_for_schedule: bad R");
  const ProductExtremal<Scalar> ext = product_extremal(schedule, L);
  Vector<Scalar> eigs(1), e0(1);
  eigs[0] = ext.zeta_star;
  e0[0] = R;
  return SpectralQuadratic<Scalar>(std::move(eigs), std::move(e0), Scalar(0), L);
}

/// Dense uniform spectrum on (0, L] so that any low-degree residual nearly
/// attains its interval maximum on the spectrum. Needs at least 4(T+1)^2
/// nodes for the degree-(T+1) maximum to be captured on the grid.
template <typename Scalar>
SpectralQuadratic<Scalar> make_markov_grid_instance(Scalar L, int T, Scalar R,
                                                    Index n_nodes) {
  require(is_finite(L) && L > Scalar(0), "make_markov_grid_instance: bad L");
  require(is_finite(R) && R > Scalar(0), "make_markov_grid_instance: bad R");
  require(T >= 0, "make_markov_grid_instance: T must be nonnegative");
  const Index floor_nodes = Index(4) * Index(T + 1) * Index(T + 1);
  require(n_nodes >= floor_nodes,
          "make_markov_grid_instance: grid too coarse, need >= 4(T+1)^2 nodes");
  require(n_nodes <= kMaxDimension, "make_markov_grid_instance: dimension cap is 1e4");

  Vector<Scalar> eigs(n_nodes);
  for (Index i = 0; i < n_nodes; ++i)
    eigs[i] = L * Scalar(i + 1) / Scalar(n_nodes);
  Vector<Scalar> e0 =
      Vector<Scalar>::Constant(n_nodes, R / std::sqrt(Scalar(n_nodes)));
  return SpectralQuadratic<Scalar>(std::move(eigs), std::move(e0), Scalar(0), L);
}

}  // namespace moolab
