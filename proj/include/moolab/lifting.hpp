#pragma once

#include <utility>
#include <vector>

#include "moolab/defs.hpp"
#include "moolab/min_norm.hpp"
#include "moolab/quadratic.hpp"

namespace moolab {

/// A point of the lifted space split into the V-block (eigenbasis of the
/// scalar quadratic) and the W-block (anchor space).
template <typename Scalar>
struct Point {
  Vector<Scalar> v;
  Vector<Scalar> w;

  Vector<Scalar> flat() const {
    Vector<Scalar> x(v.size() + w.size());
    x.head(v.size()) = v;
    x.tail(w.size()) = w;
    return x;
  }
};

/// m-objective instance f_i(x) = g(x_V) + (gamma/2) |x_W - a_i|^2 with
/// affinely independent anchors a_i. Every objective shares the V-block
/// gradient, the Pareto set is {0} x conv{a_i}, and gamma is mu for the
/// strongly convex lifting and L for the merely convex one. Immutable.
template <typename Scalar>
class MooLiftedInstance {
 public:
  MooLiftedInstance(SpectralQuadratic<Scalar> g, Matrix<Scalar> anchors,
                    bool strongly_convex)
      : g_(std::move(g)), anchors_(std::move(anchors)), strongly_convex_(strongly_convex) {
    require(anchors_.cols() >= 2, "MooLiftedInstance: need at least two objectives");
    require(anchors_.rows() >= 1, "MooLiftedInstance: anchors need a dimension");
    require(all_finite(anchors_), "MooLiftedInstance: non-finite anchor");
    require(strongly_convex_ == (g_.mu_bound() > Scalar(0)),
            "MooLiftedInstance: strong-convexity flag inconsistent with mu");

    // Affine independence: the m-1 anchor differences must have full rank.
    Matrix<Scalar> diffs(anchors_.rows(), anchors_.cols() - 1);
    for (Index i = 1; i < anchors_.cols(); ++i)
      diffs.col(i - 1) = anchors_.col(i) - anchors_.col(0);
    Eigen::ColPivHouseholderQR<Matrix<Scalar>> qr(diffs);
    require(qr.rank() == anchors_.cols() - 1,
            "MooLiftedInstance: anchors must be affinely independent");

    gamma_ = strongly_convex_ ? g_.mu_bound() : g_.L_bound();
  }

  const SpectralQuadratic<Scalar>& quadratic() const { return g_; }
  const Matrix<Scalar>& anchors() const { return anchors_; }
  Scalar gamma() const { return gamma_; }
  bool strongly_convex() const { return strongly_convex_; }
  Index m() const { return anchors_.cols(); }
  Index dim_v() const { return g_.dim(); }
  Index dim_w() const { return anchors_.rows(); }
  Index dim() const { return dim_v() + dim_w(); }

  /// Smoothness constant of every objective (gamma never exceeds L).
  Scalar smoothness() const { return g_.L_bound(); }

  Point<Scalar> split(const Vector<Scalar>& x) const {
    require(x.size() == dim(), "MooLiftedInstance: dimension mismatch");
    return {x.head(dim_v()).eval(), x.tail(dim_w()).eval()};
  }

  /// Canonical start: V-block at the quadratic's e0, W-block on the first
  /// anchor, so dist(x0, Pareto set) equals the quadratic's radius.
  Point<Scalar> start_point() const {
    return {g_.e0(), anchors_.col(0).eval()};
  }

 private:
  SpectralQuadratic<Scalar> g_;
  Matrix<Scalar> anchors_;
  Scalar gamma_;
  bool strongly_convex_;
};

template <typename Scalar>
MooLiftedInstance<Scalar> lift_to_moo(SpectralQuadratic<Scalar> g,
                                      Matrix<Scalar> anchors, bool strongly_convex) {
  return MooLiftedInstance<Scalar>(std::move(g), std::move(anchors), strongly_convex);
}

template <typename Scalar>
MooLiftedInstance<Scalar> lift_to_moo(SpectralQuadratic<Scalar> g,
                                      const std::vector<Vector<Scalar>>& anchors,
                                      bool strongly_convex) {
  require(!anchors.empty(), "lift_to_moo: empty anchor list");
  Matrix<Scalar> A(anchors.front().size(), static_cast<Index>(anchors.size()));
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    require(anchors[i].size() == A.rows(), "lift_to_moo: anchor dimension mismatch");
    A.col(static_cast<Index>(i)) = anchors[i];
  }
  return MooLiftedInstance<Scalar>(std::move(g), std::move(A), strongly_convex);
}

/// First-order oracle of objective i at x.
template <typename Scalar>
std::pair<Scalar, Point<Scalar>> oracle_eval(const MooLiftedInstance<Scalar>& inst,
                                             Index i, const Point<Scalar>& x) {
  require(i >= 0 && i < inst.m(), "oracle_eval: objective index out of range");
  require(x.v.size() == inst.dim_v() && x.w.size() == inst.dim_w(),
          "oracle_eval: dimension mismatch");
  const Vector<Scalar> wdiff = x.w - inst.anchors().col(i);
  const Scalar value =
      inst.quadratic().value(x.v) + Scalar(0.5) * inst.gamma() * wdiff.squaredNorm();
  Point<Scalar> grad{inst.quadratic().gradient(x.v), (inst.gamma() * wdiff).eval()};
  return {value, std::move(grad)};
}

/// Gradients of all m objectives at x, stacked as columns of a
/// (dim_v + dim_w) x m matrix. The V-rows are identical across columns.
template <typename Scalar>
Matrix<Scalar> gradient_matrix(const MooLiftedInstance<Scalar>& inst,
                               const Point<Scalar>& x) {
  Matrix<Scalar> G(inst.dim(), inst.m());
  for (Index i = 0; i < inst.m(); ++i) {
    const auto [value, grad] = oracle_eval(inst, i, x);
    (void)value;
    G.col(i).head(inst.dim_v()) = grad.v;
    G.col(i).tail(inst.dim_w()) = grad.w;
  }
  return G;
}

/// dist(x, {0} x conv{a_i}).
template <typename Scalar>
Scalar dist_to_pareto(const MooLiftedInstance<Scalar>& inst, const Point<Scalar>& x,
                      Scalar tol = Scalar(kDefaultTol)) {
  require(x.v.size() == inst.dim_v() && x.w.size() == inst.dim_w(),
          "dist_to_pareto: dimension mismatch");
  const Scalar dv = x.v.norm();
  const Scalar dw = dist_to_hull(x.w, inst.anchors(), tol);
  return std::sqrt(dv * dv + dw * dw);
}

/// Pareto stationarity gap at x: min-norm point of the m gradients.
template <typename Scalar>
GapCertificate<Scalar> pareto_gap(const MooLiftedInstance<Scalar>& inst,
                                  const Point<Scalar>& x,
                                  Scalar tol = Scalar(kDefaultTol)) {
  return min_norm_point(gradient_matrix(inst, x), tol);
}

/// Independent oracle for the gap on lifted instances:
/// sqrt(|grad g(x_V)|^2 + gamma^2 dist(x_W, conv{a_i})^2).
template <typename Scalar>
Scalar lifted_gap_closed_form(const MooLiftedInstance<Scalar>& inst,
                              const Point<Scalar>& x,
                              Scalar tol = Scalar(kDefaultTol)) {
  require(x.v.size() == inst.dim_v() && x.w.size() == inst.dim_w(),
          "lifted_gap_closed_form: dimension mismatch");
  const Scalar gv = inst.quadratic().gradient(x.v).norm();
  const Scalar dw = dist_to_hull(x.w, inst.anchors(), tol);
  const Scalar gw = inst.gamma() * dw;
  return std::sqrt(gv * gv + gw * gw);
}

}  // namespace moolab
