#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "moolab/defs.hpp"
#include "moolab/lifting.hpp"
#include "moolab/min_norm.hpp"
#include "moolab/quadratic.hpp"
#include "moolab/schedule.hpp"

namespace moolab {

/// Per-iteration record of a run: iterates, objective values, gradient
/// norms, and (for multiobjective runs) the stationarity gap. The parallel
/// arrays always have equal length; `gaps` may be empty for scalar runs.
template <typename Scalar>
struct IterateTrace {
  std::vector<Vector<Scalar>> points;
  std::vector<Scalar> fvals;
  std::vector<Scalar> grad_norms;
  std::vector<Scalar> gaps;
  std::string method_tag;

  Index steps() const { return static_cast<Index>(points.size()) - 1; }
};

/// Fixed scalarization f_lambda of a lifted instance, with its minimizer
/// and minimum value in closed form (the quadratic is separable).
template <typename Scalar>
class ScalarizedOracle {
 public:
  ScalarizedOracle(const MooLiftedInstance<Scalar>& inst, SimplexWeights<Scalar> weights)
      : inst_(&inst), weights_(std::move(weights)) {
    require(weights_.size() == inst.m(), "scalarize: weight count mismatch");
    anchor_mix_ = inst.anchors() * weights_.lambda;
    Scalar sq = Scalar(0);
    for (Index i = 0; i < inst.m(); ++i)
      sq += weights_.lambda[i] * inst.anchors().col(i).squaredNorm();
    f_star_ = Scalar(0.5) * inst.gamma() * (sq - anchor_mix_.squaredNorm());
  }

  Index dim() const { return inst_->dim(); }

  Scalar value(const Vector<Scalar>& x) const {
    const Point<Scalar> p = inst_->split(x);
    return inst_->quadratic().value(p.v) +
           Scalar(0.5) * inst_->gamma() * (p.w - anchor_mix_).squaredNorm() + f_star_;
  }

  Vector<Scalar> gradient(const Vector<Scalar>& x) const {
    const Point<Scalar> p = inst_->split(x);
    Vector<Scalar> g(dim());
    g.head(inst_->dim_v()) = inst_->quadratic().gradient(p.v);
    g.tail(inst_->dim_w()) = inst_->gamma() * (p.w - anchor_mix_);
    return g;
  }

  Scalar min_value() const { return f_star_; }

  Vector<Scalar> minimizer() const {
    Vector<Scalar> x = Vector<Scalar>::Zero(dim());
    x.tail(inst_->dim_w()) = anchor_mix_;
    return x;
  }

  const SimplexWeights<Scalar>& weights() const { return weights_; }

 private:
  const MooLiftedInstance<Scalar>* inst_;
  SimplexWeights<Scalar> weights_;
  Vector<Scalar> anchor_mix_;
  Scalar f_star_;
};

template <typename Scalar>
ScalarizedOracle<Scalar> scalarize(const MooLiftedInstance<Scalar>& inst,
                                   const SimplexWeights<Scalar>& weights) {
  return ScalarizedOracle<Scalar>(inst, weights);
}

namespace detail {

template <typename Scalar, typename Oracle>
void record(IterateTrace<Scalar>& trace, const Oracle& oracle, const Vector<Scalar>& x) {
  require(all_finite(x), "iterate diverged to non-finite values");
  trace.points.push_back(x);
  trace.fvals.push_back(oracle.value(x));
  trace.grad_norms.push_back(oracle.gradient(x).norm());
}

}  // namespace detail

/// x_{t+1} = x_t - alpha_t grad f(x_t) with the pre-scheduled steps.
template <typename Scalar, typename Oracle>
IterateTrace<Scalar> run_oblivious_gd(const Oracle& oracle,
                                      const StepSchedule<Scalar>& schedule,
                                      const Vector<Scalar>& x0, int T) {
  require(T >= 0, "run_oblivious_gd: T must be nonnegative");
  require(schedule.size() >= static_cast<std::size_t>(T),
          "run_oblivious_gd: schedule shorter than T");
  IterateTrace<Scalar> trace;
  trace.method_tag = "gd";
  Vector<Scalar> x = x0;
  detail::record(trace, oracle, x);
  for (int t = 0; t < T; ++t) {
    x -= schedule.alphas[static_cast<std::size_t>(t)] * oracle.gradient(x);
    detail::record(trace, oracle, x);
  }
  return trace;
}

template <typename Scalar>
IterateTrace<Scalar> run_oblivious_gd(const SpectralQuadratic<Scalar>& g,
                                      const StepSchedule<Scalar>& schedule, int T) {
  return run_oblivious_gd(g, schedule, g.e0(), T);
}

/// Nesterov's method for the smooth convex case, with the t_k extrapolation
/// sequence t_0 = 1, t_{k+1} = (1 + sqrt(1 + 4 t_k^2)) / 2.
template <typename Scalar, typename Oracle>
IterateTrace<Scalar> run_agd_convex(const Oracle& oracle, Scalar L,
                                    const Vector<Scalar>& x0, int T) {
  require(is_finite(L) && L > Scalar(0), "run_agd_convex: L must be positive");
  require(T >= 0, "run_agd_convex: T must be nonnegative");
  IterateTrace<Scalar> trace;
  trace.method_tag = "agd";
  Vector<Scalar> x = x0;
  Vector<Scalar> y = x0;
  Scalar tk = Scalar(1);
  detail::record(trace, oracle, x);
  for (int k = 0; k < T; ++k) {
    Vector<Scalar> x_next = y - oracle.gradient(y) / L;
    const Scalar t_next = (Scalar(1) + std::sqrt(Scalar(1) + Scalar(4) * tk * tk)) / Scalar(2);
    y = x_next + ((tk - Scalar(1)) / t_next) * (x_next - x);
    x = std::move(x_next);
    tk = t_next;
    detail::record(trace, oracle, x);
  }
  return trace;
}

/// Nesterov's method with constant momentum beta = (1-q)/(1+q), q = sqrt(mu/L).
template <typename Scalar, typename Oracle>
IterateTrace<Scalar> run_agd_strongly_convex(const Oracle& oracle, Scalar L, Scalar mu,
                                             const Vector<Scalar>& x0, int T) {
  require(is_finite(L) && is_finite(mu), "run_agd_strongly_convex: non-finite bounds");
  require(mu > Scalar(0), "run_agd_strongly_convex: mu must be positive");
  require(L >= mu, "run_agd_strongly_convex: need L >= mu");
  require(T >= 0, "run_agd_strongly_convex: T must be nonnegative");
  const Scalar q = std::sqrt(mu / L);
  const Scalar beta = (Scalar(1) - q) / (Scalar(1) + q);
  IterateTrace<Scalar> trace;
  trace.method_tag = "agd-sc";
  Vector<Scalar> x = x0;
  Vector<Scalar> y = x0;
  detail::record(trace, oracle, x);
  for (int k = 0; k < T; ++k) {
    Vector<Scalar> x_next = y - oracle.gradient(y) / L;
    y = x_next + beta * (x_next - x);
    x = std::move(x_next);
    detail::record(trace, oracle, x);
  }
  return trace;
}

/// Chebyshev semi-iteration on [mu, L]: the oblivious span method whose
/// degree-t error map is T_t(xi(zeta)) / T_t(xi0). Implemented with the
/// ratio recursion r_t = T_t(xi0)/T_{t+1}(xi0), which stays bounded even
/// when T_t(xi0) itself would overflow. Collapses to gradient descent with
/// step 1/L when mu = L.
template <typename Scalar, typename Oracle>
IterateTrace<Scalar> run_chebyshev_iteration(const Oracle& oracle, Scalar mu, Scalar L,
                                             const Vector<Scalar>& x0, int T) {
  require(is_finite(L) && is_finite(mu), "run_chebyshev_iteration: non-finite bounds");
  require(mu > Scalar(0), "run_chebyshev_iteration: mu = 0 degenerates the interval");
  require(L >= mu, "run_chebyshev_iteration: need L >= mu");
  require(T >= 0, "run_chebyshev_iteration: T must be nonnegative");

  IterateTrace<Scalar> trace;
  trace.method_tag = "chebyshev";
  Vector<Scalar> x = x0;
  detail::record(trace, oracle, x);
  if (T == 0) return trace;

  if (mu == L) {
    for (int t = 0; t < T; ++t) {
      x -= oracle.gradient(x) / L;
      detail::record(trace, oracle, x);
    }
    return trace;
  }

  const Scalar xi0 = -(L + mu) / (L - mu);
  Vector<Scalar> x_prev = x;
  x = x - (Scalar(2) / (L + mu)) * oracle.gradient(x);
  detail::record(trace, oracle, x);

  Scalar r_prev = Scalar(1) / xi0;  // T_0(xi0) / T_1(xi0)
  for (int t = 1; t < T; ++t) {
    const Scalar r = Scalar(1) / (Scalar(2) * xi0 - r_prev);
    Vector<Scalar> x_next =
        (Scalar(2) * r) *
            ((Scalar(2) * oracle.gradient(x) - (L + mu) * x) / (L - mu)) -
        (r_prev * r) * x_prev;
    x_prev = std::move(x);
    x = std::move(x_next);
    r_prev = r;
    detail::record(trace, oracle, x);
  }
  return trace;
}

template <typename Scalar>
IterateTrace<Scalar> run_chebyshev_iteration(const SpectralQuadratic<Scalar>& g,
                                             Scalar mu, Scalar L, int T) {
  return run_chebyshev_iteration(g, mu, L, g.e0(), T);
}

/// Multiple-gradient descent: step along the negated min-norm point of the
/// current gradients. Stops early once the gap is within tol. The V-block
/// update equals plain gradient descent because every objective shares the
/// same V-gradient.
template <typename Scalar>
IterateTrace<Scalar> run_mgda(const MooLiftedInstance<Scalar>& inst, Scalar step,
                              const Point<Scalar>& x0, int T,
                              Scalar tol = Scalar(kDefaultTol)) {
  require(is_finite(step) && step > Scalar(0) && step <= Scalar(1) / inst.smoothness(),
          "run_mgda: step must lie in (0, 1/L]");
  require(T >= 0, "run_mgda: T must be nonnegative");

  IterateTrace<Scalar> trace;
  trace.method_tag = "mgda";
  const SimplexWeights<Scalar> mean = SimplexWeights<Scalar>::uniform(inst.m());
  Vector<Scalar> x = x0.flat();

  for (int t = 0; t <= T; ++t) {
    require(all_finite(x), "iterate diverged to non-finite values");
    const Point<Scalar> p = inst.split(x);
    const GapCertificate<Scalar> cert = min_norm_point(gradient_matrix(inst, p), tol);
    Scalar fmean = Scalar(0);
    for (Index i = 0; i < inst.m(); ++i)
      fmean += mean.lambda[i] * oracle_eval(inst, i, p).first;
    trace.points.push_back(x);
    trace.fvals.push_back(fmean);
    trace.grad_norms.push_back(cert.gap);
    trace.gaps.push_back(cert.gap);
    if (cert.gap <= tol || t == T) break;
    x -= step * cert.min_point;
  }
  return trace;
}

/// Fill trace.gaps with the Pareto stationarity gap at every recorded point.
template <typename Scalar>
void attach_pareto_gaps(IterateTrace<Scalar>& trace, const MooLiftedInstance<Scalar>& inst,
                        Scalar tol = Scalar(kDefaultTol)) {
  trace.gaps.clear();
  trace.gaps.reserve(trace.points.size());
  for (const auto& x : trace.points)
    trace.gaps.push_back(pareto_gap(inst, inst.split(x), tol).gap);
}

}  // namespace moolab
