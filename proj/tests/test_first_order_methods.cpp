#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "moolab/methods.hpp"
#include "moolab/polynomials.hpp"

using namespace moolab;
using Vec = Vector<double>;
using Mat = Matrix<double>;

namespace {

SpectralQuadratic<double> one_dim(double eig, double x0, double L) {
  Vec e(1), z(1);
  e << eig;
  z << x0;
  return SpectralQuadratic<double>(e, z, 0.0, L);
}

SpectralQuadratic<double> random_convex(std::mt19937_64& rng, Index d, double L) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vec eigs(d), e0(d);
  for (Index i = 0; i < d; ++i) {
    eigs[i] = L * u(rng);
    e0[i] = 2.0 * u(rng) - 1.0;
  }
  eigs[d - 1] = L;  // keep the smoothness constant tight
  return SpectralQuadratic<double>(eigs, e0, 0.0, L);
}

MooLiftedInstance<double> lifted_1d(double eig, double x0, double L) {
  Mat A(1, 2);
  A << -1.0, 1.0;
  return lift_to_moo(one_dim(eig, x0, L), A, false);
}

}  // namespace

TEST_CASE("gradient descent exact steps") {
  const auto g = one_dim(1.0, 1.0, 1.0);
  const auto exact = run_oblivious_gd(g, StepSchedule<double>::constant(1.0, 1, 1.0), 1);
  CHECK(exact.points[1][0] == 0.0);

  const auto half = run_oblivious_gd(g, StepSchedule<double>::constant(0.5, 2, 1.0), 2);
  CHECK(half.points[0][0] == 1.0);
  CHECK(half.points[1][0] == 0.5);
  CHECK(half.points[2][0] == 0.25);

  CHECK_THROWS_AS(run_oblivious_gd(g, StepSchedule<double>::constant(0.5, 1, 1.0), 2),
                  std::invalid_argument);
}

TEST_CASE("trace arrays stay parallel and finite") {
  std::mt19937_64 rng(1);
  const auto g = random_convex(rng, 6, 2.0);
  const auto trace = run_oblivious_gd(g, StepSchedule<double>::constant_for(2.0, 9), 9);
  CHECK(trace.points.size() == 10);
  CHECK(trace.fvals.size() == 10);
  CHECK(trace.grad_norms.size() == 10);
  CHECK(trace.steps() == 9);
  const auto zero_steps = run_oblivious_gd(g, StepSchedule<double>({}, 0.5), 0);
  CHECK(zero_steps.points.size() == 1);
}

TEST_CASE("product form holds componentwise") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 50; ++rep) {
    const double L = 0.5 + 3.0 * u(rng);
    const auto g = random_convex(rng, 8, L);
    const int T = 1 + static_cast<int>(u(rng) * 40);
    std::vector<double> alphas(T);
    for (double& a : alphas) a = u(rng) / L;
    const StepSchedule<double> schedule(alphas, 1.0 / L);
    const auto trace = run_oblivious_gd(g, schedule, T);
    for (int t = 0; t <= T; ++t) {
      for (Index i = 0; i < g.dim(); ++i) {
        double prod = 1.0;
        for (int k = 0; k < t; ++k) prod *= (1.0 - alphas[k] * g.eigs()[i]);
        const double expect = prod * g.e0()[i];
        CHECK(std::abs(trace.points[t][i] - expect) <=
              1e-12 * std::max(1.0, std::abs(expect)));
      }
    }
  }
}

TEST_CASE("resisting instance pins the min-iterate gradient norm") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 40; ++rep) {
    const double L = 1.0 + u(rng);
    const double R = 0.5 + u(rng);
    const int T = 1 + static_cast<int>(u(rng) * 30);
    std::vector<double> alphas(T);
    for (double& a : alphas) a = u(rng) / L;
    const StepSchedule<double> schedule(alphas, 1.0 / L);
    const auto g = make_convex_hard_for_schedule(L, schedule, R);
    const auto trace = run_oblivious_gd(g, schedule, T);
    double min_grad = trace.grad_norms[0];
    for (double gn : trace.grad_norms) min_grad = std::min(min_grad, gn);
    // Nonincreasing along the run, so the last iterate attains the minimum.
    CHECK(min_grad == doctest::Approx(trace.grad_norms.back()));
    CHECK(min_grad >= L * R / (4.0 * (T + 1)) * (1.0 - 1e-9));
  }
}

TEST_CASE("agd convex basics") {
  const auto g = one_dim(1.0, 1.0, 1.0);
  const auto trace = run_agd_convex(g, 1.0, g.e0(), 5);
  for (int t = 1; t <= 5; ++t) CHECK(std::abs(trace.points[t][0]) <= 1e-15);

  // t-sequence: t1 = (1 + sqrt 5) / 2.
  double tk = 1.0;
  const double t1 = (1.0 + std::sqrt(1.0 + 4.0 * tk * tk)) / 2.0;
  CHECK(t1 == doctest::Approx((1.0 + std::sqrt(5.0)) / 2.0).epsilon(1e-12));
}

TEST_CASE("agd convex objective bound on random quadratics") {
  std::mt19937_64 rng(4);
  for (int rep = 0; rep < 10; ++rep) {
    const double L = 1.0 + rep * 0.37;
    const auto g = random_convex(rng, 12, L);
    const double R = g.radius();
    const auto trace = run_agd_convex(g, L, g.e0(), 200);
    for (int T = 1; T <= 200; ++T) {
      const double bound = 2.0 * L * R * R / ((T + 1.0) * (T + 1.0));
      CHECK(trace.fvals[T] <= bound * (1.0 + 1e-9));
    }
  }
}

TEST_CASE("agd strongly convex") {
  // kappa = 1 degenerates to gradient descent with step 1/L: one exact step.
  const auto flat = SpectralQuadratic<double>(Vec::Constant(1, 2.0),
                                              Vec::Constant(1, 1.0), 2.0, 2.0);
  const auto t1 = run_agd_strongly_convex(flat, 2.0, 2.0, flat.e0(), 3);
  CHECK(t1.points[1][0] == 0.0);
  CHECK(t1.points[3][0] == 0.0);

  // kappa = 4: q = 1/2, beta = 1/3; verify the recursion against a manual run.
  const double L = 4.0, mu = 1.0;
  const auto g = make_strongly_convex_hard(L, mu, 3, 1.0);
  const auto trace = run_agd_strongly_convex(g, L, mu, g.e0(), 6);
  Vec x = g.e0(), y = g.e0();
  const double beta = (1.0 - 0.5) / (1.0 + 0.5);
  for (int k = 0; k < 6; ++k) {
    Vec xn = y - g.gradient(y) / L;
    y = xn + beta * (xn - x);
    x = xn;
    CHECK((trace.points[k + 1] - x).norm() <= 1e-14);
  }

  // Classical envelope: f(x_T) - f* <= ((L+mu)/2) R^2 (1-q)^T.
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 10; ++rep) {
    const double kappa = 1.5 + 10.0 * u(rng);
    const double mur = 0.5 + u(rng);
    const double Lr = mur * kappa;
    Vec eigs(6), e0(6);
    for (Index i = 0; i < 6; ++i) {
      eigs[i] = mur + (Lr - mur) * u(rng);
      e0[i] = 2.0 * u(rng) - 1.0;
    }
    eigs[0] = mur;
    eigs[5] = Lr;
    const SpectralQuadratic<double> q(eigs, e0, mur, Lr);
    const double R = q.radius();
    const auto tr = run_agd_strongly_convex(q, Lr, mur, q.e0(), 60);
    const double rate = 1.0 - std::sqrt(mur / Lr);
    for (int T = 0; T <= 60; ++T) {
      const double bound = 0.5 * (Lr + mur) * R * R * std::pow(rate, T);
      CHECK(tr.fvals[T] <= bound * (1.0 + 1e-9));
    }
  }

  CHECK_THROWS_AS(run_agd_strongly_convex(flat, 2.0, 0.0, flat.e0(), 3),
                  std::invalid_argument);
}

TEST_CASE("chebyshev iteration realizes the optimal residual") {
  // T = 1: the best affine residual is 1 - 2 zeta/(L+mu).
  const double mu = 1.0, L = 9.0;
  const auto g = make_strongly_convex_hard(L, mu, 4, 1.0);
  const auto tr1 = run_chebyshev_iteration(g, mu, L, 1);
  const auto fit1 = fit_residual_from_trace(g.eigs(), g.e0(), tr1.points[1], 1);
  CHECK(fit1.fit_residual <= 1e-10);
  CHECK(fit1.poly.coeffs[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fit1.poly.coeffs[1] == doctest::Approx(-0.2).epsilon(1e-10));
  // Max residual magnitude over [1, 9] sits at the endpoints: 0.8.
  CHECK(std::abs(fit1.poly(1.0)) == doctest::Approx(0.8).epsilon(1e-10));
  CHECK(std::abs(fit1.poly(9.0)) == doctest::Approx(0.8).epsilon(1e-10));

  // Degree-2 residual on the alternation nodes equals T_2(xi)/T_2(xi0).
  const auto g2 = make_strongly_convex_hard(9.0, 1.0, 2, 1.0);
  const auto tr2 = run_chebyshev_iteration(g2, 1.0, 9.0, 2);
  const auto fit2 = fit_residual_from_trace(g2.eigs(), g2.e0(), tr2.points[2], 2);
  CHECK(fit2.fit_residual <= 1e-8);
  const ChebyshevFrame<double> frame(1.0, 9.0);
  for (double zeta : {1.0, 5.0, 9.0})
    CHECK(fit2.poly(zeta) ==
          doctest::Approx(frame.residual_value(2, zeta)).epsilon(1e-8));

  // kappa = 1: plain gradient descent residual (1 - zeta/L)^T.
  const auto flat = SpectralQuadratic<double>(Vec::Constant(2, 3.0),
                                              Vec::Constant(2, 1.0), 3.0, 3.0);
  const auto trf = run_chebyshev_iteration(flat, 3.0, 3.0, 4);
  CHECK(trf.points[4][0] == doctest::Approx(0.0).epsilon(1e-15));

  CHECK_THROWS_AS(run_chebyshev_iteration(g, 0.0, L, 2), std::invalid_argument);
}

TEST_CASE("chebyshev final gap is sandwiched on the alternation instance") {
  const double mu = 1.0, L = 9.0, R = 1.0;
  const double rho = 2.0;  // (sqrt 9 + 1)/(sqrt 9 - 1)
  for (int T = 2; T <= 8; ++T) {
    const auto g = make_strongly_convex_hard(L, mu, T, R);
    const auto tr = run_chebyshev_iteration(g, mu, L, T);
    const double vT = 2.0 / (std::pow(rho, T) + std::pow(rho, -T));
    const double gap = tr.grad_norms.back();
    CHECK(gap >= mu * R * vT);
    CHECK(gap <= L * R * vT * (1.0 + 1e-6));
  }
}

TEST_CASE("scalarize") {
  const auto g = make_strongly_convex_hard(4.0, 1.0, 2, 1.0);
  Mat A(1, 2);
  A << -1.0, 1.0;
  const auto inst = lift_to_moo(g, A, true);

  std::mt19937_64 rng(6);
  std::normal_distribution<double> n(0.0, 1.0);
  const auto e1 = scalarize(inst, SimplexWeights<double>::unit(2, 0));
  for (int rep = 0; rep < 20; ++rep) {
    Vec x = Vec::NullaryExpr(inst.dim(), [&](Index) { return n(rng); });
    const Point<double> p = inst.split(x);
    const auto [f0, g0] = oracle_eval(inst, 0, p);
    CHECK(e1.value(x) == doctest::Approx(f0).epsilon(1e-12));
    Vec grad = e1.gradient(x);
    CHECK((grad.head(inst.dim_v()) - g0.v).norm() <= 1e-14);
    CHECK((grad.tail(inst.dim_w()) - g0.w).norm() <= 1e-14);
  }

  // Even mix of the symmetric anchors: the W-gradient is gamma * x_W.
  const auto mid = scalarize(inst, SimplexWeights<double>::uniform(2));
  Vec x = Vec::Ones(inst.dim());
  CHECK(mid.gradient(x)[inst.dim_v()] ==
        doctest::Approx(inst.gamma() * x[inst.dim_v()]).epsilon(1e-14));

  // The scalarized minimizer is (0, sum lambda_i a_i).
  Vec lam(2);
  lam << 0.25, 0.75;
  const auto mix = scalarize(inst, SimplexWeights<double>(lam));
  const Vec xstar = mix.minimizer();
  CHECK(xstar.head(inst.dim_v()).norm() == 0.0);
  CHECK(xstar[inst.dim_v()] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(mix.gradient(xstar).norm() <= 1e-14);
  CHECK(mix.value(xstar) == doctest::Approx(mix.min_value()).epsilon(1e-12));
}

TEST_CASE("mgda stops at stationary points") {
  const auto inst = lifted_1d(1.0, 1.0, 1.0);
  // Start on the Pareto set.
  Point<double> stationary{Vec::Zero(1), Vec::Constant(1, 0.5)};
  const auto tr = run_mgda(inst, 1.0, stationary, 10);
  CHECK(tr.points.size() == 1);
  CHECK(tr.gaps[0] <= kDefaultTol);

  // Opposite gradients: d = 0 at the anchor midpoint with a solved V-block.
  Point<double> midpoint{Vec::Zero(1), Vec::Zero(1)};
  const auto tr2 = run_mgda(inst, 1.0, midpoint, 10);
  CHECK(tr2.points.size() == 1);
  CHECK(tr2.gaps[0] <= kDefaultTol);
}

TEST_CASE("mgda gap sequence on the lifted line") {
  const auto inst = lifted_1d(0.8, 1.5, 1.0);
  Point<double> x0{Vec::Constant(1, 1.5), Vec::Constant(1, 2.0)};
  const auto tr = run_mgda(inst, 1.0, x0, 50);
  REQUIRE(tr.gaps.size() >= 2);
  for (std::size_t t = 1; t < tr.gaps.size(); ++t)
    CHECK(tr.gaps[t] <= tr.gaps[t - 1] * (1.0 + 1e-12));
  CHECK(tr.gaps.back() <= 1e-6);  // contraction on a 1-D lifted instance

  CHECK_THROWS_AS(run_mgda(inst, 1.5, x0, 10), std::invalid_argument);
}

TEST_CASE("descent lemma on every iterate of every method") {
  std::mt19937_64 rng(7);
  const double L = 2.0;
  const auto g = random_convex(rng, 10, L);
  const auto traces = {
      run_oblivious_gd(g, StepSchedule<double>::constant_for(L, 30), 30),
      run_agd_convex(g, L, g.e0(), 30),
      run_chebyshev_iteration(g, g.eigs().minCoeff(), L, g.e0(), 30)};
  for (const auto& tr : traces) {
    for (std::size_t t = 0; t < tr.points.size(); ++t) {
      const double lhs = tr.grad_norms[t] * tr.grad_norms[t];
      const double rhs = 2.0 * L * (tr.fvals[t] - g.min_value());
      CHECK(lhs <= rhs * (1.0 + 1e-9) + 1e-300);
    }
  }
}

TEST_CASE("one-step min-gradient upper bound for capped gd") {
  std::mt19937_64 rng(8);
  for (int rep = 0; rep < 20; ++rep) {
    const double L = 1.0 + rep * 0.21;
    const auto g = random_convex(rng, 8, L);
    const double R = g.radius();
    const int T = 1 + rep;
    const auto tr = run_oblivious_gd(g, StepSchedule<double>::constant_for(L, T), T);
    double min_grad = tr.grad_norms[0];
    for (int t = 0; t < T; ++t) min_grad = std::min(min_grad, tr.grad_norms[t]);
    CHECK(min_grad <= L * R / std::sqrt(static_cast<double>(T)) * (1.0 + 1e-12));
  }
}

TEST_CASE("attach pareto gaps") {
  const auto g = make_strongly_convex_hard(4.0, 1.0, 2, 1.0);
  Mat A(1, 2);
  A << -1.0, 1.0;
  const auto inst = lift_to_moo(g, A, true);
  const auto oracle = scalarize(inst, SimplexWeights<double>::unit(2, 0));
  auto tr = run_agd_strongly_convex(oracle, 4.0, 1.0, inst.start_point().flat(), 10);
  attach_pareto_gaps(tr, inst);
  REQUIRE(tr.gaps.size() == tr.points.size());
  // The W-block starts on an anchor and stays there, so the gap equals the
  // V-gradient norm, which equals the scalarized gradient norm.
  for (std::size_t t = 0; t < tr.gaps.size(); ++t)
    CHECK(tr.gaps[t] == doctest::Approx(tr.grad_norms[t]).epsilon(1e-9));
}
