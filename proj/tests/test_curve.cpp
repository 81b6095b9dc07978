#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "ratpts/curve.hpp"

using namespace ratpts;

TEST(EvalJet, ParabolaAtHalf) {
  const Jet j = eval_jet(parabola(), 0.5, 2);
  EXPECT_DOUBLE_EQ(j.values(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(j.values(1, 0), 0.25);
  EXPECT_DOUBLE_EQ(j.values(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(j.values(1, 1), 1.0);
  EXPECT_DOUBLE_EQ(j.values(0, 2), 0.0);
  EXPECT_DOUBLE_EQ(j.values(1, 2), 2.0);
}

TEST(EvalJet, ZerothOrderIsThePoint) {
  const Jet j = eval_jet(exp_mix(), 0.3, 0);
  ASSERT_EQ(j.values.cols(), 1);
  EXPECT_DOUBLE_EQ(j.values(0, 0), 0.3);
  EXPECT_DOUBLE_EQ(j.values(1, 0), 0.09);
  EXPECT_NEAR(j.values(2, 0), std::exp(0.3), 1e-15);
}

TEST(EvalJet, VeroneseCubicAtOne) {
  const Jet j = eval_jet(veronese(3), 1.0, 3);
  EXPECT_EQ(j.derivative(1), Eigen::Vector3d(1, 2, 3));
  EXPECT_EQ(j.derivative(2), Eigen::Vector3d(0, 2, 6));
  EXPECT_EQ(j.derivative(3), Eigen::Vector3d(0, 0, 6));
}

TEST(EvalJet, RejectsOutsideDomainAndHighOrder) {
  const Curve c = parabola({0.0, 1.0});
  EXPECT_THROW(eval_jet(c, 1.5, 1), PreconditionError);
  EXPECT_THROW(eval_jet(c, 0.5, c.l_max() + 1), PreconditionError);
}

TEST(EvalJet, FirstRowIsCoordinateForEveryBuiltIn) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> xs(-3.5, 3.5);
  for (const Curve& c : {parabola(), veronese(3), veronese(4), exp_mix(), curve_from_name("poly:1,-2,0,0.5")}) {
    for (int i = 0; i < 1000; ++i) {
      const double x = xs(rng);
      const Jet j = eval_jet(c, x, 4);
      ASSERT_EQ(j.values(0, 0), x);
      ASSERT_EQ(j.values(0, 1), 1.0);
      for (int k = 2; k <= 4; ++k) ASSERT_EQ(j.values(0, k), 0.0);
    }
  }
}

TEST(EvalJet, TaylorCurveMatchesClosedForm) {
  const Curve t = taylor_curve("tx", {[](const Taylor& x) { return x * x; }, [](const Taylor& x) { return exp(x); }},
                               kDefaultDomain);
  const Curve e = exp_mix();
  for (double x : {-1.3, 0.0, 0.7, 2.2}) {
    const Jet a = eval_jet(t, x, 5), b = eval_jet(e, x, 5);
    for (int r = 0; r < 3; ++r)
      for (int k = 0; k <= 5; ++k) EXPECT_NEAR(a.values(r, k), b.values(r, k), 1e-12 * (1 + std::abs(b.values(r, k))));
  }
}

TEST(Nondegeneracy, KnownOrders) {
  for (double x : {-2.0, 0.0, 0.4, 3.0}) {
    EXPECT_EQ(nondegeneracy_order(parabola(), x, 8), 2);
    for (int n = 2; n <= 5; ++n) EXPECT_EQ(nondegeneracy_order(veronese(n), x, 8), n);
    EXPECT_FALSE(nondegeneracy_order(curve_from_name("poly:1,2"), x, 5).has_value());
  }
}

TEST(Nondegeneracy, LocallyConstant) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> xs(-3.0, 3.0);
  for (const Curve& c : {parabola(), veronese(3), veronese(4)})
    for (int i = 0; i < 200; ++i) {
      const double x = xs(rng);
      EXPECT_EQ(nondegeneracy_order(c, x, 8), nondegeneracy_order(c, x + 1e-6, 8));
    }
}

TEST(SecondDerivativeBound, Examples) {
  EXPECT_DOUBLE_EQ(second_derivative_bound(parabola(), {-1, 1}, 10000, 1.0), 2.0);
  EXPECT_DOUBLE_EQ(second_derivative_bound(veronese(3), {0, 1}, 10000, 1.0), 6.0);
  EXPECT_DOUBLE_EQ(second_derivative_bound(curve_from_name("poly:3,-1"), {0, 1}), 0.0);
  EXPECT_DOUBLE_EQ(second_derivative_bound(parabola(), {-1, 1}), 2.1);
  EXPECT_THROW(second_derivative_bound(parabola(), Interval::empty_interval()), PreconditionError);
}

TEST(AuxG, Examples) {
  EXPECT_DOUBLE_EQ(aux_g(parabola(), 0.5)(0), -0.25);
  const Curve e = exp_mix();
  const Eigen::VectorXd g0 = aux_g(e, 0.0);
  EXPECT_DOUBLE_EQ(g0(0), 0.0);
  EXPECT_DOUBLE_EQ(g0(1), 1.0);
  const Curve affine = curve_from_name("poly:1.5,-2");
  for (double x : {-3.0, 0.2, 2.5}) EXPECT_NEAR(aux_g(affine, x)(0), 1.5, 1e-14);
}

TEST(AuxG, MatchesJet) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> xs(-3.0, 3.0);
  const Curve c = exp_mix();
  for (int i = 0; i < 1000; ++i) {
    const double x = xs(rng);
    const Jet j = eval_jet(c, x, 1);
    const Eigen::VectorXd g = aux_g(c, x);
    for (int k = 0; k < c.m(); ++k) {
      const double ref = j.values(k + 1, 0) - x * j.values(k + 1, 1);
      EXPECT_LE(std::abs(g(k) - ref), 1e-12 * std::max(1.0, std::abs(ref)));
    }
  }
}

TEST(Catalog, ResolvesNames) {
  EXPECT_EQ(curve_from_name("parabola").n(), 2);
  EXPECT_EQ(curve_from_name("veronese:4").n(), 4);
  EXPECT_EQ(curve_from_name("poly:0,0,1;0,0,0,1").n(), 3);
  EXPECT_EQ(curve_from_name("expmix").n(), 3);
  EXPECT_THROW(curve_from_name("hyperbola"), std::invalid_argument);
  EXPECT_THROW(curve_from_name("veronese:x"), std::invalid_argument);
}
