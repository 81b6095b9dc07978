#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "ratpts/goodness.hpp"
#include "ratpts/harness.hpp"

using namespace ratpts;

namespace {

IntMatrix cols(std::initializer_list<std::initializer_list<long long>> columns) {
  const auto n = static_cast<Eigen::Index>(columns.begin()->size());
  IntMatrix m(n, static_cast<Eigen::Index>(columns.size()));
  Eigen::Index j = 0;
  for (const auto& c : columns) {
    Eigen::Index i = 0;
    for (long long v : c) m(i++, j) = v;
    ++j;
  }
  return m;
}

Eigen::MatrixXd rows_of(const Eigen::MatrixXd& G, const std::vector<int>& I) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(I.size()), G.cols());
  for (std::size_t i = 0; i < I.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = G.row(I[i] - 1);
  return out;
}

}  // namespace

TEST(CaGoodRatio, Monomials) {
  for (int k = 1; k <= 3; ++k) {
    const GoodnessReport r = ca_good_ratio([k](double x) { return std::pow(x, k); }, {-1, 1}, 1.0 / k, 100000);
    EXPECT_GE(r.empirical_C, 0.9) << k;
    EXPECT_LE(r.empirical_C, 1.1) << k;
  }
}

TEST(CaGoodRatio, ConstantHasEmptySublevelSets) {
  const GoodnessReport r = ca_good_ratio([](double) { return 1.0; }, {0, 1}, 0.5, 1000);
  EXPECT_EQ(r.empirical_C, 0.0);
}

TEST(CaGoodRatio, LinearAtQuarter) {
  GoodnessOptions o;
  o.depth = 0;
  o.eps = {0.25};
  const GoodnessReport r = ca_good_ratio([](double x) { return x; }, {0, 1}, 1.0, 1000, o);
  EXPECT_NEAR(r.empirical_C, 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(r.worst_epsilon, 0.25);
}

TEST(CaGoodRatio, ConvergesUnderRefinement) {
  double last_err = 1.0;
  for (int grid : {1000, 10000, 100000}) {
    const double err = std::abs(ca_good_ratio([](double x) { return x * x; }, {-1, 1}, 0.5, grid).empirical_C - 1.0);
    EXPECT_LE(err, last_err + 1e-12);
    last_err = err;
  }
  EXPECT_LT(last_err, 0.02);
}

TEST(CaGoodRatio, RejectsCoarseGridAndNaN) {
  EXPECT_THROW(ca_good_ratio([](double x) { return x; }, {0, 1}, 1.0, 10), PreconditionError);
  EXPECT_THROW(ca_good_ratio([](double x) { return std::log(x - 0.5); }, {0, 1}, 1.0, 1000), PreconditionError);
}

TEST(SkewGradient, Examples) {
  const ScalarFn id = [](const Taylor& x) { return x; };
  const ScalarFn sq = [](const Taylor& x) { return x * x; };
  const ScalarFn ex = [](const Taylor& x) { return exp(x); };
  EXPECT_DOUBLE_EQ(skew_gradient(id, sq, 3.0), 9.0);
  EXPECT_DOUBLE_EQ(skew_gradient(ex, ex, 0.7), 0.0);
  for (double x : {-1.0, 0.2, 1.7}) {
    EXPECT_DOUBLE_EQ(skew_gradient(sq, ex, x), -skew_gradient(ex, sq, x));
    const ScalarFn scaled = [](const Taylor& t) { return 2.5 * (t * t); };
    EXPECT_NEAR(skew_gradient(scaled, ex, x), 2.5 * skew_gradient(sq, ex, x), 1e-12);
  }
}

TEST(PhiMinor, Examples) {
  const Curve p = parabola();
  EXPECT_DOUBLE_EQ(phi_minor(p, 0.5, {{1, 2}, cols({{1, 0, 0}, {0, 1, 0}})}), -0.25);
  EXPECT_DOUBLE_EQ(phi_minor(p, 0.5, {{1, 2}, cols({{1, 2, 3}, {1, 2, 3}})}), 0.0);
  for (double x : {-2.0, 0.1, 0.5, 3.0}) EXPECT_DOUBLE_EQ(phi_minor(p, x, {{2, 3}, cols({{1, 0, 0}, {0, 1, 0}})}), 1.0);
  EXPECT_THROW(phi_minor(p, 0.5, {{1, 2}, cols({{1, 0, 0}})}), PreconditionError);
  EXPECT_THROW(phi_minor(p, 0.5, {{2, 1}, cols({{1, 0, 0}, {0, 1, 0}})}), PreconditionError);
}

TEST(PhiMinor, DegenerateTag) {
  const Curve p = parabola();
  const MinorSpec spec{{2, 3}, cols({{1, 0, 0}, {0, 0, 1}})};
  EXPECT_TRUE(is_degenerate_minor(spec, 2));
  const MinorEvaluation e = evaluate_minor(p, 0.4, spec);
  EXPECT_TRUE(e.degenerate);
  EXPECT_EQ(e.value, 0.0);
  EXPECT_EQ(phi_minor(p, 0.4, spec), 0.0);
  EXPECT_FALSE(evaluate_minor(p, 0.4, {{1, 2}, cols({{1, 0, 0}, {0, 1, 0}})}).degenerate);
}

TEST(Wedge, Coordinates) {
  const IntegerMultivector w = wedge_columns(cols({{1, 1, 0}}));
  EXPECT_EQ(w.coords, (std::vector<long long>{1, 1, 0}));
  const IntegerMultivector w2 = wedge_columns(cols({{1, 0, 0, 0}, {0, 1, 0, 0}}));
  EXPECT_EQ(w2.coords.size(), 6u);
  EXPECT_EQ(w2.coords[0], 1);
  EXPECT_TRUE(wedge_columns(cols({{1, 2, 3}, {2, 4, 6}})).is_zero());
  EXPECT_EQ(index_subsets(5, 2).size(), 10u);
}

TEST(HodgeDual, Examples) {
  const IntMatrix d = hodge_dual_basis(cols({{1, 0, 0}, {0, 1, 0}}));
  ASSERT_EQ(d.cols(), 1);
  EXPECT_EQ(d.col(0).cwiseAbs(), (IntVector(3) << 0, 0, 1).finished());

  const IntMatrix g = cols({{1, 1, 0}});
  const IntMatrix a = hodge_dual_basis(g);
  ASSERT_EQ(a.cols(), 2);
  EXPECT_TRUE((g.transpose() * a).isZero());
  const IntegerMultivector wa = wedge_columns(a);
  EXPECT_EQ(static_cast<long long>(wa.squared_norm()), 2);
  std::vector<long long> abs_coords;
  for (long long v : wa.coords) abs_coords.push_back(std::abs(v));
  EXPECT_EQ(abs_coords, (std::vector<long long>{0, 1, 1}));

  EXPECT_THROW(hodge_dual_basis(cols({{1, 2, 3}, {2, 4, 6}})), PreconditionError);
}

TEST(HodgeDual, IsometryAndDeterminantIdentity) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> xs(-1.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + trial % 3;
    const int r = 1 + trial % n;
    const Curve c = veronese(n);
    const IntMatrix gamma = random_full_rank(rng, n + 1, r, -3, 3);
    const IntMatrix dual = hodge_dual_basis(gamma);
    ASSERT_EQ(dual.cols(), n + 1 - r);
    ASSERT_TRUE((gamma.transpose() * dual).isZero());
    ASSERT_TRUE(wedge_columns(dual).squared_norm() == wedge_columns(gamma).squared_norm());

    std::vector<int> I(static_cast<std::size_t>(r));
    std::iota(I.begin(), I.end(), 1);
    const double x = xs(rng);
    const Eigen::MatrixXd GI = rows_of(build_G(c, x), I);
    Eigen::MatrixXd stacked(n + 1, n + 1);
    stacked << GI, dual.cast<double>().transpose();
    const double phi = phi_minor(c, x, {I, gamma});
    EXPECT_NEAR(std::abs(stacked.determinant()), std::abs(phi), 1e-9 * std::max(1.0, std::abs(phi)));
  }
}

TEST(PhiClosedForm, ExplicitDuals) {
  const Curve p = parabola();
  EXPECT_DOUBLE_EQ(phi_closed_form_from_dual(p, 0.5, {1, 2}, cols({{1, 2, 3}})), 2.75);
  EXPECT_DOUBLE_EQ(phi_closed_form_from_dual(p, 0.5, {1, 3}, cols({{5, 1, 3}})), 4.0);
}

TEST(PhiClosedForm, VanishingSecondFactor) {
  // Gamma spans the complement of A = (0,1,2,3) and B = (1,0,0,0).
  const Curve v = veronese(3);
  const MinorSpec spec{{1, 2}, cols({{0, 2, -1, 0}, {0, 3, 0, -1}})};
  const IntMatrix dual = cols({{0, 1, 2, 3}, {1, 0, 0, 0}});
  ASSERT_TRUE(wedge_columns(dual).squared_norm() == wedge_columns(spec.Gamma).squared_norm());
  for (double x : {-0.8, 0.3, 1.1}) {
    const double expected = std::abs(1 + 4 * x + 9 * x * x);
    EXPECT_NEAR(phi_closed_form_from_dual(v, x, spec.I, dual), expected, 1e-12);
    EXPECT_NEAR(std::abs(phi_minor(v, x, spec)), expected, 1e-12);
  }
}

TEST(PhiClosedForm, AgreesWithMinorOnRandomDraws) {
  std::mt19937_64 rng(99);
  for (const Curve& c : {parabola(), veronese(3), veronese(4), exp_mix()})
    for (ClosedFormCase kind : {ClosedFormCase::Affine, ClosedFormCase::Derivative, ClosedFormCase::SkewGradient}) {
      const IdentityStats st = closed_form_sweep(c, {-1, 1}, kind, 200, rng);
      EXPECT_LE(st.max_error, 1e-9) << st.name;
    }
}

TEST(PhiClosedForm, RejectsOtherIndexSets) {
  EXPECT_THROW(phi_closed_form(parabola(), 0.5, {{2, 3}, cols({{1, 0, 0}, {0, 1, 0}})}), PreconditionError);
  EXPECT_FALSE(closed_form_case({1}, 3).has_value());
  EXPECT_EQ(closed_form_case({1}, 2), ClosedFormCase::SkewGradient);
}

TEST(ScaleFactor, Examples) {
  EXPECT_DOUBLE_EQ(scale_factor({1}, 2, 1.0, 100, 0.1), 10.0);
  EXPECT_NEAR(scale_factor({2}, 2, 1.0, 100, 0.1), 10.0, 1e-12);
  EXPECT_NEAR(scale_factor({2, 3}, 2, 1.0, 100, 0.1), 0.1, 1e-15);
  EXPECT_NEAR(scale_factor({3}, 2, 1.0, 100, 0.1), 0.01, 1e-15);
}

TEST(ScaleFactor, MinorOfHIdentity) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> xs(0.1, 0.9), cs(0.05, 2.0), ps(0.05, 0.95);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 2 + trial % 3;
    const Curve c = veronese(n);
    const ApproxParams p = ApproxParams::for_curve(c, cs(rng), 1000, ps(rng));
    std::vector<int> all(static_cast<std::size_t>(n + 1));
    std::iota(all.begin(), all.end(), 1);
    std::shuffle(all.begin(), all.end(), rng);
    const int r = 1 + trial % (n + 1);
    std::vector<int> I(all.begin(), all.begin() + r);
    std::sort(I.begin(), I.end());
    const IntMatrix gamma = random_full_rank(rng, n + 1, r, -3, 3);
    const double x = xs(rng);
    const double lhs = (rows_of(build_h(c, x, p), I) * gamma.cast<double>()).determinant();
    const double phi = phi_minor(c, x, {I, gamma});
    const double unscaled = lhs / (std::pow(p.c, static_cast<double>(r) / (n + 1)) * scale_factor(I, p));
    EXPECT_NEAR(unscaled, phi, 1e-9 * std::max(1.0, std::abs(phi)));
  }
}
