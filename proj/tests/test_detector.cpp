#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "ratpts/counting.hpp"
#include "ratpts/detector.hpp"

using namespace ratpts;

namespace {

// delta(g^{-1}G(x) Z^3) for the parabola by direct search over q: the lattice
// vector of (q, a, b) is ((q g + a f' - b)/psi, (q x - a) psi Q, q/(cQ)).
double parabola_delta_oracle(double x, double c, double Q, double psi) {
  const double g = -x * x, fd = 2.0 * x;
  double best = 1.0 / psi;  // q = a = 0, b = 1
  for (long long q = 1; static_cast<double>(q) / (c * Q) < best; ++q) {
    const long long a0 = std::llround(static_cast<double>(q) * x);
    for (long long a = a0 - 1; a <= a0 + 1; ++a) {
      const double F = static_cast<double>(q) * g + static_cast<double>(a) * fd;
      const double v = std::max({std::abs(F - std::nearbyint(F)) / psi, std::abs(q * x - a) * psi * Q, q / (c * Q)});
      best = std::min(best, v);
    }
  }
  return best;
}

double first_good_point(const Curve& curve, const ApproxParams& p, double from, double step) {
  for (double x = from; x < from + 2000 * step; x += step)
    if (in_good_set(curve, x, p)) return x;
  return std::nan("");
}

}  // namespace

TEST(DeriveConstants, Examples) {
  const DerivedConstants k = derive_constants(2, 1, 1, 2.0, 1.0);
  EXPECT_NEAR(k.K0, 72.0, 1e-12);
  EXPECT_NEAR(k.C0, 432.0, 1e-10);
  EXPECT_NEAR(k.rho(100, 0.1), 0.432, 1e-15);
  EXPECT_DOUBLE_EQ(k.omega0(100), 900.0);
  const DerivedConstants flat = derive_constants(2, 1, 1, 0.0, 1.0);
  EXPECT_DOUBLE_EQ(flat.psi_factor(), 3.0);
  EXPECT_THROW(derive_constants(2, 1, 1, 2.0, 0.0), PreconditionError);
  EXPECT_THROW(derive_constants(0, 1, 1, 2.0, 1.0), PreconditionError);
}

TEST(CorollaryMap, Examples) {
  const DerivedConstants k = derive_constants(2, 1, 1, 2.0, 1.0);
  const CorollaryMap m = corollary_map(1200, 0.3, k);
  EXPECT_DOUBLE_EQ(m.Q, 100.0);
  EXPECT_DOUBLE_EQ(m.psi, 0.3 / 6.0);
  EXPECT_DOUBLE_EQ(2 * 3 * m.Q, 1200 / 2.0);
  EXPECT_THROW(corollary_map(1200, 0.01, k), PreconditionError);
}

TEST(CorollaryMap, RadiusFormulasAgree) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> cs(0.05, 2.0), Ms(0.0, 10.0), lq(3.0, 9.0), ps(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const int n = 2 + i % 4;
    const DerivedConstants k = derive_constants(n, 1, n - 1, Ms(rng), cs(rng));
    const double Qt = std::pow(10.0, lq(rng));
    const double floor_psi = k.K0 * std::pow(Qt, -3.0 / (2 * n - 1));
    const double psit = floor_psi * (1.0 + 10.0 * ps(rng));
    const CorollaryMap m = corollary_map(Qt, psit, k);
    EXPECT_NEAR(m.rho, m.rho_alt, 1e-12 * m.rho_alt);
  }
}

TEST(GoodSet, MonotoneInC) {
  const Curve c = parabola();
  for (int i = 0; i < 300; ++i) {
    const double x = 0.1 + (i + 0.5) * 0.8 / 300 + 1e-7 * std::sqrt(3.0);
    ApproxParams p = ApproxParams::for_curve(c, 0.1, 1e4, 0.3, {0.1, 0.9});
    const bool big = in_good_set(c, x, p);
    p.c = 0.05;
    if (big) EXPECT_TRUE(in_good_set(c, x, p)) << x;
  }
}

TEST(GoodSet, ThirdMatchesDirectSearch) {
  const Curve c = parabola();
  const ApproxParams p = ApproxParams::for_curve(c, 0.01, 1e4, 0.3, {0.1, 0.9});
  const double oracle = parabola_delta_oracle(1.0 / 3.0, 0.01, 1e4, 0.3);
  const GoodSetStatus st = good_set_status(c, 1.0 / 3.0, p);
  EXPECT_NEAR(st.delta, oracle, 1e-12);
  EXPECT_EQ(st.good, oracle >= 1.0 - kGoodSetGuard);
}

TEST(GoodSet, DeltaMatchesDirectSearchOnGrid) {
  const Curve c = parabola();
  for (double cc : {1.0, 0.1, 0.02}) {
    const ApproxParams p = ApproxParams::for_curve(c, cc, 1e4, 0.3, {0.1, 0.9});
    for (int i = 0; i < 100; ++i) {
      const double x = 0.1 + (i + 0.5) * 0.008 + 1e-6 * std::sqrt(5.0);
      EXPECT_NEAR(good_set_status(c, x, p).delta, parabola_delta_oracle(x, cc, 1e4, 0.3), 1e-9) << x << " c=" << cc;
    }
  }
}

TEST(GoodSet, FractionAtSmallC) {
  const Curve c = parabola();
  const GoodSetSummary s = good_set_fraction(c, ApproxParams::for_curve(c, 0.05, 1e4, 0.3, {0.1, 0.9}), 1000);
  EXPECT_GE(s.fraction, 2.0 / 3.0);
}

TEST(DetectWitness, NearPointFour) {
  const Curve c = parabola();
  const ApproxParams p = ApproxParams::for_curve(c, 0.05, 1000, 0.3, {0.1, 0.9});
  const DerivedConstants k = derive_constants(2, 1, 1, 2.0, p.c);
  const double x = first_good_point(c, p, 0.4, 1e-4 * std::sqrt(2.0));
  ASSERT_FALSE(std::isnan(x));
  ASSERT_LT(x, 0.41);
  const Detection d = detect_witness(c, x, p);
  EXPECT_GT(d.witness.q, 6000);
  EXPECT_LT(d.witness.q, 12000);
  EXPECT_LT(std::abs(d.witness.q * x - d.witness.a[0]), 3.0 / (p.c * 300.0));
  const WitnessReport r = verify_witness(d.witness, c, x, p, k);
  EXPECT_TRUE(r.all_ok);
  EXPECT_TRUE(r.point_in_ball);
}

TEST(DetectWitness, RefusesOutsideGoodSet) {
  const Curve c = parabola();
  const ApproxParams p = ApproxParams::for_curve(c, 0.05, 1000, 0.3, {0.1, 0.9});
  ASSERT_FALSE(in_good_set(c, 0.4, p));
  EXPECT_THROW(detect_witness(c, 0.4, p), PreconditionError);
  EXPECT_THROW(detect_witness(c, 0.1, p), PreconditionError);
  ApproxParams low = p;
  low.psi = 1e-4;
  EXPECT_THROW(detect_witness(c, 0.5, low), PreconditionError);
}

TEST(DetectWitness, ShiftedTarget) {
  const Curve c = parabola();
  ApproxParams p = ApproxParams::for_curve(c, 0.05, 1e4, 0.3, {0.1, 0.9});
  p.lambda = {0.5};
  p.gamma = {0.5};
  const DerivedConstants k = derive_constants(2, 1, 1, 2.0, p.c);
  int checked = 0;
  for (int i = 0; i < 200; ++i) {
    const double x = 0.1 + (i + 0.5) * 0.004 + 1e-7 * std::sqrt(2.0);
    if (!in_good_set(c, x, p)) continue;
    const Detection d = detect_witness(c, x, p);
    const WitnessReport r = verify_witness(d.witness, c, x, p, k);
    EXPECT_TRUE(r.all_ok) << x;
    EXPECT_GT(d.witness.q, 0);
    ++checked;
  }
  EXPECT_GT(checked, 50);
}

TEST(VerifyWitness, ExactWitnessAndPerturbations) {
  const Curve c = parabola();
  const ApproxParams p = ApproxParams::for_curve(c, 1.0, 100, 0.1);
  const DerivedConstants k = derive_constants(2, 1, 1, 2.0, 1.0);
  const RationalWitness w{1000, {500}, {250}};
  EXPECT_TRUE(verify_witness(w, c, 0.5, p, k).all_ok);
  RationalWitness bumped = w;
  bumped.b[0] += 1;
  const WitnessReport r = verify_witness(bumped, c, 0.5, p, k);
  EXPECT_FALSE(r.all_ok);
  EXPECT_FALSE(r.f_bounds[0].ok);
  EXPECT_LT(r.f_bounds[0].limit, 1.0);
  const RationalWitness at_Q{100, {50}, {25}};
  EXPECT_FALSE(verify_witness(at_Q, c, 0.5, p, k).q_range_ok);
}

TEST(DetectWitness, SoundOverGrid) {
  const Curve c = parabola();
  for (double cc : {0.1, 0.02})
    for (double psi : {0.1, 0.3}) {
      const ApproxParams p = ApproxParams::for_curve(c, cc, 1e4, psi, {0.1, 0.9});
      const DerivedConstants k = derive_constants(2, 1, 1, 2.0, cc);
      int good = 0;
      for (int i = 0; i < 1000; ++i) {
        const double x = 0.1 + (i + 0.5) * 0.0008;
        const double rho = witness_radius(p);
        if (x - rho < 0.1 || x + rho > 0.9 || !in_good_set(c, x, p)) continue;
        ++good;
        const Detection d = detect_witness(c, x, p);
        const WitnessReport r = verify_witness(d.witness, c, x, p, k);
        ASSERT_TRUE(r.all_ok) << "x=" << x << " c=" << cc << " psi=" << psi;
        EXPECT_TRUE(r.point_in_ball);
      }
      EXPECT_GT(good, 100);
    }
}

TEST(DetectWitness, ConsistentWithCounting) {
  const Curve c = parabola();
  const double Qt = 65536, psit = 0.9;
  for (double cc : {0.1, 0.05}) {
    const DerivedConstants k = derive_constants(2, 1, 1, 2.0, cc);
    const CorollaryMap m = corollary_map(Qt, psit, k);
    const ApproxParams p = ApproxParams::for_curve(c, cc, m.Q, m.psi, {0.1, 0.9});
    int checked = 0;
    for (int i = 0; i < 60; ++i) {
      const double x = 0.15 + (i + 0.5) * 0.7 / 60 + 1e-7 * std::sqrt(2.0);
      if (!in_good_set(c, x, p)) continue;
      const RationalWitness w = detect_witness(c, x, p).witness;
      ASSERT_TRUE(verify_witness(w, c, x, p, k).all_ok);
      EXPECT_TRUE(in_R(w, c, Qt, psit, p.B));
      const double point = static_cast<double>(w.a[0]) / static_cast<double>(w.q);
      EXPECT_LT(std::abs(point - x), m.rho);
      const CountResult near = enumerate_R(c, static_cast<long long>(Qt), psit, {point - 1e-6, point + 1e-6});
      EXPECT_NE(std::find(near.witnesses.begin(), near.witnesses.end(), w), near.witnesses.end());
      ++checked;
    }
    EXPECT_GT(checked, 20);
  }
}
