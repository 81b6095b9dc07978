#pragma once

// Witness extraction for the good set: every x with delta(g^{-1}G(x)Z^{n+1}) >= 1
// yields an integer point (q, a, b) whose shifted rational point (a + lambda)/q
// lies close to x and whose curve values are close to integers shifted by gamma.

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ratpts/common.hpp"
#include "ratpts/curve.hpp"
#include "ratpts/lattice.hpp"

namespace ratpts {

/// Width of the band around the threshold delta = 1 treated as undecided.
inline constexpr double kGoodSetGuard = 1e-9;

struct RationalWitness {
  long long q = 0;
  std::vector<long long> a;
  std::vector<long long> b;

  friend bool operator==(const RationalWitness&, const RationalWitness&) = default;
  friend auto operator<=>(const RationalWitness&, const RationalWitness&) = default;
};

struct DerivedConstants {
  int n = 0, d = 0, m = 0;
  double M = 0.0;
  double c = 0.0;
  double K0 = 0.0;
  double C0 = 0.0;

  double omega0(double Q) const { return 3.0 * (n + 1) * Q; }
  /// (1 + M d^2 / (2c)) (n+1) / c: converts psi into the f-inequality limit.
  double psi_factor() const { return (1.0 + M * d * d / (2.0 * c)) * (n + 1) / c; }
  /// rho = C0 (psi^m Q^{d+1})^{-1/d}; for d = 1 this is C0 / (psi^{n-1} Q^2).
  double rho(double Q, double psi) const { return C0 * std::pow(std::pow(psi, m) * std::pow(Q, d + 1), -1.0 / d); }
};

inline DerivedConstants derive_constants(int n, int d, int m, double M, double c) {
  if (n <= 0 || d <= 0 || m <= 0 || c <= 0.0 || M < 0.0 || !std::isfinite(M) || !std::isfinite(c))
    throw PreconditionError("derive_constants: inputs must be positive (M may be zero)");
  if (n != d + m) throw PreconditionError("derive_constants: n must equal d + m");
  DerivedConstants k;
  k.n = n;
  k.d = d;
  k.m = m;
  k.M = M;
  k.c = c;
  const double base = 4.0 * (n + 1);
  k.K0 = std::pow(base, static_cast<double>(d + 2) / (2 * m + d)) * k.psi_factor();
  k.C0 = (1.0 / (2.0 * c)) * std::pow(std::pow(base, d + 1) * std::pow(k.psi_factor(), m), 1.0 / d);
  return k;
}

struct CorollaryMap {
  double Q = 0.0;
  double psi = 0.0;
  double rho = 0.0;      // (1/2c)(psi^m Q^{d+1})^{-1/d}
  double rho_alt = 0.0;  // C0 (psi~^m Q~^{d+1})^{-1/d}
};

/// Translates (Q~, psi~) into the (Q, psi, rho) at which the good set is examined.
inline CorollaryMap corollary_map(double Q_tilde, double psi_tilde, const DerivedConstants& k) {
  if (!(Q_tilde > 0.0) || !(psi_tilde > 0.0)) throw PreconditionError("corollary_map: Q~ and psi~ must be positive");
  const double floor_psi = k.K0 * std::pow(Q_tilde, -static_cast<double>(k.d + 2) / (2 * k.m + k.d));
  if (psi_tilde < floor_psi)
    throw PreconditionError("corollary_map: psi~ = " + std::to_string(psi_tilde) + " below K0 Q~^{-(d+2)/(2m+d)} = " +
                            std::to_string(floor_psi));
  CorollaryMap out;
  out.Q = Q_tilde / (4.0 * (k.n + 1));
  out.psi = psi_tilde / k.psi_factor();
  out.rho = (1.0 / (2.0 * k.c)) * std::pow(std::pow(out.psi, k.m) * std::pow(out.Q, k.d + 1), -1.0 / k.d);
  out.rho_alt = k.rho(Q_tilde, psi_tilde);
  return out;
}

/// rho = (1/2c) (psi^m Q^{d+1})^{-1/d}, the radius tying x to its witness.
inline double witness_radius(const ApproxParams& p) {
  return (1.0 / (2.0 * p.c)) * std::pow(std::pow(p.psi, p.m) * std::pow(p.Q, p.d + 1), -1.0 / p.d);
}

// --------------------------------------------------------------------------
// Good set
// --------------------------------------------------------------------------

struct GoodSetStatus {
  double delta = 0.0;
  bool good = false;      // delta >= 1 - guard
  bool boundary = false;  // |delta - 1| < guard
};

inline GoodSetStatus good_set_status(const Curve& curve, double x, const ApproxParams& p,
                                     double guard = kGoodSetGuard) {
  p.validate_for(curve);
  GoodSetStatus s;
  s.delta = shortest_sup(scaled_lattice_basis(curve, x, p)).delta;
  s.good = s.delta >= 1.0 - guard;
  s.boundary = std::abs(s.delta - 1.0) < guard;
  return s;
}

inline bool in_good_set(const Curve& curve, double x, const ApproxParams& p, double guard = kGoodSetGuard) {
  return good_set_status(curve, x, p, guard).good;
}

struct GoodSetSummary {
  int points = 0;
  int good = 0;
  int boundary = 0;
  double fraction = 0.0;  // good (boundary excluded unless requested) / points
};

/// Fraction of a uniform grid of `points` cell midpoints of B lying in the good set.
inline GoodSetSummary good_set_fraction(const Curve& curve, const ApproxParams& p, int points,
                                        bool include_boundary = false) {
  GoodSetSummary out;
  out.points = points;
  for (int i = 0; i < points; ++i) {
    const double x = p.B.lo + (i + 0.5) * p.B.length() / points;
    const GoodSetStatus s = good_set_status(curve, x, p);
    if (s.boundary) ++out.boundary;
    if (s.good && (include_boundary || !s.boundary)) ++out.good;
  }
  out.fraction = points ? static_cast<double>(out.good) / points : 0.0;
  return out;
}

// --------------------------------------------------------------------------
// Witness construction and verification
// --------------------------------------------------------------------------

struct Detection {
  RationalWitness witness;
  Eigen::VectorXd eta;
  double max_basis_sup = 0.0;
  /// Set when no basis inside the sup-norm ball of radius 1/c was found.
  bool basis_diagnostic = false;
};

namespace detail {
inline LatticeBasis witness_basis(const Eigen::MatrixXd& basis, double c) {
  LatticeBasis red = reduced_basis(basis);
  if (red.max_sup_norm <= (1.0 + 1e-9) / c || basis.cols() > kMaxMinimaDim) return red;
  // The LLL basis is too long: try the vectors attaining the successive minima.
  const SuccessiveMinima sm = successive_minima_sup(basis);
  if (static_cast<Eigen::Index>(sm.values.size()) == basis.cols() && is_unimodular(sm.achieving_vectors)) {
    LatticeBasis alt;
    alt.dim = red.dim;
    alt.preimage = sm.achieving_vectors;
    alt.columns = basis * sm.achieving_vectors.cast<double>();
    alt.max_sup_norm = sm.values.back();
    if (alt.max_sup_norm < red.max_sup_norm) return alt;
  }
  return red;
}
}  // namespace detail

inline Detection detect_witness(const Curve& curve, double x, const ApproxParams& p) {
  p.validate_for(curve);
  const int n = p.n();
  const double psi_floor = std::pow(p.Q, -static_cast<double>(p.d + 2) / (2 * p.m + p.d));
  if (p.psi < psi_floor) throw PreconditionError("detect_witness: psi below Q^{-(d+2)/(2m+d)}");
  const double rho = witness_radius(p);
  if (!(x - rho >= p.B.lo && x + rho <= p.B.hi))
    throw PreconditionError("detect_witness: x = " + std::to_string(x) + " not in the rho-interior of B");
  const Eigen::MatrixXd basis = scaled_lattice_basis(curve, x, p);
  if (shortest_sup(basis).delta < 1.0 - kGoodSetGuard)
    throw PreconditionError("detect_witness: x = " + std::to_string(x) + " is not in the good set");

  const LatticeBasis red = detail::witness_basis(basis, p.c);
  Detection out;
  out.max_basis_sup = red.max_sup_norm;
  out.basis_diagnostic = red.max_sup_norm > (1.0 + 1e-9) / p.c;

  // Target -(g^{-1}G(x)) w with w = (-omega0, lambda - omega0 x, gamma - omega0 f(x)).
  const double omega0 = 3.0 * (n + 1) * p.Q;
  Eigen::VectorXd w(n + 1);
  w(0) = -omega0;
  w(1) = p.lambda[0] - omega0 * x;
  for (int j = 0; j < p.m; ++j) w(2 + j) = p.gamma[static_cast<std::size_t>(j)] - omega0 * curve.f(j, x);
  const Eigen::VectorXd target = -(basis * w);
  out.eta = red.columns.fullPivLu().solve(target);

  IntVector t(n + 1);
  for (int i = 0; i <= n; ++i) t(i) = static_cast<long long>(std::llround(out.eta(i)));
  if (t.isZero()) {
    Eigen::Index istar = 0;
    out.eta.cwiseAbs().maxCoeff(&istar);
    t(istar) = out.eta(istar) < 0.0 ? -1 : 1;
  }
  IntVector pvec = red.preimage * t;
  if (pvec(0) < 0 && p.homogeneous()) pvec = -pvec;

  out.witness.q = pvec(0);
  out.witness.a = {pvec(1)};
  for (int j = 0; j < p.m; ++j) out.witness.b.push_back(pvec(2 + j));
  return out;
}

struct InequalityCheck {
  double value = 0.0;
  double limit = 0.0;
  bool ok = false;
  double slack() const { return limit - value; }
};

struct WitnessReport {
  bool q_range_ok = false;
  std::vector<InequalityCheck> x_bounds;
  std::vector<InequalityCheck> f_bounds;
  /// |x - (a + lambda)/q| < rho; implied by the other conclusions.
  bool point_in_ball = false;
  bool all_ok = false;
};

inline WitnessReport verify_witness(const RationalWitness& w, const Curve& curve, double x, const ApproxParams& p,
                                    const DerivedConstants& k) {
  WitnessReport r;
  const int n = p.n();
  // 2(n+1)Q < q < 4(n+1)Q, in integers when Q is integral.
  if (std::floor(p.Q) == p.Q && p.Q < 1e15) {
    const __int128 qq = w.q, base = static_cast<__int128>(n + 1) * static_cast<long long>(p.Q);
    r.q_range_ok = 2 * base < qq && qq < 4 * base;
  } else {
    const double q = static_cast<double>(w.q);
    r.q_range_ok = 2.0 * (n + 1) * p.Q < q && q < 4.0 * (n + 1) * p.Q;
  }
  if (w.q == 0 || w.a.size() != 1 || static_cast<int>(w.b.size()) != p.m) return r;

  const long double q = static_cast<long double>(w.q);
  const long double shifted = (static_cast<long double>(w.a[0]) + p.lambda[0]) / q;
  InequalityCheck xb;
  xb.value = static_cast<double>(std::fabs(q * x - w.a[0] - p.lambda[0]));
  xb.limit = (n + 1) / p.c * std::pow(std::pow(p.psi, p.m) * p.Q, -1.0 / p.d);
  xb.ok = xb.value < xb.limit;
  r.x_bounds.push_back(xb);

  const double f_limit = (1.0 + k.M * p.d * p.d / (2.0 * p.c)) * (n + 1) / p.c * p.psi;
  const bool in_domain = curve.domain().contains(static_cast<double>(shifted));
  for (int j = 0; j < p.m; ++j) {
    InequalityCheck fb;
    fb.limit = f_limit;
    if (in_domain) {
      const long double fv = curve.f_ext(j, shifted);
      fb.value = static_cast<double>(std::fabs(q * fv - w.b[static_cast<std::size_t>(j)] - p.gamma[static_cast<std::size_t>(j)]));
    } else {
      fb.value = std::numeric_limits<double>::infinity();
    }
    fb.ok = fb.value < fb.limit;
    r.f_bounds.push_back(fb);
  }
  r.point_in_ball = std::fabs(static_cast<long double>(x) - shifted) < witness_radius(p);
  r.all_ok = r.q_range_ok && xb.ok &&
             std::all_of(r.f_bounds.begin(), r.f_bounds.end(), [](const InequalityCheck& c) { return c.ok; });
  return r;
}

}  // namespace ratpts
