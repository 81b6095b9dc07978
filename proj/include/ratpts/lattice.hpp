#pragma once

// The curve lattices g^{-1} G(x) Z^{n+1}: matrix builders, floating-point LLL,
// exhaustive sup-norm shortest vectors and sup-norm successive minima.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ratpts/common.hpp"
#include "ratpts/curve.hpp"
#include "ratpts/intmat.hpp"

namespace ratpts {

/// Parameter record (c, Q, psi, B, theta = (lambda, gamma), d, m).
struct ApproxParams {
  double c = 1.0;
  double Q = 2.0;
  double psi = 0.5;
  int d = 1;
  int m = 1;
  Interval B{0.0, 1.0};
  std::vector<double> lambda{0.0};
  std::vector<double> gamma{0.0};

  int n() const noexcept { return d + m; }

  bool homogeneous() const noexcept {
    return std::all_of(lambda.begin(), lambda.end(), [](double v) { return v == 0.0; }) &&
           std::all_of(gamma.begin(), gamma.end(), [](double v) { return v == 0.0; });
  }

  void validate() const {
    if (!(c > 0.0)) throw PreconditionError("ApproxParams: c must be positive");
    if (!(Q > 1.0)) throw PreconditionError("ApproxParams: Q must exceed 1");
    if (!(psi > 0.0 && psi < 1.0)) throw PreconditionError("ApproxParams: psi must lie in (0,1)");
    if (d < 1 || m < 1) throw PreconditionError("ApproxParams: d and m must be positive");
    if (static_cast<int>(lambda.size()) != d) throw PreconditionError("ApproxParams: lambda must have length d");
    if (static_cast<int>(gamma.size()) != m) throw PreconditionError("ApproxParams: gamma must have length m");
  }

  void validate_for(const Curve& curve) const {
    validate();
    if (d != 1) throw PreconditionError("ApproxParams: curves require d = 1");
    if (n() != curve.n())
      throw PreconditionError("ApproxParams: n = " + std::to_string(n()) + " does not match curve dimension " +
                              std::to_string(curve.n()));
  }

  /// Parameters for a curve with zero shift.
  static ApproxParams for_curve(const Curve& curve, double c, double Q, double psi, Interval B = {0.0, 1.0}) {
    ApproxParams p;
    p.c = c;
    p.Q = Q;
    p.psi = psi;
    p.d = 1;
    p.m = curve.m();
    p.B = B;
    p.lambda.assign(1, 0.0);
    p.gamma.assign(static_cast<std::size_t>(curve.m()), 0.0);
    return p;
  }
};

struct LatticeBasis {
  int dim = 0;
  Eigen::MatrixXd columns;
  IntMatrix preimage;
  double max_sup_norm = 0.0;
};

struct SuccessiveMinima {
  std::vector<double> values;
  IntMatrix achieving_vectors;  // columns, coordinates w.r.t. the input basis
  double covolume = 0.0;
  /// prod(mu_i) / covolume, which Minkowski places in [1/dim!, 1] for the unit cube.
  double minkowski_ratio = 0.0;
  bool minkowski_ok = false;
};

struct ShortestVector {
  double delta = 0.0;
  IntVector coords;  // w.r.t. the input basis
};

/// Lattice dimension limits.
inline constexpr int kMaxSvpDim = 8;
inline constexpr int kMaxMinimaDim = 6;

inline double sup_norm(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

// --------------------------------------------------------------------------
// Matrix builders
// --------------------------------------------------------------------------

/// G for general (d, m) from g_j, the Jacobian df_j/dx_i and the point x.
/// Row order: m function rows, d coordinate rows, then (1, 0, ..., 0).
inline Eigen::MatrixXd build_G_general(const Eigen::VectorXd& g, const Eigen::MatrixXd& jacobian,
                                       const Eigen::VectorXd& x) {
  const Eigen::Index m = g.size(), d = x.size(), n = d + m;
  if (jacobian.rows() != m || jacobian.cols() != d) throw std::invalid_argument("build_G: jacobian shape mismatch");
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n + 1, n + 1);
  for (Eigen::Index j = 0; j < m; ++j) {
    G(j, 0) = g(j);
    for (Eigen::Index i = 0; i < d; ++i) G(j, 1 + i) = jacobian(j, i);
    G(j, 1 + d + j) = -1.0;
  }
  for (Eigen::Index i = 0; i < d; ++i) {
    G(m + i, 0) = x(i);
    G(m + i, 1 + i) = -1.0;
  }
  G(n, 0) = 1.0;
  return G;
}

inline Eigen::MatrixXd build_G(const Curve& curve, double x) {
  const Jet jet = eval_jet(curve, x, 1);
  const int m = curve.m();
  Eigen::VectorXd g(m);
  Eigen::MatrixXd jac(m, 1);
  for (int j = 0; j < m; ++j) {
    jac(j, 0) = jet.values(j + 1, 1);
    g(j) = jet.values(j + 1, 0) - x * jac(j, 0);
  }
  return build_G_general(g, jac, Eigen::VectorXd::Constant(1, x));
}

/// Diagonal of g(c, Q, psi) = diag{psi (m times), (psi^m Q)^{-1/d} (d times), cQ}.
inline Eigen::VectorXd scaling_diagonal(double c, double Q, double psi, int d, int m) {
  Eigen::VectorXd diag(d + m + 1);
  for (int j = 0; j < m; ++j) diag(j) = psi;
  const double mid = std::pow(std::pow(psi, m) * Q, -1.0 / d);
  for (int i = 0; i < d; ++i) diag(m + i) = mid;
  diag(d + m) = c * Q;
  return diag;
}

inline Eigen::MatrixXd build_scaling(double c, double Q, double psi, int d, int m) {
  return scaling_diagonal(c, Q, psi, d, m).asDiagonal();
}

inline Eigen::MatrixXd build_scaling(const ApproxParams& p) {
  p.validate();
  return build_scaling(p.c, p.Q, p.psi, p.d, p.m);
}

/// g^{-1} G(x): columns generate the lattice whose shortness defines the good set.
inline Eigen::MatrixXd scaled_lattice_basis(const Curve& curve, double x, const ApproxParams& p) {
  const Eigen::VectorXd diag = scaling_diagonal(p.c, p.Q, p.psi, p.d, p.m);
  return diag.cwiseInverse().asDiagonal() * build_G(curve, x);
}

/// h(x) = c^{1/(n+1)} g^{-1} G(x), a unimodular matrix.
inline Eigen::MatrixXd build_h(const Curve& curve, double x, const ApproxParams& p) {
  p.validate_for(curve);
  return std::pow(p.c, 1.0 / (p.n() + 1)) * scaled_lattice_basis(curve, x, p);
}

// --------------------------------------------------------------------------
// Reduction and enumeration
// --------------------------------------------------------------------------

namespace detail {

struct GramSchmidt {
  Eigen::MatrixXd mu;     // mu(i, j) for j < i
  Eigen::VectorXd norms;  // |b*_i|^2
};

inline GramSchmidt gram_schmidt(const Eigen::MatrixXd& b) {
  const Eigen::Index n = b.cols();
  GramSchmidt gs{Eigen::MatrixXd::Zero(n, n), Eigen::VectorXd::Zero(n)};
  Eigen::MatrixXd star = b;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      gs.mu(i, j) = b.col(i).dot(star.col(j)) / gs.norms(j);
      star.col(i) -= gs.mu(i, j) * star.col(j);
    }
    gs.norms(i) = star.col(i).squaredNorm();
  }
  return gs;
}

inline void check_basis(const Eigen::MatrixXd& basis, const char* who) {
  if (basis.rows() != basis.cols() || basis.rows() == 0)
    throw PreconditionError(std::string(who) + ": basis must be a nonempty square matrix");
  if (!basis.allFinite()) throw PreconditionError(std::string(who) + ": basis has non-finite entries");
  if (numerical_rank(basis, 1e-13) < basis.cols()) throw PreconditionError(std::string(who) + ": singular basis");
}

}  // namespace detail

/// In-place LLL on the columns of `b` (Lovasz parameter `delta`); `u` receives
/// the unimodular transform with b_out = b_in * u.
inline void lll_reduce(Eigen::MatrixXd& b, IntMatrix& u, double delta = 0.99) {
  const Eigen::Index n = b.cols();
  u = IntMatrix::Identity(n, n);
  if (n <= 1) return;
  detail::GramSchmidt gs = detail::gram_schmidt(b);
  Eigen::Index k = 1;
  long iterations = 0;
  while (k < n) {
    if (++iterations > 1'000'000) throw std::runtime_error("lll_reduce: iteration limit exceeded");
    for (Eigen::Index j = k - 1; j >= 0; --j) {
      const double r = std::round(gs.mu(k, j));
      if (r == 0.0) continue;
      if (std::abs(r) > 9.0e15) throw std::overflow_error("lll_reduce: size-reduction coefficient overflow");
      const long long q = static_cast<long long>(r);
      b.col(k) -= r * b.col(j);
      u.col(k) -= q * u.col(j);
      for (Eigen::Index i = 0; i < j; ++i) gs.mu(k, i) -= r * gs.mu(j, i);
      gs.mu(k, j) -= r;
    }
    const double lhs = gs.norms(k);
    const double rhs = (delta - gs.mu(k, k - 1) * gs.mu(k, k - 1)) * gs.norms(k - 1);
    if (lhs >= rhs) {
      ++k;
    } else {
      b.col(k).swap(b.col(k - 1));
      u.col(k).swap(u.col(k - 1));
      gs = detail::gram_schmidt(b);
      k = std::max<Eigen::Index>(k - 1, 1);
    }
  }
}

/// Visits every nonzero integer y with |B y|_2^2 <= radius_sq. The callback may
/// shrink radius_sq through the reference it receives.
inline void enumerate_ball(const Eigen::MatrixXd& b, double& radius_sq,
                           const std::function<void(const Eigen::VectorXd& y, const Eigen::VectorXd& v)>& visit) {
  const Eigen::Index n = b.cols();
  const detail::GramSchmidt gs = detail::gram_schmidt(b);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
  std::function<void(Eigen::Index, double)> recurse = [&](Eigen::Index i, double partial) {
    double center = 0.0;
    for (Eigen::Index j = i + 1; j < n; ++j) center -= y(j) * gs.mu(j, i);
    const double slack = radius_sq - partial;
    if (slack < 0.0) return;
    const double width = std::sqrt(slack / gs.norms(i));
    const double lo = std::ceil(center - width), hi = std::floor(center + width);
    for (double t = lo; t <= hi; t += 1.0) {
      const double diff = t - center;
      const double next = partial + diff * diff * gs.norms(i);
      if (next > radius_sq) continue;
      y(i) = t;
      if (i == 0) {
        if (!y.isZero()) visit(y, b * y);
      } else {
        recurse(i - 1, next);
      }
    }
    y(i) = 0.0;
  };
  recurse(n - 1, 0.0);
}

inline LatticeBasis reduced_basis(const Eigen::MatrixXd& basis, double delta = 0.99) {
  detail::check_basis(basis, "reduced_basis");
  LatticeBasis out;
  out.dim = static_cast<int>(basis.cols());
  out.columns = basis;
  lll_reduce(out.columns, out.preimage, delta);
  for (Eigen::Index i = 0; i < out.columns.cols(); ++i)
    out.max_sup_norm = std::max(out.max_sup_norm, sup_norm(out.columns.col(i)));
  return out;
}

namespace detail {
inline IntVector to_int(const Eigen::VectorXd& y) {
  IntVector out(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) out(i) = static_cast<long long>(std::llround(y(i)));
  return out;
}
}  // namespace detail

/// delta(L) = min over nonzero lattice vectors of the sup-norm, found exactly by
/// LLL followed by enumeration of the Euclidean ball of radius sqrt(dim) * best.
inline ShortestVector shortest_sup(const Eigen::MatrixXd& basis) {
  detail::check_basis(basis, "shortest_sup");
  if (basis.cols() > kMaxSvpDim) throw PreconditionError("shortest_sup: dimension exceeds 8");
  const double dim = static_cast<double>(basis.cols());
  LatticeBasis red = reduced_basis(basis);
  ShortestVector best;
  best.delta = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_y;
  for (Eigen::Index i = 0; i < red.columns.cols(); ++i) {
    const double s = sup_norm(red.columns.col(i));
    if (s < best.delta) {
      best.delta = s;
      best_y = Eigen::VectorXd::Unit(red.columns.cols(), i);
    }
  }
  // |v|_inf <= |v|_2 <= sqrt(dim) |v|_inf, so this ball holds every shorter vector.
  double radius_sq = dim * best.delta * best.delta * (1.0 + 1e-12);
  enumerate_ball(red.columns, radius_sq, [&](const Eigen::VectorXd& y, const Eigen::VectorXd& v) {
    const double s = sup_norm(v);
    if (s < best.delta) {
      best.delta = s;
      best_y = y;
      radius_sq = dim * s * s * (1.0 + 1e-12);
    }
  });
  best.coords = red.preimage * detail::to_int(best_y);
  return best;
}

/// Sup-norm successive minima via enumeration of all vectors no longer than
/// the longest LLL basis vector.
inline SuccessiveMinima successive_minima_sup(const Eigen::MatrixXd& basis) {
  detail::check_basis(basis, "successive_minima_sup");
  if (basis.cols() > kMaxMinimaDim) throw PreconditionError("successive_minima_sup: dimension exceeds 6");
  const Eigen::Index n = basis.cols();
  const LatticeBasis red = reduced_basis(basis);
  const double bound = red.max_sup_norm * (1.0 + 1e-12);
  struct Candidate {
    double sup;
    Eigen::VectorXd y;
  };
  std::vector<Candidate> found;
  double radius_sq = static_cast<double>(n) * bound * bound;
  enumerate_ball(red.columns, radius_sq, [&](const Eigen::VectorXd& y, const Eigen::VectorXd& v) {
    const double s = sup_norm(v);
    if (s <= bound) found.push_back({s, y});
  });
  std::stable_sort(found.begin(), found.end(), [](const Candidate& a, const Candidate& b) { return a.sup < b.sup; });

  SuccessiveMinima out;
  out.achieving_vectors = IntMatrix::Zero(n, n);
  Eigen::MatrixXd span(n, 0);
  for (const auto& cand : found) {
    if (static_cast<Eigen::Index>(out.values.size()) == n) break;
    Eigen::MatrixXd trial(n, span.cols() + 1);
    trial << span, cand.y;
    if (numerical_rank(trial, 1e-10) == trial.cols()) {
      span = trial;
      out.achieving_vectors.col(static_cast<Eigen::Index>(out.values.size())) = red.preimage * detail::to_int(cand.y);
      out.values.push_back(cand.sup);
    }
  }
  out.covolume = std::abs(basis.determinant());
  double prod = 1.0;
  for (double v : out.values) prod *= v;
  out.minkowski_ratio = prod / out.covolume;
  double fact = 1.0;
  for (Eigen::Index i = 2; i <= n; ++i) fact *= static_cast<double>(i);
  out.minkowski_ok = out.minkowski_ratio >= (1.0 / fact) * (1.0 - 1e-9) && out.minkowski_ratio <= 1.0 + 1e-9;
  return out;
}

}  // namespace ratpts
