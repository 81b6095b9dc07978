#pragma once

// (C, alpha)-good estimation, skew gradients and the minor functions
// phi_{I,Gamma}(x) = det(G_I(x) Gamma) together with their closed forms.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ratpts/common.hpp"
#include "ratpts/curve.hpp"
#include "ratpts/exterior.hpp"
#include "ratpts/intmat.hpp"
#include "ratpts/lattice.hpp"
#include "ratpts/taylor.hpp"

namespace ratpts {

using ScalarFn = std::function<Taylor(const Taylor&)>;

// --------------------------------------------------------------------------
// (C, alpha)-good estimator
// --------------------------------------------------------------------------

struct GoodnessOptions {
  int depth = 3;  // dyadic subdivision levels below the full interval
  std::vector<double> eps;  // empty: 10^{-k/8} for k = 0..32
  /// Sublevel sets covering fewer grid cells than this are not resolved and skipped.
  int min_cells = 32;
  /// Optional Lipschitz constant; raises each grid sup by L h / 2.
  double lipschitz = 0.0;
};

struct GoodnessReport {
  double alpha = 0.0;
  double empirical_C = 0.0;
  int grid_size = 0;
  Interval worst_interval = Interval::empty_interval();
  double worst_epsilon = 0.0;
};

inline std::vector<double> default_eps_grid() {
  std::vector<double> e;
  for (int k = 0; k <= 32; ++k) e.push_back(std::pow(10.0, -k / 8.0));
  return e;
}

/// max over dyadic subintervals J and eps of |{x in J : |f| < eps sup_J |f|}| / (eps^alpha |J|),
/// with measures and sups taken on a midpoint grid.
inline GoodnessReport ca_good_ratio(const std::function<double(double)>& f, const Interval& interval, double alpha,
                                    int grid, const GoodnessOptions& opt = {}) {
  if (grid < 1000) throw PreconditionError("ca_good_ratio: grid must be at least 1000");
  if (interval.empty() || interval.length() == 0.0) throw PreconditionError("ca_good_ratio: empty interval");
  const int pieces = 1 << opt.depth;
  const int cells = (grid + pieces - 1) / pieces * pieces;
  const double h = interval.length() / cells;
  std::vector<double> vals(static_cast<std::size_t>(cells));
  for (int i = 0; i < cells; ++i) {
    const double v = f(interval.lo + (i + 0.5) * h);
    if (!std::isfinite(v)) throw PreconditionError("ca_good_ratio: f not evaluable on the grid");
    vals[static_cast<std::size_t>(i)] = std::abs(v);
  }
  const std::vector<double> eps = opt.eps.empty() ? default_eps_grid() : opt.eps;

  GoodnessReport rep;
  rep.alpha = alpha;
  rep.grid_size = cells;
  std::vector<double> sorted;
  for (int level = 0; level <= opt.depth; ++level) {
    const int parts = 1 << level, width = cells / parts;
    for (int p = 0; p < parts; ++p) {
      const auto first = vals.begin() + static_cast<std::ptrdiff_t>(p) * width;
      sorted.assign(first, first + width);
      std::sort(sorted.begin(), sorted.end());
      const double sup = sorted.back() + opt.lipschitz * h / 2.0;
      if (sup <= 0.0) continue;
      const double len = width * h;
      for (double e : eps) {
        const auto below = std::lower_bound(sorted.begin(), sorted.end(), e * sup) - sorted.begin();
        if (below == 0 || below < opt.min_cells) continue;
        const double ratio = static_cast<double>(below) * h / (std::pow(e, alpha) * len);
        if (ratio > rep.empirical_C) {
          rep.empirical_C = ratio;
          rep.worst_interval = {interval.lo + p * len, interval.lo + (p + 1) * len};
          rep.worst_epsilon = e;
        }
      }
    }
  }
  return rep;
}

/// g1 g2' - g1' g2 at x.
inline double skew_gradient(const ScalarFn& g1, const ScalarFn& g2, double x) {
  const Taylor t = Taylor::variable(x, 1);
  const Taylor a = g1(t), b = g2(t);
  return a.coeff(0) * b.coeff(1) - a.coeff(1) * b.coeff(0);
}

// --------------------------------------------------------------------------
// Minors
// --------------------------------------------------------------------------

/// Row subset I (1-based, ascending) of G and an integer (n+1) x r matrix Gamma.
struct MinorSpec {
  std::vector<int> I;
  IntMatrix Gamma;

  int r() const noexcept { return static_cast<int>(I.size()); }

  void validate(int n) const {
    if (I.empty() || r() > n + 1) throw PreconditionError("MinorSpec: |I| must lie in 1..n+1");
    if (!std::is_sorted(I.begin(), I.end()) || std::adjacent_find(I.begin(), I.end()) != I.end())
      throw PreconditionError("MinorSpec: I must be strictly increasing");
    if (I.front() < 1 || I.back() > n + 1) throw PreconditionError("MinorSpec: indices must lie in 1..n+1");
    if (Gamma.rows() != n + 1 || Gamma.cols() != r())
      throw PreconditionError("MinorSpec: Gamma must be (n+1) x |I|");
  }
};

/// det(G_I(x) Gamma).
inline double phi_minor(const Curve& curve, double x, const MinorSpec& spec) {
  spec.validate(curve.n());
  const Eigen::MatrixXd G = build_G(curve, x);
  Eigen::MatrixXd rows(spec.r(), G.cols());
  for (int i = 0; i < spec.r(); ++i) rows.row(i) = G.row(spec.I[static_cast<std::size_t>(i)] - 1);
  return (rows * spec.Gamma.cast<double>()).determinant();
}

/// phi vanishes identically when Gamma restricted to the columns of G_I that
/// are not identically zero has rank below r.
inline bool is_degenerate_minor(const MinorSpec& spec, int n) {
  spec.validate(n);
  std::vector<int> live{0, 1};
  for (int i : spec.I)
    if (i <= n - 1) live.push_back(i + 1);
  IntMatrix sub(static_cast<Eigen::Index>(live.size()), spec.Gamma.cols());
  for (std::size_t k = 0; k < live.size(); ++k) sub.row(static_cast<Eigen::Index>(k)) = spec.Gamma.row(live[k]);
  return integer_rank(sub) < spec.r();
}

struct MinorEvaluation {
  double value = 0.0;
  bool degenerate = false;
};

inline MinorEvaluation evaluate_minor(const Curve& curve, double x, const MinorSpec& spec) {
  if (is_degenerate_minor(spec, curve.n())) return {0.0, true};
  return {phi_minor(curve, x, spec), false};
}

/// The value Phi_I with det(h_I(x) Gamma) = c^{r/(n+1)} Phi_I phi_{I,Gamma}(x).
inline double scale_factor(const std::vector<int>& I, int n, double c, double Q, double psi) {
  const int r = static_cast<int>(I.size());
  const bool has_n = std::find(I.begin(), I.end(), n) != I.end();
  const bool has_last = std::find(I.begin(), I.end(), n + 1) != I.end();
  if (!has_n && !has_last) return std::pow(psi, -r);
  if (has_n && !has_last) return std::pow(psi, n - r) * Q;
  if (!has_n && has_last) return 1.0 / (c * std::pow(psi, r - 1) * Q);
  return std::pow(psi, n - r + 1) / c;
}

inline double scale_factor(const std::vector<int>& I, const ApproxParams& p) {
  return scale_factor(I, p.n(), p.c, p.Q, p.psi);
}

enum class ClosedFormCase {
  Affine,        // r = n, I = {1..n}: |a0 + x a1 + sum a_{j+1} f_j|
  Derivative,    // r = n, I = {1..n-1, n+1}: |a1 + sum a_{k+1} f_k'|
  SkewGradient,  // r = n-1, I = {1..n-1}
};

inline std::optional<ClosedFormCase> closed_form_case(const std::vector<int>& I, int n) {
  const int r = static_cast<int>(I.size());
  std::vector<int> head(static_cast<std::size_t>(n - 1));
  std::iota(head.begin(), head.end(), 1);
  if (r == n - 1 && I == head) return ClosedFormCase::SkewGradient;
  if (r == n) {
    std::vector<int> with_n = head, with_last = head;
    with_n.push_back(n);
    with_last.push_back(n + 1);
    if (I == with_n) return ClosedFormCase::Affine;
    if (I == with_last) return ClosedFormCase::Derivative;
  }
  return std::nullopt;
}

/// Closed form of |phi_{I,Gamma}(x)| given the dual vectors (columns of `dual`).
inline double phi_closed_form_from_dual(const Curve& curve, double x, const std::vector<int>& I,
                                        const IntMatrix& dual) {
  const int n = curve.n();
  const auto kind = closed_form_case(I, n);
  if (!kind) throw PreconditionError("phi_closed_form: I is outside the three closed-form cases");
  const Jet jet = eval_jet(curve, x, 1);
  const Eigen::VectorXd fv = jet.derivative(0), fd = jet.derivative(1);  // (x, f) and (1, f')
  const Eigen::MatrixXd a = dual.cast<double>();
  switch (*kind) {
    case ClosedFormCase::Affine:
      if (a.cols() != 1) throw PreconditionError("phi_closed_form: affine case needs one dual vector");
      return std::abs(a(0, 0) + a.col(0).tail(n).dot(fv));
    case ClosedFormCase::Derivative:
      if (a.cols() != 1) throw PreconditionError("phi_closed_form: derivative case needs one dual vector");
      return std::abs(a.col(0).tail(n).dot(fd));
    case ClosedFormCase::SkewGradient: {
      if (a.cols() != 2) throw PreconditionError("phi_closed_form: skew-gradient case needs two dual vectors");
      // Unit-determinant change of the pair so the first has zero leading entry.
      Eigen::VectorXd first = a.col(0), second = a.col(1);
      if (first(0) != 0.0) {
        const Eigen::VectorXd moved = second - (second(0) / first(0)) * first;
        second = -first;
        first = moved;
        first(0) = 0.0;
      }
      const Eigen::VectorXd u1 = first.tail(n);
      Eigen::VectorXd u2 = second.tail(n);
      const double u0 = second(0);
      u2 -= (u1.dot(u2) / u1.squaredNorm()) * u1;
      const double g1 = u1.dot(fv), g1d = u1.dot(fd);
      const double g2 = u0 + u2.dot(fv), g2d = u2.dot(fd);
      return std::abs(g1 * g2d - g1d * g2);
    }
  }
  return 0.0;
}

inline double phi_closed_form(const Curve& curve, double x, const MinorSpec& spec) {
  spec.validate(curve.n());
  if (!closed_form_case(spec.I, curve.n()))
    throw PreconditionError("phi_closed_form: I is outside the three closed-form cases");
  return phi_closed_form_from_dual(curve, x, spec.I, hodge_dual_basis(spec.Gamma));
}

}  // namespace ratpts
