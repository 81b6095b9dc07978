#pragma once

// Brute-force enumeration of R(Q, psi, B, theta) for curves, interval-union
// measure of the Delta-neighbourhoods, power-law fitting and the counting
// lower bound check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <numeric>
#include <ostream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "ratpts/common.hpp"
#include "ratpts/curve.hpp"
#include "ratpts/detector.hpp"

namespace ratpts {

/// Guard band around the strict inequality |q f - gamma - b| < psi.
inline constexpr double kCountGuard = 1e-12;
inline constexpr long long kMaxCountQ = 1LL << 16;

struct Shift {
  double lambda = 0.0;
  std::vector<double> gamma;  // empty means all zero
};

struct CountOptions {
  double guard = kCountGuard;
  long long max_Q = kMaxCountQ;
  bool extended = false;  // long double residuals when the curve supports it
  int jobs = 1;
};

struct CountResult {
  std::vector<RationalWitness> witnesses;
  double Q = 0.0;
  double psi = 0.0;
  long long count = 0;
  long long boundary = 0;  // triples inside the guard band, not counted
};

struct CountSummary {
  long long count = 0;
  long long boundary = 0;
};

namespace detail {

inline double shift_gamma(const Shift& s, int j) {
  return s.gamma.empty() ? 0.0 : s.gamma[static_cast<std::size_t>(j)];
}

// Calls visit(q, a, b) for every triple with q in [q_lo, q_hi]; returns the boundary count.
template <class Visit>
long long scan_q_range(const Curve& curve, long long q_lo, long long q_hi, double psi, const Interval& B,
                       const Shift& shift, const CountOptions& opt, Visit&& visit) {
  const int m = curve.m();
  long long boundary = 0;
  std::vector<std::vector<long long>> choices(static_cast<std::size_t>(m));
  std::vector<long long> b(static_cast<std::size_t>(m));
  for (long long q = q_lo; q <= q_hi; ++q) {
    const double qd = static_cast<double>(q);
    const long long a_lo = static_cast<long long>(std::floor(B.lo * qd - shift.lambda)) - 1;
    const long long a_hi = static_cast<long long>(std::ceil(B.hi * qd - shift.lambda)) + 1;
    for (long long a = a_lo; a <= a_hi; ++a) {
      // (a + lambda)/q in B, tested without dividing.
      const double num = static_cast<double>(a) + shift.lambda;
      if (num < B.lo * qd || num > B.hi * qd) continue;
      bool any = true;
      for (int j = 0; j < m && any; ++j) {
        auto& list = choices[static_cast<std::size_t>(j)];
        list.clear();
        long double v;
        if (opt.extended) {
          const long double x = (static_cast<long double>(a) + shift.lambda) / static_cast<long double>(q);
          v = static_cast<long double>(q) * curve.f_ext(j, x) - shift_gamma(shift, j);
        } else {
          v = qd * curve.f(j, num / qd) - shift_gamma(shift, j);
        }
        const long long b_lo = static_cast<long long>(std::floor(v - psi)) - 1;
        const long long b_hi = static_cast<long long>(std::ceil(v + psi)) + 1;
        for (long long bj = b_lo; bj <= b_hi; ++bj) {
          const double r = static_cast<double>(std::fabs(v - static_cast<long double>(bj)));
          if (r < psi - opt.guard) {
            list.push_back(bj);
          } else if (r < psi + opt.guard) {
            ++boundary;
          }
        }
        any = !list.empty();
      }
      if (!any) continue;
      // Cartesian product over coordinates, ascending in b.
      std::vector<std::size_t> idx(static_cast<std::size_t>(m), 0);
      for (;;) {
        for (int j = 0; j < m; ++j) b[static_cast<std::size_t>(j)] = choices[static_cast<std::size_t>(j)][idx[static_cast<std::size_t>(j)]];
        visit(q, a, b);
        int j = m - 1;
        while (j >= 0 && ++idx[static_cast<std::size_t>(j)] == choices[static_cast<std::size_t>(j)].size()) idx[static_cast<std::size_t>(j--)] = 0;
        if (j < 0) break;
      }
    }
  }
  return boundary;
}

inline void check_count_inputs(const Curve& curve, long long Q, const Interval& B, const Shift& shift,
                               const CountOptions& opt) {
  if (Q < 2) throw PreconditionError("enumerate_R: Q must be at least 2");
  if (Q > opt.max_Q) throw PreconditionError("enumerate_R: Q exceeds the configured cap");
  if (!B.empty() && !curve.domain().contains(B)) throw PreconditionError("enumerate_R: B not inside the curve domain");
  if (!shift.gamma.empty() && static_cast<int>(shift.gamma.size()) != curve.m())
    throw PreconditionError("enumerate_R: gamma must have one entry per coordinate function");
}

}  // namespace detail

/// Visits every triple of R(Q, psi, B, theta) in ascending (q, a, b) order;
/// returns the boundary count.
template <class Visit>
long long for_each_R(const Curve& curve, long long Q, double psi, const Interval& B, const Shift& shift, Visit&& visit,
                     const CountOptions& opt = {}) {
  detail::check_count_inputs(curve, Q, B, shift, opt);
  if (B.empty()) return 0;
  // q in (Q/2, Q]: 2q > Q.
  return detail::scan_q_range(curve, Q / 2 + 1, Q, psi, B, shift, opt, std::forward<Visit>(visit));
}

/// Counts R(Q, psi, B, theta) without storing triples; parallel over q blocks.
inline CountSummary count_R(const Curve& curve, long long Q, double psi, const Interval& B, const Shift& shift = {},
                            const CountOptions& opt = {}) {
  detail::check_count_inputs(curve, Q, B, shift, opt);
  CountSummary out;
  if (B.empty()) return out;
  const long long q_lo = Q / 2 + 1;
  const int jobs = std::max(1, std::min<int>(opt.jobs, static_cast<int>(Q - q_lo + 1)));
  std::vector<CountSummary> parts(static_cast<std::size_t>(jobs));
  auto work = [&](int w) {
    const long long span = Q - q_lo + 1;
    const long long lo = q_lo + span * w / jobs, hi = q_lo + span * (w + 1) / jobs - 1;
    auto& part = parts[static_cast<std::size_t>(w)];
    part.boundary = detail::scan_q_range(curve, lo, hi, psi, B, shift, opt,
                                         [&](long long, long long, const std::vector<long long>&) { ++part.count; });
  };
  if (jobs == 1) {
    work(0);
  } else {
    std::vector<std::jthread> threads;
    for (int w = 0; w < jobs; ++w) threads.emplace_back(work, w);
  }
  for (const auto& p : parts) {
    out.count += p.count;
    out.boundary += p.boundary;
  }
  return out;
}

inline CountResult enumerate_R(const Curve& curve, long long Q, double psi, const Interval& B, const Shift& shift = {},
                               const CountOptions& opt = {}) {
  CountResult r;
  r.Q = static_cast<double>(Q);
  r.psi = psi;
  r.boundary = for_each_R(
      curve, Q, psi, B, shift,
      [&](long long q, long long a, const std::vector<long long>& b) { r.witnesses.push_back({q, {a}, b}); }, opt);
  r.count = static_cast<long long>(r.witnesses.size());
  return r;
}

/// Independent re-check of the defining inequalities of R through the jet path.
inline bool in_R(const RationalWitness& w, const Curve& curve, double Q, double psi, const Interval& B,
                 const Shift& shift = {}) {
  if (w.q <= 0 || w.a.size() != 1 || static_cast<int>(w.b.size()) != curve.m()) return false;
  if (!(2.0 * static_cast<double>(w.q) > Q && static_cast<double>(w.q) <= Q)) return false;
  const double x = (static_cast<double>(w.a[0]) + shift.lambda) / static_cast<double>(w.q);
  if (!B.contains(x) || !curve.domain().contains(x)) return false;
  const Jet jet = eval_jet(curve, x, 0);
  for (int j = 0; j < curve.m(); ++j) {
    const double r = std::abs(static_cast<double>(w.q) * jet.values(j + 1, 0) - detail::shift_gamma(shift, j) -
                              static_cast<double>(w.b[static_cast<std::size_t>(j)]));
    if (!(r < psi)) return false;
  }
  return true;
}

// --------------------------------------------------------------------------
// Interval unions
// --------------------------------------------------------------------------

class IntervalUnion {
public:
  IntervalUnion() = default;

  /// Builds the union by a sort-and-sweep merge; empty inputs are dropped.
  explicit IntervalUnion(std::vector<Interval> raw) {
    raw.erase(std::remove_if(raw.begin(), raw.end(), [](const Interval& iv) { return iv.empty(); }), raw.end());
    std::sort(raw.begin(), raw.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    for (const auto& iv : raw) {
      if (!parts_.empty() && iv.lo <= parts_.back().hi)
        parts_.back().hi = std::max(parts_.back().hi, iv.hi);
      else
        parts_.push_back(iv);
    }
  }

  const std::vector<Interval>& intervals() const noexcept { return parts_; }

  double measure() const {
    double s = 0.0;
    for (const auto& iv : parts_) s += iv.length();
    return s;
  }

  double measure_within(const Interval& clip) const {
    double s = 0.0;
    for (const auto& iv : parts_) s += intersect(iv, clip).length();
    return s;
  }

private:
  std::vector<Interval> parts_;
};

inline double interval_union_measure(std::vector<Interval> intervals, const Interval& clip) {
  return IntervalUnion(std::move(intervals)).measure_within(clip);
}

/// |(union of [x - rho, x + rho] over centres x) intersected with B|.
inline double coverage_of_centres(const std::vector<double>& centres, double rho, const Interval& B) {
  if (!(rho > 0.0)) throw PreconditionError("delta_coverage: rho must be positive");
  std::vector<Interval> iv;
  iv.reserve(centres.size());
  for (double x : centres) iv.push_back({x - rho, x + rho});
  return interval_union_measure(std::move(iv), B);
}

inline double delta_coverage(const std::vector<RationalWitness>& witnesses, double rho, const Interval& B,
                             double lambda = 0.0) {
  std::vector<double> centres;
  centres.reserve(witnesses.size());
  for (const auto& w : witnesses) centres.push_back((static_cast<double>(w.a.at(0)) + lambda) / static_cast<double>(w.q));
  return coverage_of_centres(centres, rho, B);
}

// --------------------------------------------------------------------------
// Scaling laws
// --------------------------------------------------------------------------

struct ScalingFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::vector<std::pair<double, double>> samples;
};

/// Least-squares line through (log x, log y).
inline ScalingFit scaling_fit(const std::vector<std::pair<double, double>>& samples) {
  if (samples.size() < 3) throw PreconditionError("scaling_fit: need at least 3 samples");
  ScalingFit fit;
  fit.samples = samples;
  const double k = static_cast<double>(samples.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (const auto& [x, y] : samples) {
    if (!(x > 0.0) || !(y > 0.0)) throw PreconditionError("scaling_fit: samples must be positive");
    const double lx = std::log(x), ly = std::log(y);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    syy += ly * ly;
  }
  const double vxx = sxx - sx * sx / k, vxy = sxy - sx * sy / k, vyy = syy - sy * sy / k;
  if (vxx <= 0.0) throw PreconditionError("scaling_fit: abscissae must not all coincide");
  fit.slope = vxy / vxx;
  fit.intercept = (sy - fit.slope * sx) / k;
  fit.r_squared = vyy > 0.0 ? std::clamp(vxy * vxy / (vxx * vyy), 0.0, 1.0) : 1.0;
  return fit;
}

struct LowerBoundCheck {
  bool in_regime = false;
  bool passed = false;  // meaningful only in regime
  double bound = 0.0;   // |B| / (4 C0) psi^{n-1} Q^2
  double regime_floor = 0.0;  // K0 Q^{-3/(2n-1)}
};

/// count >= |B|/(4 C0) psi^{n-1} Q^2, evaluated when K0 Q^{-3/(2n-1)} <= psi < 1.
inline LowerBoundCheck lower_bound_check(long long count, const Interval& B, double C0, double psi, double Q, int n,
                                         double K0) {
  LowerBoundCheck r;
  r.regime_floor = K0 * std::pow(Q, -3.0 / (2 * n - 1));
  r.in_regime = psi >= r.regime_floor && psi < 1.0;
  r.bound = B.length() / (4.0 * C0) * std::pow(psi, n - 1) * Q * Q;
  r.passed = static_cast<double>(count) >= r.bound;
  return r;
}

// --------------------------------------------------------------------------
// CSV
// --------------------------------------------------------------------------

/// Header q,a,b1..bm,x_point,slack_f1..fm; slack is psi - |q f_j - gamma_j - b_j|.
inline void write_witness_csv(std::ostream& os, const std::vector<RationalWitness>& ws, const Curve& curve, double psi,
                              const Shift& shift = {}) {
  const int m = curve.m();
  os << "q,a";
  for (int j = 1; j <= m; ++j) os << ",b" << j;
  os << ",x_point";
  for (int j = 1; j <= m; ++j) os << ",slack_f" << j;
  os << '\n';
  char buf[64];
  for (const auto& w : ws) {
    const double x = (static_cast<double>(w.a[0]) + shift.lambda) / static_cast<double>(w.q);
    os << w.q << ',' << w.a[0];
    for (int j = 0; j < m; ++j) os << ',' << w.b[static_cast<std::size_t>(j)];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    os << ',' << buf;
    for (int j = 0; j < m; ++j) {
      const double r = std::abs(static_cast<double>(w.q) * curve.f(j, x) - detail::shift_gamma(shift, j) -
                                static_cast<double>(w.b[static_cast<std::size_t>(j)]));
      std::snprintf(buf, sizeof buf, "%.17g", psi - r);
      os << ',' << buf;
    }
    os << '\n';
  }
}

}  // namespace ratpts
