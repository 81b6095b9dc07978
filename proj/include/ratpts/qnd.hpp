#pragma once

// Empirical quantitative non-divergence: the measure of
// {x in B : delta(h(x) Z^{n+1}) <= eps} against eps^alpha |B|.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <thread>
#include <vector>

#include "ratpts/common.hpp"
#include "ratpts/counting.hpp"
#include "ratpts/curve.hpp"
#include "ratpts/lattice.hpp"

namespace ratpts {

struct QndOptions {
  int grid = 2000;          // stratified sample count over B for the direct estimate
  int window_samples = 32;  // cells per candidate window in the refined estimate
  int jobs = 1;
  std::uint64_t seed = 1;   // jitter of the stratified samples
  double refine_max = 0.1;  // larger eps use the direct estimate only
  Interval fit_range{1e-3, 1e-1};
};

struct QndRow {
  double eps = 0.0;
  double grid_fraction = 0.0;
  /// NaN when eps is too large for the candidate-window reduction.
  double refined_fraction = std::numeric_limits<double>::quiet_NaN();
  double measure = 0.0;    // refined when available, grid otherwise
  double ratio = 0.0;      // measure / (eps^alpha |B|)
  double km_bound = 0.0;   // (n+1) 6^{n+1} (eps/rho)^alpha |B| with C = 1
  double implied_C = 0.0;  // measure / km_bound
};

struct QndTable {
  std::vector<QndRow> rows;
  double alpha = 0.0;
  double rho = 0.0;
  double slope = std::numeric_limits<double>::quiet_NaN();
  double slope_r_squared = 0.0;
  int slope_points = 0;
  bool nonincreasing = true;
};

/// Scales of the rows of h(x) v for v = (q, a, b): the f-rows, the x-row and the q-row.
struct QndScales {
  double f = 0.0, x = 0.0, q = 0.0;
};

inline QndScales qnd_scales(const ApproxParams& p) {
  const double s = std::pow(p.c, 1.0 / (p.n() + 1));
  return {s / p.psi, s * std::pow(p.psi, p.n() - 1) * p.Q, s / (p.c * p.Q)};
}

/// Measure of {x in B : delta(h(x)) <= eps} from candidate windows.
/// A vector of sup-norm at most eps < min(scale_x, scale_f) has q != 0, so
/// after a sign flip 1 <= q <= eps/scale_q, |qx - a| <= eps/scale_x and each
/// b_j is the integer nearest q g_j(x) + a f_j'(x).
inline double qnd_refined_measure(const Curve& curve, const Interval& B, const ApproxParams& p, double eps,
                                  const QndOptions& opt = {}) {
  if (eps <= 0.0 || B.empty()) return 0.0;
  const QndScales sc = qnd_scales(p);
  if (!(eps < std::min(sc.x, sc.f))) throw PreconditionError("qnd_refined_measure: eps too large for the reduction");
  const long long q_max = static_cast<long long>(std::floor(eps / sc.q));
  if (q_max < 1) return 0.0;
  const double x_tol = eps / sc.x, f_tol = eps / sc.f;
  const int m = curve.m(), K = std::max(1, opt.window_samples);

  const int jobs = static_cast<int>(std::max<long long>(1, std::min<long long>(opt.jobs, q_max)));
  std::vector<std::vector<Interval>> parts(static_cast<std::size_t>(jobs));
  auto work = [&](int w) {
    auto& out = parts[static_cast<std::size_t>(w)];
    const long long lo = 1 + q_max * w / jobs, hi = q_max * (w + 1) / jobs;
    for (long long q = lo; q <= hi; ++q) {
      const double qd = static_cast<double>(q);
      const long long a_lo = static_cast<long long>(std::floor(B.lo * qd - x_tol));
      const long long a_hi = static_cast<long long>(std::ceil(B.hi * qd + x_tol));
      for (long long a = a_lo; a <= a_hi; ++a) {
        const Interval win = intersect({(a - x_tol) / qd, (a + x_tol) / qd}, B);
        if (win.empty() || win.length() == 0.0) continue;
        const double h = win.length() / K;
        double run_start = 0.0;
        bool in_run = false;
        for (int k = 0; k <= K; ++k) {
          bool bad = false;
          if (k < K) {
            const double x = win.lo + (k + 0.5) * h;
            const Jet jet = eval_jet(curve, x, 1);
            bad = true;
            for (int j = 0; j < m && bad; ++j) {
              const double fj = jet.values(j + 1, 0), dj = jet.values(j + 1, 1);
              const double F = qd * (fj - x * dj) + static_cast<double>(a) * dj;
              bad = std::abs(F - std::nearbyint(F)) <= f_tol;
            }
          }
          if (bad && !in_run) {
            run_start = win.lo + k * h;
            in_run = true;
          } else if (!bad && in_run) {
            out.push_back({run_start, win.lo + k * h});
            in_run = false;
          }
        }
      }
    }
  };
  if (jobs == 1) {
    work(0);
  } else {
    std::vector<std::jthread> threads;
    for (int w = 0; w < jobs; ++w) threads.emplace_back(work, w);
  }
  std::vector<Interval> all;
  for (auto& part : parts) all.insert(all.end(), part.begin(), part.end());
  return interval_union_measure(std::move(all), B);
}

/// One uniformly jittered point in each of `points` equal cells of B.
inline std::vector<double> stratified_points(const Interval& B, int points, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> xs(static_cast<std::size_t>(std::max(points, 0)));
  for (int i = 0; i < points; ++i) xs[static_cast<std::size_t>(i)] = B.lo + (i + u(rng)) * B.length() / points;
  return xs;
}

/// delta(h(x)) at stratified samples of B.
inline std::vector<double> qnd_grid_deltas(const Curve& curve, const Interval& B, const ApproxParams& p, int points,
                                           int jobs = 1, std::uint64_t seed = 1) {
  const std::vector<double> xs = stratified_points(B, points, seed);
  std::vector<double> deltas(xs.size());
  jobs = std::max(1, std::min(jobs, points));
  auto work = [&](int w) {
    for (int i = points * w / jobs; i < points * (w + 1) / jobs; ++i)
      deltas[static_cast<std::size_t>(i)] = shortest_sup(build_h(curve, xs[static_cast<std::size_t>(i)], p)).delta;
  };
  if (jobs == 1) {
    work(0);
  } else {
    std::vector<std::jthread> threads;
    for (int w = 0; w < jobs; ++w) threads.emplace_back(work, w);
  }
  return deltas;
}

/// One row per eps (positive, descending), with rho = 1/(n+1).
inline QndTable qnd_bound_check(const Curve& curve, const Interval& B, const ApproxParams& params, double alpha,
                                const std::vector<double>& eps_grid, const QndOptions& opt = {}) {
  params.validate_for(curve);
  if (B.empty() || B.length() == 0.0) throw PreconditionError("qnd_bound_check: empty B");
  if (!curve.domain().contains(B)) throw PreconditionError("qnd_bound_check: B not inside the curve domain");
  for (std::size_t i = 0; i < eps_grid.size(); ++i) {
    if (eps_grid[i] < 0.0) throw PreconditionError("qnd_bound_check: eps must be nonnegative");
    if (i > 0 && eps_grid[i] > eps_grid[i - 1]) throw PreconditionError("qnd_bound_check: eps grid must descend");
  }
  const int n = params.n();
  QndTable t;
  t.alpha = alpha;
  t.rho = 1.0 / (n + 1);

  const std::vector<double> deltas = qnd_grid_deltas(curve, B, params, opt.grid, opt.jobs, opt.seed);
  const QndScales sc = qnd_scales(params);
  std::vector<std::pair<double, double>> fit;
  for (double eps : eps_grid) {
    QndRow row;
    row.eps = eps;
    if (eps > 0.0) {
      const auto bad = std::count_if(deltas.begin(), deltas.end(), [&](double d) { return d <= eps; });
      row.grid_fraction = deltas.empty() ? 0.0 : static_cast<double>(bad) / static_cast<double>(deltas.size());
      if (eps < std::min(sc.x, sc.f) && eps <= opt.refine_max) {
        row.refined_fraction = qnd_refined_measure(curve, B, params, eps, opt) / B.length();
        row.measure = row.refined_fraction * B.length();
      } else {
        row.measure = row.grid_fraction * B.length();
      }
      row.ratio = row.measure / (std::pow(eps, alpha) * B.length());
      row.km_bound = (n + 1) * std::pow(6.0, n + 1) * std::pow(eps / t.rho, alpha) * B.length();
      row.implied_C = row.measure / row.km_bound;
      if (opt.fit_range.contains(eps) && row.measure > 0.0) fit.emplace_back(eps, row.measure);
    }
    if (!t.rows.empty() && row.measure > t.rows.back().measure) t.nonincreasing = false;
    t.rows.push_back(row);
  }
  t.slope_points = static_cast<int>(fit.size());
  if (fit.size() >= 3) {
    const ScalingFit f = scaling_fit(fit);
    t.slope = f.slope;
    t.slope_r_squared = f.r_squared;
  }
  return t;
}

}  // namespace ratpts
