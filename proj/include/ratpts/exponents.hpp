#pragma once

// Hausdorff-dimension exponent and divergence-series calculators.

#include <cmath>
#include <numeric>
#include <string>

#include "ratpts/common.hpp"

namespace ratpts {

struct DimResult {
  int n = 0;
  double tau = 0.0;
  double lower_bound = 0.0;  // (n+1)/(tau+1) - n + 1
  bool in_range = false;     // 1/n <= tau < 3/(2n-1)
  bool above_range = false;  // tau >= 3/(2n-1)
  /// The literal range n <= tau < 3/(2n-1) is empty for every n >= 2.
  bool literal_range_empty = false;
  std::string notice;
};

inline DimResult dim_exponent(int n, double tau) {
  if (n < 2) throw PreconditionError("dim_exponent: n must be at least 2");
  if (!(tau > 0.0)) throw PreconditionError("dim_exponent: tau must be positive");
  DimResult r;
  r.n = n;
  r.tau = tau;
  r.lower_bound = (n + 1) / (tau + 1.0) - n + 1;
  const double upper = 3.0 / (2 * n - 1);
  r.above_range = tau >= upper;
  r.in_range = tau >= 1.0 / n && !r.above_range;
  r.literal_range_empty = static_cast<double>(n) >= upper;
  if (r.literal_range_empty) r.notice = "paper-range-empty";
  return r;
}

struct Rational {
  long long num = 0;
  long long den = 1;
  friend bool operator==(const Rational&, const Rational&) = default;
};

inline std::string to_string(const Rational& r) { return std::to_string(r.num) + "/" + std::to_string(r.den); }

/// Exact (n+1)/(tau+1) - n + 1 for tau = p/q, reduced to lowest terms.
inline Rational dim_exponent_rational(int n, long long p, long long q) {
  if (n < 2) throw PreconditionError("dim_exponent: n must be at least 2");
  if (p <= 0 || q <= 0) throw PreconditionError("dim_exponent: tau must be a positive rational");
  const long long num = (n + 1) * q - (n - 1) * (p + q), den = p + q;
  const long long g = std::gcd(num, den);
  return {num / g, den / g};
}

enum class SeriesVerdict { Diverges, Converges };

struct DivergenceSum {
  double exponent = 0.0;  // n - (tau+1)(s+n-1)
  double partial_sum = 0.0;
  SeriesVerdict verdict = SeriesVerdict::Converges;
  /// Exponent exactly -1: harmonic, logarithmic divergence.
  bool boundary = false;
};

inline const char* to_string(SeriesVerdict v) { return v == SeriesVerdict::Diverges ? "diverges" : "converges"; }

/// sum_{q=1}^N q^n (psi(q)/q)^{s+n-1} for psi(q) = q^{-tau}.
inline DivergenceSum divergence_partial_sum(double tau, double s, int n, long long N) {
  if (N < 10) throw PreconditionError("divergence_partial_sum: N must be at least 10");
  DivergenceSum r;
  r.exponent = n - (tau + 1.0) * (s + n - 1.0);
  // Smallest terms first.
  long double sum = 0.0L;
  for (long long q = N; q >= 1; --q) sum += std::pow(static_cast<long double>(q), static_cast<long double>(r.exponent));
  r.partial_sum = static_cast<double>(sum);
  r.boundary = std::abs(r.exponent + 1.0) <= 1e-12;
  r.verdict = (r.exponent >= -1.0 || r.boundary) ? SeriesVerdict::Diverges : SeriesVerdict::Converges;
  return r;
}

}  // namespace ratpts
