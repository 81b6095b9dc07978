#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace ratpts {

// Raised when an operation's contract is violated by its inputs.
class PreconditionError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

// Raised for malformed experiment configurations.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Closed real interval [lo, hi]. An interval with lo > hi is empty.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  constexpr bool empty() const noexcept { return lo > hi; }
  constexpr double length() const noexcept { return empty() ? 0.0 : hi - lo; }
  constexpr bool contains(double x) const noexcept { return x >= lo && x <= hi; }
  constexpr bool contains(const Interval& other) const noexcept {
    return other.empty() || (other.lo >= lo && other.hi <= hi);
  }
  constexpr double center() const noexcept { return 0.5 * (lo + hi); }

  static constexpr Interval empty_interval() noexcept { return {1.0, 0.0}; }
};

inline Interval intersect(const Interval& a, const Interval& b) noexcept {
  return {std::max(a.lo, b.lo), std::min(a.hi, b.hi)};
}

inline std::string to_string(const Interval& iv) {
  return "[" + std::to_string(iv.lo) + ", " + std::to_string(iv.hi) + "]";
}

}  // namespace ratpts
