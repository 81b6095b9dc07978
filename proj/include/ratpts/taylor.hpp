#pragma once

// Truncated Taylor polynomials for forward-mode higher-order derivatives.
//
// A Taylor value stores normalised coefficients t[k] = f^{(k)}(x0) / k!, so the
// arithmetic below is plain truncated power-series arithmetic. Seeding the
// independent variable as (x0, 1, 0, ...) and pushing it through a function
// built from these operations yields all derivatives up to the chosen order.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace ratpts {

class Taylor {
public:
  Taylor() = default;

  /// Constant of the given truncation order.
  Taylor(double value, int order) : c_(static_cast<std::size_t>(order) + 1, 0.0) { c_[0] = value; }

  /// The independent variable x seeded at x0.
  static Taylor variable(double x0, int order) {
    Taylor t(x0, order);
    if (order >= 1) t.c_[1] = 1.0;
    return t;
  }

  int order() const noexcept { return static_cast<int>(c_.size()) - 1; }
  double coeff(int k) const { return c_.at(static_cast<std::size_t>(k)); }
  double value() const { return c_.at(0); }

  /// k-th derivative (k! times the k-th coefficient).
  double derivative(int k) const {
    double fact = 1.0;
    for (int i = 2; i <= k; ++i) fact *= i;
    return fact * coeff(k);
  }

  std::vector<double> derivatives() const {
    std::vector<double> out(c_.size());
    for (int k = 0; k <= order(); ++k) out[static_cast<std::size_t>(k)] = derivative(k);
    return out;
  }

  Taylor& operator+=(const Taylor& o) {
    check(o);
    for (std::size_t k = 0; k < c_.size(); ++k) c_[k] += o.c_[k];
    return *this;
  }
  Taylor& operator-=(const Taylor& o) {
    check(o);
    for (std::size_t k = 0; k < c_.size(); ++k) c_[k] -= o.c_[k];
    return *this;
  }
  Taylor& operator+=(double s) { c_.at(0) += s; return *this; }
  Taylor& operator-=(double s) { c_.at(0) -= s; return *this; }
  Taylor& operator*=(double s) {
    for (double& v : c_) v *= s;
    return *this;
  }
  Taylor& operator/=(double s) {
    for (double& v : c_) v /= s;
    return *this;
  }

  friend Taylor operator-(Taylor a) {
    for (double& v : a.c_) v = -v;
    return a;
  }
  friend Taylor operator+(Taylor a, const Taylor& b) { return a += b; }
  friend Taylor operator-(Taylor a, const Taylor& b) { return a -= b; }
  friend Taylor operator+(Taylor a, double s) { return a += s; }
  friend Taylor operator+(double s, Taylor a) { return a += s; }
  friend Taylor operator-(Taylor a, double s) { return a -= s; }
  friend Taylor operator-(double s, const Taylor& a) { return -a + s; }
  friend Taylor operator*(Taylor a, double s) { return a *= s; }
  friend Taylor operator*(double s, Taylor a) { return a *= s; }
  friend Taylor operator/(Taylor a, double s) { return a /= s; }

  friend Taylor operator*(const Taylor& a, const Taylor& b) {
    a.check(b);
    Taylor r(0.0, a.order());
    for (std::size_t k = 0; k < a.c_.size(); ++k)
      for (std::size_t j = 0; j <= k; ++j) r.c_[k] += a.c_[j] * b.c_[k - j];
    return r;
  }

  friend Taylor operator/(const Taylor& a, const Taylor& b) {
    a.check(b);
    if (b.c_[0] == 0.0) throw std::domain_error("Taylor division by a series with zero constant term");
    Taylor r(0.0, a.order());
    for (std::size_t k = 0; k < a.c_.size(); ++k) {
      double s = a.c_[k];
      for (std::size_t j = 1; j <= k; ++j) s -= b.c_[j] * r.c_[k - j];
      r.c_[k] = s / b.c_[0];
    }
    return r;
  }
  friend Taylor operator/(double s, const Taylor& b) { return Taylor(s, b.order()) / b; }

  friend Taylor exp(const Taylor& a) {
    Taylor r(std::exp(a.c_[0]), a.order());
    for (std::size_t k = 1; k < a.c_.size(); ++k) {
      double s = 0.0;
      for (std::size_t j = 1; j <= k; ++j) s += static_cast<double>(j) * a.c_[j] * r.c_[k - j];
      r.c_[k] = s / static_cast<double>(k);
    }
    return r;
  }

  friend Taylor log(const Taylor& a) {
    if (a.c_[0] <= 0.0) throw std::domain_error("Taylor log of a nonpositive value");
    Taylor r(std::log(a.c_[0]), a.order());
    for (std::size_t k = 1; k < a.c_.size(); ++k) {
      double s = static_cast<double>(k) * a.c_[k];
      for (std::size_t j = 1; j < k; ++j) s -= static_cast<double>(j) * r.c_[j] * a.c_[k - j];
      r.c_[k] = s / (static_cast<double>(k) * a.c_[0]);
    }
    return r;
  }

  // sin and cos share one recurrence.
  friend void sincos(const Taylor& a, Taylor& s, Taylor& c) {
    s = Taylor(std::sin(a.c_[0]), a.order());
    c = Taylor(std::cos(a.c_[0]), a.order());
    for (std::size_t k = 1; k < a.c_.size(); ++k) {
      double ss = 0.0, cc = 0.0;
      for (std::size_t j = 1; j <= k; ++j) {
        const double ja = static_cast<double>(j) * a.c_[j];
        ss += ja * c.c_[k - j];
        cc -= ja * s.c_[k - j];
      }
      s.c_[k] = ss / static_cast<double>(k);
      c.c_[k] = cc / static_cast<double>(k);
    }
  }
  friend Taylor sin(const Taylor& a) {
    Taylor s, c;
    sincos(a, s, c);
    return s;
  }
  friend Taylor cos(const Taylor& a) {
    Taylor s, c;
    sincos(a, s, c);
    return c;
  }

  /// Integer power by repeated squaring; negative exponents go through division.
  friend Taylor pow(const Taylor& a, int e) {
    if (e < 0) return 1.0 / pow(a, -e);
    Taylor result(1.0, a.order());
    Taylor base = a;
    while (e > 0) {
      if (e & 1) result = result * base;
      base = base * base;
      e >>= 1;
    }
    return result;
  }

  /// Real power via exp(p log a); requires a positive constant term.
  friend Taylor pow(const Taylor& a, double p) { return exp(p * log(a)); }

  friend Taylor sqrt(const Taylor& a) { return pow(a, 0.5); }

private:
  void check(const Taylor& o) const {
    if (o.c_.size() != c_.size()) throw std::invalid_argument("Taylor order mismatch");
  }

  std::vector<double> c_;
};

}  // namespace ratpts
