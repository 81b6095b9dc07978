#pragma once

// Monge-parametrised curves x -> (x, f_1(x), ..., f_{n-1}(x)) with derivative
// jets, non-degeneracy tests and the auxiliary quantities used to build the
// curve lattices.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ratpts/common.hpp"
#include "ratpts/taylor.hpp"

namespace ratpts {

/// One coordinate function f_j of a curve.
struct Coordinate {
  std::string expr;
  /// f_j(x).
  std::function<double(double)> value;
  /// Writes f_j^{(k)}(x) for k = 0..out.size()-1.
  std::function<void(double, std::span<double>)> derivatives;
  /// Optional extended-precision evaluation; empty for user-defined coordinates.
  std::function<long double(long double)> value_ext;
};

class Curve {
public:
  Curve(std::string label, Interval domain, int l_max, std::vector<Coordinate> coords)
      : label_(std::move(label)), domain_(domain), l_max_(l_max), coords_(std::move(coords)) {
    if (coords_.empty()) throw std::invalid_argument("curve needs at least one coordinate function");
    if (domain_.empty()) throw std::invalid_argument("curve domain is empty");
    if (l_max_ < 0) throw std::invalid_argument("l_max must be nonnegative");
  }

  int n() const noexcept { return static_cast<int>(coords_.size()) + 1; }
  int m() const noexcept { return static_cast<int>(coords_.size()); }
  const Interval& domain() const noexcept { return domain_; }
  int l_max() const noexcept { return l_max_; }
  const std::string& label() const noexcept { return label_; }
  const std::vector<Coordinate>& coords() const noexcept { return coords_; }

  double f(int j, double x) const { return coords_[static_cast<std::size_t>(j)].value(x); }

  long double f_ext(int j, long double x) const {
    const auto& c = coords_[static_cast<std::size_t>(j)];
    return c.value_ext ? c.value_ext(x) : static_cast<long double>(c.value(static_cast<double>(x)));
  }

  bool has_extended() const {
    for (const auto& c : coords_)
      if (!c.value_ext) return false;
    return true;
  }

  Curve with_domain(Interval domain) const { return Curve(label_, domain, l_max_, coords_); }

private:
  std::string label_;
  Interval domain_;
  int l_max_;
  std::vector<Coordinate> coords_;
};

/// Derivatives of the full map x -> (x, f(x)). Row i holds orders 0..order
/// of the i-th coordinate; row 0 is the coordinate x itself.
struct Jet {
  int order = 0;
  Eigen::MatrixXd values;

  /// The k-th derivative vector f^{(k)}(x) in R^n.
  Eigen::VectorXd derivative(int k) const { return values.col(k); }
};

// --------------------------------------------------------------------------
// Built-in coordinate functions
// --------------------------------------------------------------------------

/// Polynomial c0 + c1 x + ... with closed-form derivatives of every order.
inline Coordinate polynomial_coordinate(std::vector<double> coeffs) {
  if (coeffs.empty()) coeffs.push_back(0.0);
  std::ostringstream os;
  for (std::size_t i = 0; i < coeffs.size(); ++i) os << (i ? "," : "") << coeffs[i];
  Coordinate c;
  c.expr = "poly(" + os.str() + ")";
  c.value = [coeffs](double x) {
    double acc = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * x + *it;
    return acc;
  };
  c.value_ext = [coeffs](long double x) {
    long double acc = 0.0L;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * x + static_cast<long double>(*it);
    return acc;
  };
  c.derivatives = [coeffs](double x, std::span<double> out) {
    const int deg = static_cast<int>(coeffs.size()) - 1;
    for (std::size_t k = 0; k < out.size(); ++k) {
      const int kk = static_cast<int>(k);
      if (kk > deg) {
        out[k] = 0.0;
        continue;
      }
      // Horner on the k-th derivative: sum_i i!/(i-k)! c_i x^{i-k}.
      double acc = 0.0;
      for (int i = deg; i >= kk; --i) {
        double fall = 1.0;
        for (int t = 0; t < kk; ++t) fall *= static_cast<double>(i - t);
        acc = acc * x + fall * coeffs[static_cast<std::size_t>(i)];
      }
      out[k] = acc;
    }
  };
  return c;
}

inline Coordinate monomial_coordinate(int degree) {
  std::vector<double> coeffs(static_cast<std::size_t>(degree) + 1, 0.0);
  coeffs.back() = 1.0;
  Coordinate c = polynomial_coordinate(std::move(coeffs));
  c.expr = "x^" + std::to_string(degree);
  return c;
}

inline Coordinate exp_coordinate() {
  Coordinate c;
  c.expr = "exp(x)";
  c.value = [](double x) { return std::exp(x); };
  c.value_ext = [](long double x) { return std::exp(x); };
  c.derivatives = [](double x, std::span<double> out) {
    const double e = std::exp(x);
    for (double& v : out) v = e;
  };
  return c;
}

/// Coordinate defined by a function on Taylor series; derivatives come from
/// forward-mode propagation rather than closed forms.
inline Coordinate taylor_coordinate(std::string expr, std::function<Taylor(const Taylor&)> fn) {
  Coordinate c;
  c.expr = std::move(expr);
  c.value = [fn](double x) { return fn(Taylor(x, 0)).value(); };
  c.derivatives = [fn](double x, std::span<double> out) {
    const int order = static_cast<int>(out.size()) - 1;
    const Taylor t = fn(Taylor::variable(x, order));
    for (int k = 0; k <= order; ++k) out[static_cast<std::size_t>(k)] = t.derivative(k);
  };
  return c;
}

// --------------------------------------------------------------------------
// Catalog
// --------------------------------------------------------------------------

inline constexpr Interval kDefaultDomain{-4.0, 4.0};
inline constexpr int kDefaultLMax = 8;

inline Curve parabola(Interval domain = kDefaultDomain) {
  return Curve("parabola", domain, kDefaultLMax, {monomial_coordinate(2)});
}

/// (x, x^2, ..., x^n).
inline Curve veronese(int n, Interval domain = kDefaultDomain) {
  if (n < 2) throw std::invalid_argument("veronese curve needs n >= 2");
  std::vector<Coordinate> coords;
  for (int k = 2; k <= n; ++k) coords.push_back(monomial_coordinate(k));
  return Curve("veronese:" + std::to_string(n), domain, std::max(kDefaultLMax, n), std::move(coords));
}

/// (x, x^2, e^x).
inline Curve exp_mix(Interval domain = kDefaultDomain) {
  return Curve("expmix", domain, kDefaultLMax, {monomial_coordinate(2), exp_coordinate()});
}

/// One polynomial coordinate per coefficient list.
inline Curve polynomial_curve(const std::vector<std::vector<double>>& coeffs, Interval domain = kDefaultDomain) {
  std::vector<Coordinate> coords;
  std::string label = "poly:";
  for (std::size_t j = 0; j < coeffs.size(); ++j) {
    coords.push_back(polynomial_coordinate(coeffs[j]));
    std::ostringstream os;
    for (std::size_t i = 0; i < coeffs[j].size(); ++i) os << (i ? "," : "") << coeffs[j][i];
    label += (j ? ";" : "") + os.str();
  }
  return Curve(label, domain, kDefaultLMax, std::move(coords));
}

/// User-defined curve from Taylor-series functions (forward-mode jets).
inline Curve taylor_curve(std::string label, std::vector<std::function<Taylor(const Taylor&)>> fns,
                          Interval domain, int l_max = kDefaultLMax) {
  std::vector<Coordinate> coords;
  for (std::size_t j = 0; j < fns.size(); ++j)
    coords.push_back(taylor_coordinate(label + "[" + std::to_string(j + 1) + "]", fns[j]));
  return Curve(std::move(label), domain, l_max, std::move(coords));
}

namespace detail {
inline std::vector<double> parse_doubles(const std::string& text, char sep) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("bad number '" + item + "'");
    }
    if (used != item.size()) throw std::invalid_argument("bad number '" + item + "'");
    out.push_back(v);
  }
  return out;
}
}  // namespace detail

/// Resolves "parabola", "veronese:n", "expmix" or "poly:c0,c1,...[;c0,c1,...]".
inline Curve curve_from_name(const std::string& name, Interval domain = kDefaultDomain) {
  if (name == "parabola") return parabola(domain);
  if (name == "expmix") return exp_mix(domain);
  if (name.rfind("veronese:", 0) == 0) {
    const std::string arg = name.substr(9);
    std::size_t used = 0;
    int n = 0;
    try {
      n = std::stoi(arg, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("unknown curve '" + name + "'");
    }
    if (used != arg.size()) throw std::invalid_argument("unknown curve '" + name + "'");
    return veronese(n, domain);
  }
  if (name.rfind("poly:", 0) == 0) {
    std::vector<std::vector<double>> coeffs;
    std::stringstream ss(name.substr(5));
    std::string part;
    while (std::getline(ss, part, ';')) coeffs.push_back(detail::parse_doubles(part, ','));
    if (coeffs.empty()) throw std::invalid_argument("poly curve needs coefficients");
    return polynomial_curve(coeffs, domain);
  }
  throw std::invalid_argument("unknown curve '" + name + "'");
}

// --------------------------------------------------------------------------
// Operations
// --------------------------------------------------------------------------

inline Jet eval_jet(const Curve& curve, double x, int order) {
  if (!curve.domain().contains(x))
    throw PreconditionError("eval_jet: x = " + std::to_string(x) + " outside domain " + to_string(curve.domain()));
  if (order < 0 || order > curve.l_max())
    throw PreconditionError("eval_jet: order " + std::to_string(order) + " exceeds l_max " +
                            std::to_string(curve.l_max()));
  Jet jet;
  jet.order = order;
  jet.values = Eigen::MatrixXd::Zero(curve.n(), order + 1);
  jet.values(0, 0) = x;
  if (order >= 1) jet.values(0, 1) = 1.0;
  std::vector<double> buf(static_cast<std::size_t>(order) + 1);
  for (int j = 0; j < curve.m(); ++j) {
    curve.coords()[static_cast<std::size_t>(j)].derivatives(x, buf);
    for (int k = 0; k <= order; ++k) jet.values(j + 1, k) = buf[static_cast<std::size_t>(k)];
  }
  return jet;
}

/// Singular values below this fraction of the largest count as zero.
inline constexpr double kRankTolerance = 1e-8;

inline int numerical_rank(const Eigen::MatrixXd& a, double rel_tol = kRankTolerance) {
  if (a.size() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > rel_tol * s(0)) ++rank;
  return rank;
}

/// Smallest l <= l_max such that f'(x), ..., f^{(l)}(x) span R^n.
inline std::optional<int> nondegeneracy_order(const Curve& curve, double x, int l_max) {
  const int top = std::min(l_max, curve.l_max());
  if (top < 1) return std::nullopt;
  const Jet jet = eval_jet(curve, x, top);
  for (int l = 1; l <= top; ++l) {
    if (l < curve.n()) continue;
    if (numerical_rank(jet.values.block(0, 1, curve.n(), l)) == curve.n()) return l;
  }
  return std::nullopt;
}

/// Grid estimate of max_j sup |f_j''| over the interval, inflated by `safety`.
/// Not a certified bound.
inline double second_derivative_bound(const Curve& curve, const Interval& interval, int grid_points = 10000,
                                      double safety = 1.05) {
  if (interval.empty()) throw PreconditionError("second_derivative_bound: empty interval");
  if (!curve.domain().contains(interval))
    throw PreconditionError("second_derivative_bound: interval not inside the curve domain");
  if (grid_points < 2) grid_points = 2;
  double best = 0.0;
  std::vector<double> buf(3);
  for (int i = 0; i < grid_points; ++i) {
    const double x = interval.lo + (interval.hi - interval.lo) * i / (grid_points - 1);
    for (const auto& c : curve.coords()) {
      c.derivatives(x, buf);
      best = std::max(best, std::abs(buf[2]));
    }
  }
  return best * safety;
}

/// g_j(x) = f_j(x) - x f_j'(x).
inline Eigen::VectorXd aux_g(const Curve& curve, double x) {
  const Jet jet = eval_jet(curve, x, 1);
  Eigen::VectorXd g(curve.m());
  for (int j = 0; j < curve.m(); ++j) g(j) = jet.values(j + 1, 0) - x * jet.values(j + 1, 1);
  return g;
}

}  // namespace ratpts
