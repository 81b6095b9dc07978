#pragma once

// Exact integer matrix helpers: determinants, unimodular column reduction
// (Hermite-style) and integer kernels. Entries stay small in this library
// (dimension <= 9), so 64-bit storage with 128-bit intermediates suffices;
// overflow is detected and reported rather than wrapped.

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace ratpts {

using IntMatrix = Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic>;
using IntVector = Eigen::Matrix<long long, Eigen::Dynamic, 1>;

namespace detail {
inline long long checked_narrow(__int128 v) {
  if (v > static_cast<__int128>(INT64_MAX) || v < static_cast<__int128>(INT64_MIN))
    throw std::overflow_error("integer matrix entry overflow");
  return static_cast<long long>(v);
}
}  // namespace detail

/// Exact determinant by fraction-free (Bareiss) elimination.
inline __int128 integer_determinant(const IntMatrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("integer_determinant: matrix not square");
  const Eigen::Index n = m.rows();
  if (n == 0) return 1;
  std::vector<std::vector<__int128>> a(static_cast<std::size_t>(n), std::vector<__int128>(static_cast<std::size_t>(n)));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) a[i][j] = m(i, j);
  int sign = 1;
  __int128 prev = 1;
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    if (a[k][k] == 0) {
      Eigen::Index p = k + 1;
      while (p < n && a[p][k] == 0) ++p;
      if (p == n) return 0;
      std::swap(a[k], a[p]);
      sign = -sign;
    }
    for (Eigen::Index i = k + 1; i < n; ++i)
      for (Eigen::Index j = k + 1; j < n; ++j) a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
    prev = a[k][k];
  }
  return sign * a[n - 1][n - 1];
}

inline long long integer_determinant_ll(const IntMatrix& m) { return detail::checked_narrow(integer_determinant(m)); }

inline bool is_unimodular(const IntMatrix& m) {
  if (m.rows() != m.cols()) return false;
  const __int128 d = integer_determinant(m);
  return d == 1 || d == -1;
}

/// Column-style echelon reduction A U = [H | 0] with U unimodular.
/// Returns the rank; `h` and `u` receive H-with-zero-columns and U.
inline int column_echelon(const IntMatrix& a, IntMatrix& h, IntMatrix& u) {
  h = a;
  const Eigen::Index rows = a.rows(), cols = a.cols();
  u = IntMatrix::Identity(cols, cols);
  Eigen::Index pivot_col = 0;
  for (Eigen::Index r = 0; r < rows && pivot_col < cols; ++r) {
    // Euclid on the entries h(r, pivot_col..cols-1) using column operations.
    for (;;) {
      Eigen::Index best = -1;
      for (Eigen::Index c = pivot_col; c < cols; ++c)
        if (h(r, c) != 0 && (best < 0 || std::llabs(h(r, c)) < std::llabs(h(r, best)))) best = c;
      if (best < 0) break;
      if (best != pivot_col) {
        h.col(best).swap(h.col(pivot_col));
        u.col(best).swap(u.col(pivot_col));
      }
      bool done = true;
      for (Eigen::Index c = pivot_col + 1; c < cols; ++c) {
        if (h(r, c) == 0) continue;
        const long long q = h(r, c) / h(r, pivot_col);
        for (Eigen::Index i = 0; i < rows; ++i)
          h(i, c) = detail::checked_narrow(static_cast<__int128>(h(i, c)) - static_cast<__int128>(q) * h(i, pivot_col));
        for (Eigen::Index i = 0; i < cols; ++i)
          u(i, c) = detail::checked_narrow(static_cast<__int128>(u(i, c)) - static_cast<__int128>(q) * u(i, pivot_col));
        if (h(r, c) != 0) done = false;
      }
      if (done) break;
    }
    if (h(r, pivot_col) != 0) {
      if (h(r, pivot_col) < 0) {
        h.col(pivot_col) *= -1;
        u.col(pivot_col) *= -1;
      }
      ++pivot_col;
    }
  }
  return static_cast<int>(pivot_col);
}

/// Basis (as columns) of the integer kernel {v in Z^cols : A v = 0}.
inline IntMatrix integer_kernel(const IntMatrix& a) {
  IntMatrix h, u;
  const int rank = column_echelon(a, h, u);
  return u.rightCols(a.cols() - rank);
}

inline int integer_rank(const IntMatrix& a) {
  IntMatrix h, u;
  return column_echelon(a, h, u);
}

inline long long gcd_of(const IntVector& v) {
  long long g = 0;
  for (Eigen::Index i = 0; i < v.size(); ++i) g = std::gcd(g, v(i));
  return g;
}

}  // namespace ratpts
