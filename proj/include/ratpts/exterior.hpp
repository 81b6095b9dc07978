#pragma once

// Grassmann coordinates of integer multivectors and integer Hodge duals.

#include <cstdint>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "ratpts/common.hpp"
#include "ratpts/intmat.hpp"
#include "ratpts/lattice.hpp"

namespace ratpts {

/// All r-element subsets of {0..n-1} in lexicographic order.
inline std::vector<std::vector<int>> index_subsets(int n, int r) {
  std::vector<std::vector<int>> out;
  if (r < 0 || r > n) return out;
  std::vector<int> cur(static_cast<std::size_t>(r));
  std::iota(cur.begin(), cur.end(), 0);
  for (;;) {
    out.push_back(cur);
    int i = r - 1;
    while (i >= 0 && cur[static_cast<std::size_t>(i)] == n - r + i) --i;
    if (i < 0) break;
    ++cur[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < r; ++j) cur[static_cast<std::size_t>(j)] = cur[static_cast<std::size_t>(j - 1)] + 1;
  }
  return out;
}

/// v_1 ^ ... ^ v_r for the columns of `cols`, as its r x r minors over row
/// subsets in lexicographic order.
struct IntegerMultivector {
  int grade = 0;
  std::vector<long long> coords;

  __int128 squared_norm() const {
    __int128 s = 0;
    for (long long c : coords) s += static_cast<__int128>(c) * c;
    return s;
  }
  bool is_zero() const {
    for (long long c : coords)
      if (c != 0) return false;
    return true;
  }
};

inline IntegerMultivector wedge_columns(const IntMatrix& cols) {
  IntegerMultivector w;
  w.grade = static_cast<int>(cols.cols());
  const int n = static_cast<int>(cols.rows());
  for (const auto& rows : index_subsets(n, w.grade)) {
    IntMatrix sub(w.grade, w.grade);
    for (int i = 0; i < w.grade; ++i) sub.row(i) = cols.row(rows[static_cast<std::size_t>(i)]);
    w.coords.push_back(integer_determinant_ll(sub));
  }
  return w;
}

/// Integer basis a_1, ..., a_{n+1-r} (returned as columns) of the vectors
/// orthogonal to every column of Gamma, scaled so that
/// |a_1 ^ ... ^ a_{n+1-r}|_2 = |v_1 ^ ... ^ v_r|_2 exactly.
inline IntMatrix hodge_dual_basis(const IntMatrix& gamma) {
  const Eigen::Index dim = gamma.rows(), r = gamma.cols();
  if (r < 1 || r >= dim) throw PreconditionError("hodge_dual_basis: need 1 <= r < n+1 columns");
  if (integer_rank(gamma) < r) throw PreconditionError("hodge_dual_basis: Gamma is rank-deficient");
  IntMatrix kernel = integer_kernel(gamma.transpose());

  // Shorten the kernel basis; the transform stays exact in integers.
  Eigen::MatrixXd work = kernel.cast<double>();
  IntMatrix u;
  lll_reduce(work, u);
  kernel = kernel * u;

  // The kernel lattice is primitive, so its wedge norm is |w| / gcd(minors of Gamma).
  const IntegerMultivector w = wedge_columns(gamma);
  long long index = 0;
  for (long long c : w.coords) index = std::gcd(index, c);
  kernel.col(0) *= index;
  if (wedge_columns(kernel).squared_norm() != w.squared_norm())
    throw std::logic_error("hodge_dual_basis: wedge norms disagree");
  return kernel;
}

}  // namespace ratpts
