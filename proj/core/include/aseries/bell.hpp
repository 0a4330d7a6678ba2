#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace aseries {

/// Largest order handled by the Bell machinery. 12! still fits comfortably
/// into a signed 64-bit integer.
inline constexpr int kMaxBellOrder = 12;

/// Element j = (j_1, ..., j_{n-k+1}) of the index set J_k^n:
///   sum_l j_l = k   and   sum_l l * j_l = n.
struct MultiIndex {
  int n = 0;
  int k = 0;
  std::vector<int> entries;

  /// j! = j_1! j_2! ... j_{n-k+1}!
  std::int64_t factorial() const;

  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;
};

/// One monomial  coefficient * prod_l x_l^{j_l}  of the complete exponential
/// Bell polynomial B_n. The degree of the monomial is index.k.
struct BellMonomial {
  std::int64_t coefficient = 0;
  MultiIndex index;
};

/// All multi-indices of J_k^n in lexicographic order of their entries.
/// Throws std::invalid_argument unless 1 <= k <= n <= kMaxBellOrder.
std::vector<MultiIndex> enumerate_multi_indices(int n, int k);

/// Monomials of B_n grouped by increasing degree k. B_0 is the single
/// constant monomial 1 (k = 0, no entries).
std::vector<BellMonomial> bell_monomials(int n);

/// B_n(x_1, ..., x_n). Throws std::invalid_argument if xs.size() != n.
double bell_value(int n, std::span<const double> xs);

std::int64_t factorial(int n);
std::int64_t binomial(int n, int k);

}  // namespace aseries
