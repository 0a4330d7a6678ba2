#include "aseries/bell.hpp"

#include <stdexcept>
#include <string>

namespace aseries {

std::int64_t factorial(int n) {
  if (n < 0 || n > 20) throw std::invalid_argument("factorial: argument out of range");
  std::int64_t r = 1;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

std::int64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::int64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

std::int64_t MultiIndex::factorial() const {
  std::int64_t r = 1;
  for (int j : entries) r *= aseries::factorial(j);
  return r;
}

namespace {

// Fills entries[pos..] so that the remaining count and weight are met.
// Iterating each slot from 0 upward yields lexicographic order.
void enumerate_rec(int pos, int remaining_k, int remaining_n, MultiIndex& cur,
                   std::vector<MultiIndex>& out) {
  const int len = static_cast<int>(cur.entries.size());
  if (pos == len) {
    if (remaining_k == 0 && remaining_n == 0) out.push_back(cur);
    return;
  }
  const int weight = pos + 1;
  for (int j = 0; j <= remaining_k && j * weight <= remaining_n; ++j) {
    cur.entries[pos] = j;
    enumerate_rec(pos + 1, remaining_k - j, remaining_n - j * weight, cur, out);
  }
  cur.entries[pos] = 0;
}

}  // namespace

std::vector<MultiIndex> enumerate_multi_indices(int n, int k) {
  if (n < 1 || n > kMaxBellOrder)
    throw std::invalid_argument("enumerate_multi_indices: n = " + std::to_string(n) +
                                " outside [1, " + std::to_string(kMaxBellOrder) + "]");
  if (k < 1 || k > n)
    throw std::invalid_argument("enumerate_multi_indices: k = " + std::to_string(k) +
                                " outside [1, n]");
  MultiIndex cur{n, k, std::vector<int>(static_cast<std::size_t>(n - k + 1), 0)};
  std::vector<MultiIndex> out;
  enumerate_rec(0, k, n, cur, out);
  return out;
}

std::vector<BellMonomial> bell_monomials(int n) {
  if (n < 0 || n > kMaxBellOrder)
    throw std::invalid_argument("bell_monomials: n = " + std::to_string(n) + " out of range");
  if (n == 0) return {BellMonomial{1, MultiIndex{0, 0, {}}}};

  const std::int64_t nfact = factorial(n);
  std::vector<BellMonomial> out;
  for (int k = 1; k <= n; ++k) {
    for (auto& j : enumerate_multi_indices(n, k)) {
      std::int64_t denom = j.factorial();
      for (std::size_t l = 0; l < j.entries.size(); ++l) {
        const std::int64_t lf = factorial(static_cast<int>(l) + 1);
        for (int p = 0; p < j.entries[l]; ++p) denom *= lf;
      }
      out.push_back(BellMonomial{nfact / denom, std::move(j)});
    }
  }
  return out;
}

double bell_value(int n, std::span<const double> xs) {
  if (n < 0 || static_cast<std::size_t>(n) != xs.size())
    throw std::invalid_argument("bell_value: expected " + std::to_string(n) +
                                " arguments, got " + std::to_string(xs.size()));
  double sum = 0.0;
  for (const auto& m : bell_monomials(n)) {
    double term = static_cast<double>(m.coefficient);
    for (std::size_t l = 0; l < m.index.entries.size(); ++l)
      for (int p = 0; p < m.index.entries[l]; ++p) term *= xs[l];
    sum += term;
  }
  return sum;
}

}  // namespace aseries
