#include "kinetica/exact_linear.hpp"

#include <stdexcept>
#include <utility>

namespace kinetica {

RationalMatrix RationalMatrix::from_integers(const std::vector<std::vector<int>>& rows,
                                             std::size_t cols) {
  RationalMatrix m(rows.size(), cols);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = rows[i].at(j);
  return m;
}

RowReduction row_reduce(const RationalMatrix& a) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  RowReduction out{a, RationalMatrix(m, m), {}};
  auto& r = out.reduced;
  auto& e = out.transform;
  for (std::size_t i = 0; i < m; ++i) e(i, i) = 1;

  auto swap_rows = [](RationalMatrix& x, std::size_t p, std::size_t q) {
    for (std::size_t j = 0; j < x.cols(); ++j) std::swap(x(p, j), x(q, j));
  };

  std::size_t row = 0;
  for (std::size_t col = 0; col < n && row < m; ++col) {
    std::size_t pivot = row;
    while (pivot < m && r(pivot, col) == 0) ++pivot;
    if (pivot == m) continue;
    swap_rows(r, row, pivot);
    swap_rows(e, row, pivot);
    const Rational inv = 1 / r(row, col);
    for (std::size_t j = 0; j < n; ++j) r(row, j) *= inv;
    for (std::size_t j = 0; j < m; ++j) e(row, j) *= inv;
    for (std::size_t i = 0; i < m; ++i) {
      if (i == row || r(i, col) == 0) continue;
      const Rational f = r(i, col);
      for (std::size_t j = 0; j < n; ++j) r(i, j) -= f * r(row, j);
      for (std::size_t j = 0; j < m; ++j) e(i, j) -= f * e(row, j);
    }
    out.pivot_columns.push_back(col);
    ++row;
  }
  return out;
}

std::vector<std::vector<Rational>> nullspace(const RationalMatrix& a) {
  const auto rr = row_reduce(a);
  const std::size_t n = a.cols();
  std::vector<bool> is_pivot(n, false);
  for (auto p : rr.pivot_columns) is_pivot[p] = true;
  std::vector<std::vector<Rational>> basis;
  for (std::size_t f = 0; f < n; ++f) {
    if (is_pivot[f]) continue;
    std::vector<Rational> x(n);
    x[f] = 1;
    for (std::size_t i = 0; i < rr.rank(); ++i) x[rr.pivot_columns[i]] = -rr.reduced(i, f);
    basis.push_back(std::move(x));
  }
  return basis;
}

std::vector<std::int64_t> primitive_integer_vector(const std::vector<Rational>& x) {
  using boost::multiprecision::cpp_int;
  cpp_int lcm_den = 1;
  for (const auto& q : x)
    if (q != 0) lcm_den = boost::multiprecision::lcm(lcm_den, denominator(q));
  std::vector<cpp_int> ints;
  ints.reserve(x.size());
  cpp_int g = 0;
  for (const auto& q : x) {
    cpp_int k = numerator(q) * (lcm_den / denominator(q));
    g = boost::multiprecision::gcd(g, k);
    ints.push_back(std::move(k));
  }
  std::vector<std::int64_t> out(x.size(), 0);
  if (g == 0) return out;
  int sign = 0;
  for (const auto& k : ints)
    if (k != 0) {
      sign = k > 0 ? 1 : -1;
      break;
    }
  for (std::size_t i = 0; i < ints.size(); ++i) {
    const cpp_int k = sign * ints[i] / g;
    if (k > INT64_MAX || k < INT64_MIN)
      throw std::overflow_error("conservation law coefficient exceeds 64 bits");
    out[i] = static_cast<std::int64_t>(k);
  }
  return out;
}

namespace {

std::vector<std::vector<std::int64_t>> integer_kernel(const ReactionNetwork& network,
                                                      bool include_open) {
  std::vector<std::vector<int>> rows;
  for (const auto& rx : network.reactions()) {
    if (!include_open && rx.kind != ReactionKind::bulk) continue;
    if (rx.is_null()) continue;
    rows.push_back(rx.net_change());
  }
  const auto basis = nullspace(RationalMatrix::from_integers(rows, network.species_count()));
  std::vector<std::vector<std::int64_t>> out;
  out.reserve(basis.size());
  for (const auto& x : basis) out.push_back(primitive_integer_vector(x));
  return out;
}

}  // namespace

std::vector<std::vector<std::int64_t>> conservation_laws(const ReactionNetwork& network) {
  return integer_kernel(network, false);
}

std::vector<std::vector<std::int64_t>> additive_integrals(const ReactionNetwork& network) {
  return integer_kernel(network, true);
}

}  // namespace kinetica
