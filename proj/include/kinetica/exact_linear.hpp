#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "kinetica/network.hpp"

namespace kinetica {

using Rational = boost::multiprecision::cpp_rational;

/// Dense row-major matrix over the rationals.
class RationalMatrix {
 public:
  RationalMatrix() = default;
  RationalMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  static RationalMatrix from_integers(const std::vector<std::vector<int>>& rows, std::size_t cols);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  Rational& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const Rational& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Rational> data_;
};

/// Reduced row echelon form R of A together with the invertible transform E
/// satisfying E A = R. Rows of E past `rank` span the left nullspace of A.
struct RowReduction {
  RationalMatrix reduced;
  RationalMatrix transform;
  std::vector<std::size_t> pivot_columns;
  std::size_t rank() const { return pivot_columns.size(); }
};

RowReduction row_reduce(const RationalMatrix& a);

/// Basis of { x : A x = 0 }, one vector per free column.
std::vector<std::vector<Rational>> nullspace(const RationalMatrix& a);

/// Scales a rational vector to the primitive integer vector with the same
/// direction whose first non-zero entry is positive.
std::vector<std::int64_t> primitive_integer_vector(const std::vector<Rational>& x);

/// Integer basis of the vectors h with <h, d_plus(r) - d_minus(r)> = 0 for
/// every bulk reaction. Input and output reactions are ignored.
std::vector<std::vector<std::int64_t>> conservation_laws(const ReactionNetwork& network);

/// Same as conservation_laws, but every reaction (including inputs and
/// outputs) constrains h. This is the space of additive first integrals of
/// the full kinetic equations.
std::vector<std::vector<std::int64_t>> additive_integrals(const ReactionNetwork& network);

}  // namespace kinetica
