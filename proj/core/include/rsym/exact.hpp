#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rsym/rational.hpp"

namespace rsym {

/// Dense row-major matrix of exact rationals.
class ExactMatrix {
 public:
  ExactMatrix() = default;
  ExactMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols) {}

  static ExactMatrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  Rational& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const Rational& operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }

  bool is_square() const { return rows_ == cols_; }
  bool is_symmetric() const;

  /// Copy with row `row` and column `col` removed.
  ExactMatrix without(std::size_t row, std::size_t col) const;

  std::vector<double> to_doubles() const;

  friend bool operator==(const ExactMatrix&, const ExactMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Rational> data_;
};

/// Fraction-free (Bareiss) elimination on an integer buffer, in place.
/// Intermediate products use 128 bits; an entry that leaves the 64-bit range
/// raises kArithmeticOverflow. Returns the rank.
std::size_t bareiss_rank(std::span<std::int64_t> data, std::size_t rows,
                         std::size_t cols);

/// Determinant of a square integer matrix by Bareiss elimination.
std::int64_t bareiss_determinant(std::span<std::int64_t> data, std::size_t n);

std::size_t exact_rank(const ExactMatrix& m);
Rational exact_determinant(const ExactMatrix& m);

/// c_ij = (-1)^(i+j) det(m without row i and column j).
Rational cofactor(const ExactMatrix& m, std::size_t i, std::size_t j);

/// adj(m)_ij = c_ji(m).
ExactMatrix adjugate(const ExactMatrix& m);

}  // namespace rsym
