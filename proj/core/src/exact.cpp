#include "rsym/exact.hpp"

#include <limits>
#include <utility>

#include "rsym/error.hpp"

namespace rsym {
namespace {

constexpr __int128 kMax64 = std::numeric_limits<std::int64_t>::max();
constexpr __int128 kMin64 = std::numeric_limits<std::int64_t>::min();

std::int64_t narrow(__int128 v) {
  if (v > kMax64 || v < kMin64) {
    fail(ErrorCode::kArithmeticOverflow, "Bareiss entry exceeds 64 bits");
  }
  return static_cast<std::int64_t>(v);
}

// Scales every row to integers; returns the product of the row scales.
Rational integerize(const ExactMatrix& m, std::vector<std::int64_t>& out) {
  out.assign(m.rows() * m.cols(), 0);
  Rational scale = 1;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    std::int64_t l = 1;
    for (std::size_t j = 0; j < m.cols(); ++j) l = checked_lcm(l, m(i, j).den());
    for (std::size_t j = 0; j < m.cols(); ++j) {
      const Rational& x = m(i, j);
      out[i * m.cols() + j] =
          narrow(static_cast<__int128>(x.num()) * (l / x.den()));
    }
    scale *= Rational(l);
  }
  return scale;
}

}  // namespace

ExactMatrix ExactMatrix::identity(std::size_t n) {
  ExactMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
  return m;
}

bool ExactMatrix::is_symmetric() const {
  if (!is_square()) return false;
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = i + 1; j < cols_; ++j) {
      if ((*this)(i, j) != (*this)(j, i)) return false;
    }
  }
  return true;
}

ExactMatrix ExactMatrix::without(std::size_t row, std::size_t col) const {
  ExactMatrix out(rows_ - 1, cols_ - 1);
  for (std::size_t i = 0, oi = 0; i < rows_; ++i) {
    if (i == row) continue;
    for (std::size_t j = 0, oj = 0; j < cols_; ++j) {
      if (j == col) continue;
      out(oi, oj++) = (*this)(i, j);
    }
    ++oi;
  }
  return out;
}

std::vector<double> ExactMatrix::to_doubles() const {
  std::vector<double> out(data_.size());
  for (std::size_t i = 0; i < data_.size(); ++i) out[i] = data_[i].to_double();
  return out;
}

std::size_t bareiss_rank(std::span<std::int64_t> a, std::size_t rows,
                         std::size_t cols) {
  std::int64_t prev = 1;
  std::size_t rank = 0;
  for (std::size_t c = 0; c < cols && rank < rows; ++c) {
    std::size_t pivot = rank;
    while (pivot < rows && a[pivot * cols + c] == 0) ++pivot;
    if (pivot == rows) continue;
    if (pivot != rank) {
      for (std::size_t j = 0; j < cols; ++j) {
        std::swap(a[pivot * cols + j], a[rank * cols + j]);
      }
    }
    const std::int64_t p = a[rank * cols + c];
    for (std::size_t i = rank + 1; i < rows; ++i) {
      const std::int64_t lead = a[i * cols + c];
      for (std::size_t j = c + 1; j < cols; ++j) {
        const __int128 v = static_cast<__int128>(p) * a[i * cols + j] -
                           static_cast<__int128>(lead) * a[rank * cols + j];
        a[i * cols + j] = narrow(v / prev);
      }
      a[i * cols + c] = 0;
    }
    prev = p;
    ++rank;
  }
  return rank;
}

std::int64_t bareiss_determinant(std::span<std::int64_t> a, std::size_t n) {
  if (n == 0) return 1;
  int sign = 1;
  std::int64_t prev = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (a[k * n + k] == 0) {
      std::size_t swap_row = k + 1;
      while (swap_row < n && a[swap_row * n + k] == 0) ++swap_row;
      if (swap_row == n) return 0;
      for (std::size_t j = 0; j < n; ++j) {
        std::swap(a[k * n + j], a[swap_row * n + j]);
      }
      sign = -sign;
    }
    const std::int64_t p = a[k * n + k];
    for (std::size_t i = k + 1; i < n; ++i) {
      for (std::size_t j = k + 1; j < n; ++j) {
        const __int128 v = static_cast<__int128>(p) * a[i * n + j] -
                           static_cast<__int128>(a[i * n + k]) * a[k * n + j];
        a[i * n + j] = narrow(v / prev);
      }
    }
    prev = p;
  }
  return sign * a[n * n - 1];
}

std::size_t exact_rank(const ExactMatrix& m) {
  std::vector<std::int64_t> buf;
  integerize(m, buf);
  return bareiss_rank(buf, m.rows(), m.cols());
}

Rational exact_determinant(const ExactMatrix& m) {
  if (!m.is_square()) fail(ErrorCode::kInvalidArgument, "determinant of non-square");
  std::vector<std::int64_t> buf;
  const Rational scale = integerize(m, buf);
  return Rational(bareiss_determinant(buf, m.rows())) / scale;
}

Rational cofactor(const ExactMatrix& m, std::size_t i, std::size_t j) {
  const Rational minor = exact_determinant(m.without(i, j));
  return ((i + j) % 2 == 0) ? minor : -minor;
}

ExactMatrix adjugate(const ExactMatrix& m) {
  if (!m.is_square()) fail(ErrorCode::kInvalidArgument, "adjugate of non-square");
  const std::size_t n = m.rows();
  ExactMatrix adj(n, n);
  if (n == 1) {
    adj(0, 0) = 1;
    return adj;
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) adj(j, i) = cofactor(m, i, j);
  }
  return adj;
}

}  // namespace rsym
