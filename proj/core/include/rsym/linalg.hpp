#pragma once

#include <cstddef>
#include <vector>

namespace rsym {

/// Dense row-major real matrix.
struct DenseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  DenseMatrix() = default;
  DenseMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
  bool is_square() const { return rows == cols; }
  bool is_symmetric(double tol = 0.0) const;

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;
};

/// Singular values in descending order.
std::vector<double> singular_values(const DenseMatrix& m);

struct EigenDecomposition {
  std::vector<double> values;  // ascending
  DenseMatrix vectors;         // column k pairs with values[k]
};

/// Symmetric eigen-decomposition; reads only the lower triangle.
EigenDecomposition symmetric_eigen(const DenseMatrix& m, bool with_vectors = true);

}  // namespace rsym
