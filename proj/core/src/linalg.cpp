#include "rsym/linalg.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "rsym/error.hpp"

namespace rsym {
namespace {

Eigen::MatrixXd to_eigen(const DenseMatrix& m) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(m.rows), static_cast<Eigen::Index>(m.cols));
  for (std::size_t i = 0; i < m.rows; ++i) {
    for (std::size_t j = 0; j < m.cols; ++j) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(i, j);
    }
  }
  return out;
}

}  // namespace

bool DenseMatrix::is_symmetric(double tol) const {
  if (!is_square()) return false;
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = i + 1; j < cols; ++j) {
      if (std::fabs((*this)(i, j) - (*this)(j, i)) > tol) return false;
    }
  }
  return true;
}

std::vector<double> singular_values(const DenseMatrix& m) {
  if (m.rows == 0 || m.cols == 0) return {};
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(to_eigen(m));
  const auto& s = svd.singularValues();
  return {s.data(), s.data() + s.size()};
}

EigenDecomposition symmetric_eigen(const DenseMatrix& m, bool with_vectors) {
  if (!m.is_square()) fail(ErrorCode::kInvalidArgument, "eigen-decomposition of non-square");
  EigenDecomposition out;
  if (m.rows == 0) return out;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      to_eigen(m), with_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    fail(ErrorCode::kConvergenceFailure, "symmetric eigensolver did not converge");
  }
  const auto& v = solver.eigenvalues();
  out.values.assign(v.data(), v.data() + v.size());
  if (with_vectors) {
    out.vectors = DenseMatrix(m.rows, m.cols);
    const auto& q = solver.eigenvectors();
    for (std::size_t i = 0; i < m.rows; ++i) {
      for (std::size_t j = 0; j < m.cols; ++j) {
        out.vectors(i, j) = q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      }
    }
  }
  return out;
}

}  // namespace rsym
