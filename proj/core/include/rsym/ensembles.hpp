#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "rsym/exact.hpp"
#include "rsym/laws.hpp"
#include "rsym/linalg.hpp"

namespace rsym {

enum class EntryKind { kExact, kFloating };

/// The fixed part F with its declared bound |f_ij| <= n^gamma.
struct FixedPart {
  std::optional<ExactMatrix> exact;
  DenseMatrix floating;
  std::optional<double> gamma;

  static FixedPart zero() { return {}; }
  static FixedPart from_exact(ExactMatrix f, std::optional<double> gamma = std::nullopt);
  static FixedPart from_dense(DenseMatrix f, std::optional<double> gamma = std::nullopt);

  bool is_zero() const { return !exact && floating.rows == 0; }
};

/// M = F + X with X symmetric and its upper triangle iid.
struct SymmetricSample {
  std::size_t n = 0;
  EntryKind kind = EntryKind::kFloating;
  DenseMatrix f;
  DenseMatrix x;
  DenseMatrix m;
  std::optional<ExactMatrix> exact_m;  // exact kind only

  static SymmetricSample from_exact(const ExactMatrix& m);
  static SymmetricSample from_dense(const DenseMatrix& m);

  bool is_exact() const { return kind == EntryKind::kExact; }
};

/// Draws x_ij for i <= j in row-major order from `stream`. The sample is exact
/// when the law is an exact atomic law and F is zero or exact.
SymmetricSample sample_symmetric(const Sampler& law, const FixedPart& f, std::size_t n,
                                 Stream& stream);
SymmetricSample sample_symmetric(const Sampler& law, const FixedPart& f, std::size_t n,
                                 std::uint64_t seed);

struct SpectralSummary {
  std::vector<double> eigenvalues;  // ascending
  double sigma_1 = 0;
  double sigma_n = 0;
  double kappa = 0;        // +inf when sigma_n == 0
  double log_abs_det = 0;  // -inf when an eigenvalue is exactly 0
  std::optional<std::size_t> corank;
};

SpectralSummary spectral_summary(const DenseMatrix& m);
SpectralSummary spectral_summary(const SymmetricSample& s);

std::size_t exact_rank(const SymmetricSample& s);

/// Rank from singular values above rel_tol * sigma_1 * n.
std::size_t floating_rank(const DenseMatrix& m, double rel_tol = 1e-8);

struct CofactorExpansion {
  Rational lhs;  // det M
  Rational rhs;  // m11 det A - x^T adj(A) x
  bool equal = false;
};

CofactorExpansion cofactor_expansion_check(const SymmetricSample& s);

/// Audit of the chain that turns sigma_n <= n^-A into a lower bound on the
/// cofactors of the minor. Row `pivot` of the cofactor matrix (the one of
/// largest norm) is moved to the front by a symmetric permutation first.
struct CofactorAudit {
  bool hypothesis = false;  // sigma_n <= n^-A
  std::size_t pivot = 0;
  double sigma_n = 0;
  bool row_bound = false;        // sum_j c_1j(M)^2 >= n^{2A-1} det^2
  bool row_expansion = false;    // c_1j(M) = -sum_i m_i1 c_ij(A), c_11(M) = det A
  bool cauchy_schwarz = false;   // c_1j(M)^2 <= sum m_i1^2 sum c_ij(A)^2
  bool entry_bound = false;      // sum_{i>=2} m_i1^2 <= n^{2B+2gamma+3}
  bool minor_bound = false;      // sum c_ij(A)^2 >= n^{2A-2B-2gamma-4} det^2
  bool holds = false;            // !hypothesis or every step holds
};

CofactorAudit cofactor_inequality_check(const SymmetricSample& s, double a_exp,
                                        double b_exp, double gamma);
/// Same chain in long double arithmetic, every comparison with relative
/// tolerance 1e-9.
CofactorAudit cofactor_inequality_check(const DenseMatrix& m, double a_exp, double b_exp,
                                        double gamma);

struct GrowthStep {
  std::size_t size = 0;  // dimension after bordering
  std::size_t rank = 0;
  bool jumped_by_2 = false;
};

/// Borders M with a fresh symmetric first row/column `steps` times. The new
/// diagonal entry and the off-diagonal entries are drawn independently.
std::vector<GrowthStep> grow_and_track(const SymmetricSample& s, const AtomicLaw& law,
                                       std::size_t steps, std::uint64_t seed);

/// Smallest index i whose symmetric removal keeps rank >= n - 2.
std::size_t remove_pivot_row(const SymmetricSample& s);

struct NearKernel {
  std::vector<double> u;          // unit eigenvector of the smallest |lambda|
  double lambda = 0;
  std::vector<double> residuals;  // |<u, row_i>| ascending
  double budget_residual = 0;     // largest residual among the best n - budget rows
};

NearKernel near_kernel_vector(const SymmetricSample& s, std::size_t row_budget = 0);

struct OdlyzkoResult {
  std::size_t n = 0;
  std::size_t k = 0;
  std::size_t dimension = 0;  // actual dim H
  std::uint64_t trials = 0;
  std::uint64_t hits = 0;
  double frequency = 0;
  double standard_error = 0;
  double bound = 0;  // (sqrt(1 - c3))^{n-k}
};

/// H is spanned by k vectors drawn from the law; trial t draws u from stream
/// (derived seed, t) and tests u in H exactly.
OdlyzkoResult odlyzko_experiment(const AtomicLaw& law, double c3, std::size_t n,
                                 std::size_t k, std::uint64_t trials, std::uint64_t seed,
                                 unsigned workers = 1);

// Matrix I/O. Text: n rows of n whitespace separated values.
// Binary: uint64 n, then n*n little-endian doubles row-major. Exact: text
// with fraction entries such as "3/4".
void write_text(std::ostream& os, const DenseMatrix& m);
DenseMatrix read_text(std::istream& is);
void write_binary(std::ostream& os, const DenseMatrix& m);
DenseMatrix read_binary(std::istream& is);
void write_exact(std::ostream& os, const ExactMatrix& m);
ExactMatrix read_exact(std::istream& is);

}  // namespace rsym
