#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rsym/exact.hpp"
#include "rsym/gap.hpp"
#include "rsym/laws.hpp"
#include "rsym/linalg.hpp"
#include "rsym/smallball.hpp"

namespace rsym {

/// Description of the row matrix R: identity except that each row i in I has
/// k on the diagonal and integer entries in the I0 columns (negated for the
/// I0'' columns). Indices are 0-based.
struct RowMatrixSpec {
  struct Entry {
    std::size_t row;
    std::size_t col;
    std::int64_t value;
    friend bool operator==(const Entry&, const Entry&) = default;
  };

  std::size_t n = 0;
  std::vector<std::size_t> rows;           // I
  std::vector<std::size_t> plus_columns;   // I0'
  std::vector<std::size_t> minus_columns;  // I0''
  std::int64_t k = 1;
  std::vector<Entry> coeffs;
  std::optional<double> bound_exponent;  // C: entries must satisfy |x| <= n^C

  /// kOverlapError if I meets I0; kInvalidArgument on bad indices or k = 0;
  /// kBoundViolation if an entry exceeds n^C.
  void validate() const;

  static RowMatrixSpec from_json(std::string_view text);
  std::string to_json() const;

  friend bool operator==(const RowMatrixSpec&, const RowMatrixSpec&) = default;
};

ExactMatrix build_row_matrix(const RowMatrixSpec& spec);

/// True iff every singular value of r lies in [n^-c, n^c].
bool conditioning_check(const DenseMatrix& r, double c);
bool conditioning_check(const ExactMatrix& r, double c);

struct Bipartition {
  std::vector<bool> membership;

  static Bipartition from_indices(std::size_t n, const std::vector<std::size_t>& members);
  /// Each index joins U independently with probability 1/2.
  static Bipartition random(std::size_t n, Stream& stream);

  std::size_t size() const { return membership.size(); }
  bool contains(std::size_t i) const { return membership[i]; }
};

/// Keeps a_ij only when exactly one of i, j lies in U. Shifts are kept.
QuadraticForm bipartition_matrix(const QuadraticForm& form, const Bipartition& u);
DenseMatrix bipartition_matrix(const DenseMatrix& a, const Bipartition& u);

/// (2 pi)^{7/2} exp(4 pi).
double decoupling_constant();

struct DecouplingOptions {
  Method method = Method::kExact;
  MonteCarloOptions mc;
  std::uint64_t cap = kDefaultAtomCap;
};

struct DecouplingRecord {
  double rho_quad = 0;     // quadratic small ball at radius beta
  double lhs = 0;          // rho_quad^8 / decoupling_constant()
  double radius = 0;       // radius_constant * beta * sqrt(log n)
  double rhs = 0;          // sup-over-centers small ball of A_U at `radius`
  double rhs_at_zero = 0;  // P(|v^T A_U w| <= radius)
  double slack = 0;        // Monte Carlo band, 0 when exact
  bool holds = false;      // rhs >= lhs - slack
  Method method = Method::kExact;
};

/// v and w are iid with the law of xi - xi'. Shifts of `form` enter the
/// quadratic side only.
DecouplingRecord verify_decoupling(const QuadraticForm& form, const AtomicLaw& law,
                                   double beta, const Bipartition& u,
                                   double radius_constant = 1.0,
                                   const DecouplingOptions& options = {});

struct DecouplingScan {
  std::vector<double> constants;
  std::vector<DecouplingRecord> records;
  std::optional<double> smallest_holding;
  bool needs_larger_constant = false;  // none of the scanned constants holds
};

DecouplingScan scan_decoupling(const QuadraticForm& form, const AtomicLaw& law,
                               double beta, const Bipartition& u,
                               const std::vector<double>& constants = {1, 2, 4},
                               const DecouplingOptions& options = {});

struct LoSearchOptions {
  std::uint64_t size_cap = 10'000;
  unsigned workers = 1;
  /// Distinct coefficient magnitudes tried as rank-2 reference pairs.
  std::size_t rank2_references = 6;
};

struct LoSearchResult {
  std::optional<Gap> gap;
  /// Lattice point of each coefficient inside the returned box, if covered.
  std::vector<std::optional<LatticePoint>> assignments;
  std::size_t covered = 0;
  std::size_t required = 0;    // n - n'
  std::size_t best_coverage = 0;  // largest coverage seen at any size
  std::size_t candidates = 0;
};

/// Rank <= 2 inverse Littlewood-Offord search. Generators are |a_j| / p for
/// reference coefficients a_j and 1 <= p <= sqrt(n'), rounded to exact
/// rationals by continued fractions; a coefficient is covered when some box
/// point lies within beta of it. The best candidate has the smallest size,
/// then the lexicographically smallest generator list.
LoSearchResult inverse_lo_search(const LinearForm& form, double beta, int rank_cap,
                                 std::size_t closeness_budget,
                                 const LoSearchOptions& options = {});

/// True iff every covered coefficient is within beta of q at its point.
bool check_cover(const Gap& q, const std::vector<double>& coefficients,
                 const std::vector<std::optional<LatticePoint>>& assignments,
                 double beta);

struct ForwardBound {
  double bound = 1;   // lower bound on sup_a P(|S - a| <= radius)
  double radius = 0;  // beta * n * max|atom|
};

/// Exact largest atom of sum Phi(p_i) x_i. Moving each coefficient by at most
/// beta shifts the sum by at most `radius`, so the bound carries over to any
/// coefficients beta-close to the assigned points.
ForwardBound forward_lo_bound(const Gap& q, const std::vector<LatticePoint>& assignments,
                              const AtomicLaw& law, double beta,
                              std::uint64_t cap = kDefaultAtomCap);

}  // namespace rsym
