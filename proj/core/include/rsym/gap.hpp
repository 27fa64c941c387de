#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rsym/rational.hpp"

namespace rsym {

using LatticePoint = std::vector<std::int64_t>;

inline constexpr std::uint64_t kDefaultEnumerationCap = 10'000'000;

/// Generalized arithmetic progression
///   { g0 + k_1 g_1 + ... + k_r g_r : lower_i <= k_i <= upper_i }.
///
/// Offset and generators are exact rationals, optionally all multiplied by a
/// common irrational unit (e.g. sqrt(2)); properness and membership are then
/// decided on the rational coefficients.
struct Gap {
  Rational offset;
  std::vector<Rational> generators;
  std::vector<std::int64_t> lower;
  std::vector<std::int64_t> upper;
  std::string unit_name;    // empty: plain rationals
  double unit_value = 1.0;  // numeric value of the unit

  static Gap symmetric(std::vector<Rational> generators,
                       std::vector<std::int64_t> bounds);

  std::size_t rank() const { return generators.size(); }
  bool is_symmetric() const;

  /// Throws kInvalidArgument on mismatched sizes or lower > upper.
  void validate() const;

  /// prod (upper_i - lower_i + 1); saturates at UINT64_MAX.
  std::uint64_t volume() const;

  bool in_box(const LatticePoint& p) const;

  double to_real(const Rational& value) const {
    return value.to_double() * unit_value;
  }

  /// gap{g0=0; g=[1,10]; K=[-2,-2]; K'=[2,2]} (plus "; unit=sqrt(2)").
  std::string literal() const;
  static Gap parse(std::string_view literal);

  friend bool operator==(const Gap&, const Gap&) = default;
};

/// Phi(p); throws kOutOfBox if p leaves the box.
Rational evaluate(const Gap& q, const LatticePoint& p);

/// All Phi(p) over the box with multiplicity, sorted ascending.
std::vector<Rational> enumerate(const Gap& q,
                                std::uint64_t cap = kDefaultEnumerationCap);

bool is_proper(const Gap& q, std::uint64_t cap = kDefaultEnumerationCap);

/// A lattice point whose value lies within beta of a: smallest distance
/// first, then lexicographically smallest coordinates.
std::optional<LatticePoint> beta_close(const Gap& q, const Rational& a,
                                       const Rational& beta,
                                       std::uint64_t cap = kDefaultEnumerationCap);
std::optional<LatticePoint> beta_close(const Gap& q, double a, double beta,
                                       std::uint64_t cap = kDefaultEnumerationCap);

/// True iff the points have full rank r = rank(q) over the rationals.
bool spans(const Gap& q, const std::vector<LatticePoint>& points);

/// Primitive integer vectors spanning {alpha : alpha . p = 0 for every point},
/// one per free column of the reduced row echelon form, each with its last
/// nonzero entry positive. Empty when the points span Q^dimension.
std::vector<std::vector<std::int64_t>> integer_kernel_basis(
    const std::vector<LatticePoint>& points, std::size_t dimension);

/// Primitive integer alpha != 0 with alpha . p = 0 for every point, last
/// nonzero entry positive. Among the kernel basis vectors obtained from the
/// reduced row echelon form (one per free column) the one with the smallest
/// max-norm is returned, ties broken lexicographically. Throws kFullRank if
/// the points span Z^dimension.
std::vector<std::int64_t> integer_hyperplane(
    const std::vector<LatticePoint>& points, std::size_t dimension);

struct ReductionStep {
  enum class Kind { kWitnessHyperplane, kGeneratorRelation, kDropTrivial };
  Kind kind;
  std::vector<std::int64_t> relation;  // alpha or the collision relation
  std::size_t eliminated = 0;          // coordinate removed
};

struct ReductionResult {
  Gap gap;
  std::vector<LatticePoint> witnesses;  // coordinates in the result
  std::vector<ReductionStep> steps;
  double volume_inflation = 1.0;  // vol(result) / vol(input)
};

/// Shrinks a proper symmetric GAP until the witnesses span it.
///
/// Each degenerate step follows the elimination g_i' = g_i - alpha_i w with
/// w = g_j / alpha_j for the last index j where alpha_j != 0. If the result
/// is not proper, an enumerated collision gives an integer relation among
/// the generators, which a unimodular change of coordinates turns into a
/// zero generator that is dropped; the new box is the image of the old one,
/// so containment is preserved. Every step lowers the rank, so the loop ends
/// after at most rank(q) steps. kReductionStalled is raised if a box would
/// exceed the enumeration cap.
ReductionResult rank_reduce(const Gap& q, const std::vector<Rational>& values,
                            const std::vector<LatticePoint>& witnesses,
                            std::uint64_t cap = kDefaultEnumerationCap);

/// Same, with witnesses recovered by enumeration (q must be proper).
ReductionResult rank_reduce(const Gap& q, const std::vector<Rational>& values,
                            std::uint64_t cap = kDefaultEnumerationCap);

}  // namespace rsym
