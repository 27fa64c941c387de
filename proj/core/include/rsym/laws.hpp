#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rsym/random.hpp"
#include "rsym/rational.hpp"

namespace rsym {

struct Atom {
  double value;
  double mass;
};

struct ExactAtom {
  Rational value;
  Rational mass;
};

/// A finitely supported probability law.
///
/// Atoms are kept in canonical order (strictly increasing values, positive
/// masses summing to one). A law built from rational atoms also keeps the
/// exact representation; operations on it stay exact as long as the result
/// is rational, and the floating atoms are always derived from it one to one.
class AtomicLaw {
 public:
  /// Canonicalizes: sorts, drops zero masses, merges values that agree to
  /// 1e-12 relative. Throws kInvalidLaw on negative/non-finite input or if
  /// the masses do not sum to 1 within 1e-12.
  static AtomicLaw from_atoms(std::vector<Atom> atoms, std::string label);
  static AtomicLaw from_exact(std::vector<ExactAtom> atoms, std::string label);

  static AtomicLaw bernoulli();
  static AtomicLaw uniform3();
  static AtomicLaw point_mass(const Rational& value);
  /// The lazy sign: +-1 with probability mu/2 each, 0 otherwise.
  static AtomicLaw lazy_sign(const Rational& mu);

  const std::vector<Atom>& atoms() const { return atoms_; }
  bool is_exact() const { return exact_.has_value(); }
  const std::vector<ExactAtom>& exact_atoms() const;
  const std::string& label() const { return label_; }
  std::size_t size() const { return atoms_.size(); }

  double mean() const;
  double variance() const;
  double max_mass() const;
  double max_abs_value() const;

  /// Index of the atom selected by a uniform u in [0, 1) (inverse CDF).
  std::size_t index_for(double u) const;

 private:
  AtomicLaw() = default;

  std::vector<Atom> atoms_;
  std::vector<double> cumulative_;
  std::optional<std::vector<ExactAtom>> exact_;
  std::string label_;

  void finalize();
};

struct GaussianLaw {
  std::string label = "gaussian";
};

/// Anything entries can be drawn from: an atomic law or a standard Gaussian.
using Sampler = std::variant<AtomicLaw, GaussianLaw>;

struct SpacingCertificate {
  double c1;
  double c2;
  double c3;

  void validate() const;
};

struct SamplerConfig {
  std::uint64_t seed = 0;
  double truncation_exponent = 0.0;
  std::int64_t n = 1;

  /// n^(B+1); throws kInvalidArgument unless finite and positive.
  double truncation_bound() const;
};

AtomicLaw standardize(const AtomicLaw& law);

/// Exact law of xi - xi' for an independent copy xi'.
AtomicLaw difference_law(const AtomicLaw& law);

/// Exact law of eta^(mu) (xi - xi').
AtomicLaw lazy_difference_law(const AtomicLaw& law, const Rational& mu);
AtomicLaw lazy_difference_law(const AtomicLaw& law, double mu);

/// True iff P(c1 <= |xi - xi'| <= c2) >= c3, evaluated exactly on rational
/// laws. For the Gaussian the mass is taken from the closed-form normal CDF
/// and accepted within 1e-9 absolute.
bool verify_spacing(const AtomicLaw& law, const SpacingCertificate& cert);
bool verify_spacing(const GaussianLaw& law, const SpacingCertificate& cert);
bool verify_spacing(const Sampler& law, const SpacingCertificate& cert);

/// Mass of the difference law on {c1 <= |x| <= c2}.
double spacing_mass(const AtomicLaw& law, double c1, double c2);

/// The tightest certificate read off the law itself: c1 and c2 are the
/// smallest and largest nonzero |xi - xi'|, c3 = P(xi != xi'). Absent for a
/// point mass.
std::optional<SpacingCertificate> natural_certificate(const AtomicLaw& law);

/// One draw; atomic laws use inverse CDF on a 53-bit uniform.
double draw(const Sampler& law, Stream& stream);

/// Draws `count` values; draw i comes from stream (cfg.seed, i) and is
/// resampled while |x| > n^(B+1), at most 10^6 times, then
/// kRejectionDiverges.
std::vector<double> sample_truncated(const Sampler& law,
                                     const SamplerConfig& cfg,
                                     std::size_t count);

inline constexpr std::int64_t kRejectionRetryCap = 1'000'000;

/// Law literals: bernoulli, uniform3, gaussian, lazy(mu), point(v),
/// atoms[(v,p),(v,p),...] with v and p exact decimal or p/q literals.
Sampler parse_law(std::string_view literal);

/// Requires an atomic literal; throws kInvalidLaw for continuous ones.
AtomicLaw parse_atomic_law(std::string_view literal);

const std::string& law_label(const Sampler& law);
bool is_bounded(const Sampler& law);

}  // namespace rsym
