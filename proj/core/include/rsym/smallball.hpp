#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rsym/laws.hpp"
#include "rsym/rational.hpp"

namespace rsym {

inline constexpr std::uint64_t kDefaultAtomCap = 10'000'000;

/// sum_i a_i (x_i + f_i). The exact coefficient copies, when present, are
/// used whenever the law is exact too.
struct LinearForm {
  std::vector<double> coefficients;
  std::vector<double> shifts;
  std::optional<std::vector<Rational>> exact_coefficients;
  std::optional<std::vector<Rational>> exact_shifts;

  static LinearForm make(std::vector<double> a, std::vector<double> f = {});
  static LinearForm exact(std::vector<Rational> a, std::vector<Rational> f = {});

  std::size_t size() const { return coefficients.size(); }
  bool is_exact() const { return exact_coefficients.has_value(); }
  void validate() const;
};

/// Square coefficient matrix with shifts: sum_ij a_ij (x_i + f_i)(y_j + f_j).
/// The quadratic small-ball routine additionally requires a_ij = a_ji.
struct QuadraticForm {
  std::size_t n = 0;
  std::vector<double> a;  // row-major n x n
  std::vector<double> shifts;
  std::optional<std::vector<Rational>> exact_a;
  std::optional<std::vector<Rational>> exact_shifts;

  static QuadraticForm make(std::size_t n, std::vector<double> a,
                            std::vector<double> f = {});
  static QuadraticForm exact(std::size_t n, std::vector<Rational> a,
                             std::vector<Rational> f = {});

  double operator()(std::size_t i, std::size_t j) const { return a[i * n + j]; }
  bool is_exact() const { return exact_a.has_value(); }
  bool is_symmetric() const;
  /// sum a_ij^2 == 1 within 1e-12.
  bool is_normalized() const;
  void validate() const;
};

enum class Method { kExact, kMonteCarlo };
std::string to_string(Method m);

struct SmallBallEstimate {
  double rho = 0;
  double beta = 0;
  Method method = Method::kExact;
  double ci_halfwidth = 0;
  double witness_center = 0;
  std::optional<Rational> exact_rho;     // set on the rational path
  std::optional<Rational> exact_center;  // idem
};

/// Exact law of sum a_i (x_i + f_i) by repeated convolution with canonical
/// merging; kAtomBlowup once the support exceeds `cap` atoms.
AtomicLaw linear_sum_law(const LinearForm& form, const AtomicLaw& law,
                         std::uint64_t cap = kDefaultAtomCap);

/// sup_a P(|S - a| <= beta) for S = sum a_i (x_i + f_i), evaluated exactly.
///
/// The sup over centers is a max over closed windows [v, v + 2 beta] whose
/// left edge is an atom v (any optimal window can be slid right until its
/// left edge meets an atom without losing mass). The reported center is the
/// first maximizing window's midpoint.
SmallBallEstimate linear_small_ball_exact(const LinearForm& form,
                                          const AtomicLaw& law, double beta,
                                          std::uint64_t cap = kDefaultAtomCap);
SmallBallEstimate linear_small_ball_exact(const LinearForm& form,
                                          const AtomicLaw& law,
                                          const Rational& beta,
                                          std::uint64_t cap = kDefaultAtomCap);

/// Probability mass of a law on the closed window [center - beta, center + beta].
double window_mass(const AtomicLaw& law, double center, double beta);

/// Half-width sqrt(ln(2/delta) / (2 trials)) of the DKW band at delta = 0.05.
double dkw_halfwidth(std::uint64_t trials, double delta = 0.05);

struct MonteCarloOptions {
  std::uint64_t trials = 100'000;
  std::uint64_t seed = 0;
  unsigned workers = 1;
};

/// Empirical sup-window mass over `trials` draws; trial t uses stream
/// (seed, t), so the estimate does not depend on `workers`.
SmallBallEstimate linear_small_ball_mc(const LinearForm& form,
                                       const Sampler& law, double beta,
                                       const MonteCarloOptions& options);

/// sup_a P(|sum a_ij (x_i+f_i)(x_j+f_j) - a| <= beta) by enumerating all
/// (#atoms)^n outcomes; kEnumerationTooLarge beyond 10^7.
SmallBallEstimate quadratic_small_ball_exact(
    const QuadraticForm& form, const AtomicLaw& law, double beta,
    std::uint64_t cap = kDefaultAtomCap);

/// Law of sum a_ij (x_i+f_i)(y_j+f_j) with independent x ~ law_x, y ~ law_y.
AtomicLaw bilinear_law(const QuadraticForm& form, const AtomicLaw& law_x,
                       const AtomicLaw& law_y, std::uint64_t cap = kDefaultAtomCap);

struct BilinearOptions {
  Method method = Method::kExact;
  MonteCarloOptions mc;
  std::uint64_t cap = kDefaultAtomCap;
};

SmallBallEstimate bilinear_small_ball(const QuadraticForm& form,
                                      const Sampler& law_x, const Sampler& law_y,
                                      double beta, const BilinearOptions& options);

struct TruncatedProduct {
  double product = 1;
  std::vector<double> factors;  // rho_beta^(i) for i = 1..n0
};

/// prod_{i=1}^{n0} sup_a P(|x_i u_i + ... + x_{n0} u_{n0} - a| <= beta).
TruncatedProduct truncated_product_bound(const std::vector<double>& u,
                                         const AtomicLaw& law, double beta,
                                         std::size_t n0,
                                         std::uint64_t cap = kDefaultAtomCap);

/// C(n, n/2) / 2^n, the largest atom of a sum of n Bernoulli signs (n even).
double central_binomial_mass(std::uint64_t n);

}  // namespace rsym
