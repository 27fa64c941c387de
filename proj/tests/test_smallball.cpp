#include <doctest.h>

#include <cmath>
#include <map>

#include "rsym/error.hpp"
#include "rsym/smallball.hpp"
#include "test_support.hpp"

using namespace rsym;

namespace {

// Brute-force oracle: every outcome of n iid draws, then the best closed
// window of width 2 beta anchored at a value.
Rational brute_force_rho(const std::vector<Rational>& a, const std::vector<Rational>& f,
                         const AtomicLaw& law, const Rational& beta) {
  const auto& atoms = law.exact_atoms();
  const std::size_t n = a.size();
  std::map<Rational, Rational> dist;
  std::vector<std::size_t> idx(n, 0);
  while (true) {
    Rational s(0), p(1);
    for (std::size_t i = 0; i < n; ++i) {
      s += a[i] * (atoms[idx[i]].value + (f.empty() ? Rational(0) : f[i]));
      p *= atoms[idx[i]].mass;
    }
    dist[s] += p;
    std::size_t i = 0;
    while (i < n && ++idx[i] == atoms.size()) idx[i++] = 0;
    if (i == n) break;
  }
  Rational best(0);
  for (auto it = dist.begin(); it != dist.end(); ++it) {
    Rational mass(0);
    for (auto jt = it; jt != dist.end() && jt->first - it->first <= beta * Rational(2); ++jt) {
      mass += jt->second;
    }
    best = std::max(best, mass);
  }
  return best;
}

double window_of(const LinearForm& form, const AtomicLaw& law, double center, double beta) {
  return window_mass(linear_sum_law(form, law), center, beta);
}

}  // namespace

TEST_SUITE("smallball") {

TEST_CASE("linear exact examples") {
  const auto ones = LinearForm::exact(std::vector<Rational>(10, Rational(1)));
  const auto e = linear_small_ball_exact(ones, AtomicLaw::bernoulli(), Rational(0));
  REQUIRE(e.exact_rho);
  CHECK(*e.exact_rho == Rational(252, 1024));
  CHECK(e.ci_halfwidth == 0);

  const auto two = LinearForm::exact({Rational(1), Rational(1)});
  CHECK(*linear_small_ball_exact(two, AtomicLaw::bernoulli(), Rational(1)).exact_rho ==
        Rational(3, 4));

  const auto zero = LinearForm::make({0, 0, 0}, {1, 2, 3});
  const auto z = linear_small_ball_exact(zero, AtomicLaw::uniform3(), 0.0);
  CHECK(z.rho == 1.0);
  CHECK(z.witness_center == 0.0);
}

TEST_CASE("linear Monte Carlo examples") {
  const auto ones = LinearForm::make(std::vector<double>(10, 1.0));
  const auto mc = linear_small_ball_mc(ones, AtomicLaw::bernoulli(), 0.0, {200'000, 3, 1});
  CHECK(std::fabs(mc.rho - 0.24609375) <= mc.ci_halfwidth);
  CHECK(mc.method == Method::kMonteCarlo);

  const auto single = linear_small_ball_mc(ones, AtomicLaw::bernoulli(), 0.0, {1, 9, 1});
  CHECK(single.rho == 1.0);

  const auto g = linear_small_ball_mc(LinearForm::make({1.0}), GaussianLaw{}, 0.5, {200'000, 1, 1});
  CHECK(std::fabs(g.rho - std::erf(0.5 / std::sqrt(2.0))) <= g.ci_halfwidth);
}

TEST_CASE("Monte Carlo does not depend on worker count") {
  const auto form = LinearForm::make({1, 2, 3, 0.5});
  const auto a = linear_small_ball_mc(form, AtomicLaw::uniform3(), 0.3, {5000, 8, 1});
  const auto b = linear_small_ball_mc(form, AtomicLaw::uniform3(), 0.3, {5000, 8, 3});
  CHECK(a.rho == b.rho);
  CHECK(a.witness_center == b.witness_center);
}

TEST_CASE("quadratic exact examples") {
  const double r = 1 / std::sqrt(2.0);
  CHECK(quadratic_small_ball_exact(QuadraticForm::make(2, {0, r, r, 0}), AtomicLaw::bernoulli(), 0.1)
            .rho == doctest::Approx(0.5));
  CHECK(quadratic_small_ball_exact(QuadraticForm::make(3, std::vector<double>(9, 0.0)),
                                   AtomicLaw::uniform3(), 0.0)
            .rho == doctest::Approx(1.0));
  CHECK(quadratic_small_ball_exact(QuadraticForm::make(2, {1, 0, 0, 0}), AtomicLaw::bernoulli(), 0.0)
            .rho == 1.0);
}

TEST_CASE("bilinear examples") {
  BilinearOptions opt;
  const Sampler b = AtomicLaw::bernoulli();
  CHECK(bilinear_small_ball(QuadraticForm::make(1, {1}), b, b, 0.0, opt).rho == doctest::Approx(0.5));
  CHECK(bilinear_small_ball(QuadraticForm::make(2, {0, 0, 0, 0}), b, b, 0.0, opt).rho == 1.0);
  const double r = 1 / std::sqrt(2.0);
  CHECK(bilinear_small_ball(QuadraticForm::make(2, {r, 0, 0, r}), b, b, 0.0, opt).rho ==
        doctest::Approx(0.5));
}

TEST_CASE("truncated product") {
  const auto t = truncated_product_bound({1, 1}, AtomicLaw::bernoulli(), 0.0, 2);
  CHECK(t.product == doctest::Approx(0.25));
  CHECK(truncated_product_bound({5}, AtomicLaw::bernoulli(), 0.0, 1).product == doctest::Approx(0.5));

  // u_{n0} >= 1/(2 sqrt(n-1)) with a small beta: every factor <= 1 - c3.
  const std::size_t n = 10;
  const double floor_u = 1 / (2 * std::sqrt(n - 1.0));
  std::vector<double> u(n, floor_u);
  for (std::size_t i = 0; i < n; ++i) u[i] += 0.01 * static_cast<double>(i);
  const double beta = 0.9 * floor_u / 2;  // c1 = 2 for Bernoulli
  const auto b = truncated_product_bound(u, AtomicLaw::bernoulli(), beta, n);
  for (double f : b.factors) CHECK(f <= 0.5 + 1e-12);
}

TEST_CASE("central binomial scaling") {
  CHECK(central_binomial_mass(10) == doctest::Approx(252.0 / 1024.0).epsilon(1e-14));
  for (std::uint64_t n = 16; n <= 2000; n += 2) {
    const double s = central_binomial_mass(n) * std::sqrt(static_cast<double>(n));
    REQUIRE(s >= 0.6);
    REQUIRE(s <= 0.8);
  }
}

TEST_CASE("errors") {
  CHECK_THROWS_AS(linear_small_ball_exact(LinearForm::make(std::vector<double>(40, 0.0), {}),
                                          AtomicLaw::bernoulli(), -1.0),
                  Error);
  std::vector<double> wild(30);
  for (std::size_t i = 0; i < wild.size(); ++i) wild[i] = std::sqrt(2.0 + static_cast<double>(i));
  CHECK_THROWS_AS(linear_small_ball_exact(LinearForm::make(wild), AtomicLaw::bernoulli(), 0.0, 1000),
                  Error);
}

TEST_CASE("property: exact equals brute force, rho monotone in beta, witness realizes rho") {
  Stream s(99);
  const AtomicLaw laws[] = {AtomicLaw::bernoulli(), AtomicLaw::uniform3()};
  for (int iter = 0; iter < 120; ++iter) {
    const AtomicLaw& law = laws[iter % 2];
    const std::size_t n = 1 + s.below(iter % 2 ? 6 : 9);
    std::vector<Rational> a, f;
    for (std::size_t i = 0; i < n; ++i) {
      a.emplace_back(s.between(-5, 5), s.between(1, 3));
      f.emplace_back(s.between(-2, 2), 2);
    }
    const Rational beta(s.between(0, 4), 2);
    CAPTURE(iter);
    const auto form = LinearForm::exact(a, f);
    const auto est = linear_small_ball_exact(form, law, beta);
    REQUIRE(est.exact_rho);
    CHECK(*est.exact_rho == brute_force_rho(a, f, law, beta));
    CHECK(window_of(form, law, est.witness_center, beta.to_double()) ==
          doctest::Approx(est.rho).epsilon(1e-12));
    const auto wider = linear_small_ball_exact(form, law, beta + Rational(1, 3));
    CHECK(*wider.exact_rho >= *est.exact_rho);
  }
}

}  // TEST_SUITE
