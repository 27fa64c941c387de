#include <doctest.h>

#include <cmath>
#include <sstream>

#include "rsym/ensembles.hpp"
#include "rsym/error.hpp"
#include "test_support.hpp"

using namespace rsym;

namespace {

DenseMatrix dense(std::initializer_list<std::initializer_list<double>> rows) {
  DenseMatrix m(rows.size(), rows.size());
  std::size_t i = 0;
  for (const auto& r : rows) {
    std::size_t j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

ExactMatrix exact(std::initializer_list<std::initializer_list<std::int64_t>> rows) {
  ExactMatrix m(rows.size(), rows.size());
  std::size_t i = 0;
  for (const auto& r : rows) {
    std::size_t j = 0;
    for (auto v : r) m(i, j++) = Rational(v);
    ++i;
  }
  return m;
}

}  // namespace

TEST_SUITE("ensembles") {

TEST_CASE("sample_symmetric") {
  const auto one = sample_symmetric(AtomicLaw::bernoulli(), FixedPart::from_exact(exact({{3}})), 1, 5);
  CHECK(one.m(0, 0) == 3 + one.x(0, 0));

  const auto a = sample_symmetric(AtomicLaw::bernoulli(), FixedPart::zero(), 3, 12);
  const auto b = sample_symmetric(AtomicLaw::bernoulli(), FixedPart::zero(), 3, 12);
  CHECK(a.m == b.m);
  CHECK(a.is_exact());
  CHECK(a.m.is_symmetric());
  for (double v : a.m.data) CHECK(std::fabs(v) == 1.0);

  // |f_12| = n^gamma + 1 breaks the declared bound.
  DenseMatrix f(3, 3);
  f(0, 1) = f(1, 0) = 3.0 + 1;
  try {
    sample_symmetric(AtomicLaw::bernoulli(), FixedPart::from_dense(f, 1.0), 3, 1);
    FAIL("expected BoundViolation");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kBoundViolation);
  }
}

TEST_CASE("spectral_summary") {
  const auto d = spectral_summary(dense({{3, 0}, {0, -1}}));
  CHECK(d.sigma_1 == doctest::Approx(3));
  CHECK(d.sigma_n == doctest::Approx(1));
  CHECK(d.kappa == doctest::Approx(3));
  CHECK(d.log_abs_det == doctest::Approx(std::log(3.0)));
  const auto s = spectral_summary(dense({{0, 1}, {1, 0}}));
  CHECK(s.eigenvalues[0] == doctest::Approx(-1));
  CHECK(s.eigenvalues[1] == doctest::Approx(1));
  CHECK(s.sigma_n == doctest::Approx(1));
}

TEST_CASE("exact_rank") {
  CHECK(exact_rank(SymmetricSample::from_exact(exact({{1, 1, 1}, {1, 1, 1}, {1, 1, 1}}))) == 1);
  CHECK(exact_rank(SymmetricSample::from_exact(exact({{0, 1}, {1, 0}}))) == 2);
}

TEST_CASE("cofactor expansion examples") {
  const auto c = cofactor_expansion_check(SymmetricSample::from_exact(exact({{3, 2}, {2, 5}})));
  CHECK(c.lhs == Rational(11));
  CHECK(c.rhs == Rational(11));
  CHECK(c.equal);
  const auto d = cofactor_expansion_check(SymmetricSample::from_exact(exact({{2, 0, 0}, {0, 3, 0}, {0, 0, 4}})));
  CHECK(d.equal);
  CHECK(d.lhs == Rational(24));
}

TEST_CASE("cofactor inequality audit") {
  const auto big = cofactor_inequality_check(SymmetricSample::from_exact(exact({{5, 0}, {0, 7}})), 2, 1, 0);
  CHECK_FALSE(big.hypothesis);
  CHECK(big.holds);

  // Singular exact matrix: sigma_n = 0, every step must hold exactly.
  const auto sing = cofactor_inequality_check(
      SymmetricSample::from_exact(exact({{1, 2, 3}, {2, 4, 6}, {3, 6, 10}})), 2, 1, 0);
  CHECK(sing.hypothesis);
  CHECK(sing.holds);

  const auto fl = cofactor_inequality_check(dense({{1, 1}, {1, 1 + 1e-6}}), 2, 0.5, 0);
  CHECK(fl.sigma_n == doctest::Approx(5e-7).epsilon(1e-3));
  CHECK(fl.hypothesis);
  CHECK(fl.holds);
}

TEST_CASE("grow_and_track") {
  const auto zero2 = SymmetricSample::from_exact(ExactMatrix(2, 2));
  const AtomicLaw law = parse_atomic_law("atoms[(0,1/2),(1,1/2)]");
  int jumps = 0;
  const int runs = 10'000;
  for (int t = 0; t < runs; ++t) jumps += grow_and_track(zero2, law, 1, t).front().jumped_by_2;
  const double p = static_cast<double>(jumps) / runs;
  const double se = std::sqrt(p * (1 - p) / runs);
  CHECK(p >= 0.5 - 3 * se);

  CHECK_THROWS_AS(grow_and_track(SymmetricSample::from_exact(ExactMatrix::identity(3)), law, 1, 0),
                  Error);
}

TEST_CASE("remove_pivot_row") {
  ExactMatrix d = ExactMatrix::identity(4);
  d(3, 3) = Rational(0);
  CHECK(remove_pivot_row(SymmetricSample::from_exact(d)) == 0);
  CHECK(remove_pivot_row(SymmetricSample::from_exact(exact({{1, 1}, {1, 1}}))) == 0);

  // Corank-1 6x6: B^T D B with a zero in D.
  Stream s(31);
  const auto m = test::random_symmetric_int(s, 5, -3, 3);
  ExactMatrix bordered(6, 6);
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 5; ++j) bordered(i, j) = m(i, j);
  }
  for (std::size_t i = 0; i < 5; ++i) {  // last row = row 0 + row 1
    bordered(5, i) = bordered(i, 5) = m(0, i) + m(1, i);
  }
  bordered(5, 5) = m(0, 0) + m(1, 1) + m(0, 1) + m(1, 0);
  const auto sample = SymmetricSample::from_exact(bordered);
  const std::size_t r = exact_rank(sample);
  if (r == 5) {
    const std::size_t idx = remove_pivot_row(sample);
    CHECK(exact_rank(SymmetricSample::from_exact(bordered.without(idx, idx))) >= 4);
  }
}

TEST_CASE("near_kernel_vector") {
  const auto nk = near_kernel_vector(SymmetricSample::from_dense(dense({{5, 0}, {0, 1e-8}})));
  CHECK(std::fabs(nk.u[1]) == doctest::Approx(1.0));
  CHECK(nk.residuals[0] == doctest::Approx(0.0));
  CHECK(nk.residuals[1] == doctest::Approx(1e-8));

  const auto sing = near_kernel_vector(SymmetricSample::from_exact(exact({{1, 1}, {1, 1}})));
  for (double r : sing.residuals) CHECK(r <= 1e-12);

  const auto big = sample_symmetric(AtomicLaw::bernoulli(), FixedPart::zero(), 100, 4);
  const auto k = near_kernel_vector(big);
  // M u = lambda u, so the residual vector is lambda u: its largest entry is
  // at most |lambda| and its norm is exactly |lambda|.
  CHECK(k.residuals.back() <= std::fabs(k.lambda) * (1 + 1e-9));
  double sq = 0;
  for (double r : k.residuals) sq += r * r;
  CHECK(std::sqrt(sq) == doctest::Approx(std::fabs(k.lambda)).epsilon(1e-9));
}

TEST_CASE("matrix I/O round trips") {
  const auto s = sample_symmetric(GaussianLaw{}, FixedPart::zero(), 5, 9);
  std::stringstream t;
  write_text(t, s.m);
  CHECK(read_text(t) == s.m);
  std::stringstream b;
  write_binary(b, s.m);
  CHECK(read_binary(b) == s.m);
  const ExactMatrix e = exact({{1, -2}, {-2, 7}});
  std::stringstream x;
  write_exact(x, e);
  CHECK(read_exact(x) == e);
  std::stringstream junk("1 2 3");
  CHECK_THROWS_AS(read_text(junk), Error);
}

TEST_CASE("property: spectral identities on random matrices") {
  Stream s(6);
  for (int iter = 0; iter < 60; ++iter) {
    const std::size_t n = 1 + s.below(60);
    const auto m = sample_symmetric(AtomicLaw::uniform3(), FixedPart::zero(), n, s);
    const auto sum = spectral_summary(m.m);
    double tr = 0, fro = 0, ls = 0, l2 = 0;
    for (std::size_t i = 0; i < n; ++i) tr += m.m(i, i);
    for (double v : m.m.data) fro += v * v;
    for (double l : sum.eigenvalues) {
      ls += l;
      l2 += l * l;
    }
    CHECK(std::fabs(ls - tr) <= 1e-9 * static_cast<double>(n) * std::max(1.0, std::sqrt(fro)));
    CHECK(std::fabs(l2 - fro) <= 1e-9 * std::max(1.0, fro));
    CHECK(m.m.is_symmetric());
  }
}

TEST_CASE("property: exact and floating rank agree on 8x8 Bernoulli") {
  for (std::uint64_t t = 0; t < 2000; ++t) {
    const auto m = sample_symmetric(AtomicLaw::bernoulli(), FixedPart::zero(), 8, t);
    REQUIRE(exact_rank(m) == floating_rank(m.m));
  }
}

TEST_CASE("property: cofactor identity and determinant cross-check") {
  Stream s(13);
  for (int iter = 0; iter < 200; ++iter) {
    const std::size_t n = 1 + s.below(6);
    const ExactMatrix m = test::random_symmetric_int(s, n, -9, 9);
    const auto sample = SymmetricSample::from_exact(m);
    const auto c = cofactor_expansion_check(sample);
    CHECK(c.equal);
    CHECK(c.lhs == test::laplace_det(m));
    const auto sum = spectral_summary(sample);
    if (!c.lhs.is_zero()) {
      CHECK(std::exp(sum.log_abs_det) == doctest::Approx(c.lhs.abs().to_double()).epsilon(1e-6));
    }
    if (n >= 2) CHECK(cofactor_inequality_check(sample, 1.0, 1.0, 1.0).holds);
  }
}

}  // TEST_SUITE
