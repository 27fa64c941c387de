#include <doctest.h>

#include <cmath>

#include "rsym/error.hpp"
#include "rsym/laws.hpp"
#include "test_support.hpp"

using namespace rsym;

namespace {

AtomicLaw exact_law(std::vector<std::pair<Rational, Rational>> atoms) {
  std::vector<ExactAtom> v;
  for (auto& [x, p] : atoms) v.push_back({x, p});
  return AtomicLaw::from_exact(v, "test");
}

void check_atoms(const AtomicLaw& law, const std::vector<std::pair<double, double>>& want) {
  REQUIRE(law.size() == want.size());
  for (std::size_t i = 0; i < want.size(); ++i) {
    CHECK(law.atoms()[i].value == doctest::Approx(want[i].first).epsilon(1e-12));
    CHECK(law.atoms()[i].mass == doctest::Approx(want[i].second).epsilon(1e-12));
  }
}

}  // namespace

TEST_SUITE("laws") {

TEST_CASE("canonical form merges, sorts and rejects bad masses") {
  const auto law = AtomicLaw::from_atoms({{1, 0.25}, {-1, 0.5}, {1, 0.25}}, "x");
  check_atoms(law, {{-1, 0.5}, {1, 0.5}});
  CHECK_THROWS_AS(AtomicLaw::from_atoms({{0, 0.5}, {1, 0.4}}, "x"), Error);
  CHECK_THROWS_AS(AtomicLaw::from_atoms({{0, -0.5}, {1, 1.5}}, "x"), Error);
  CHECK_THROWS_AS(AtomicLaw::from_atoms({{NAN, 1}}, "x"), Error);
}

TEST_CASE("standardize") {
  check_atoms(standardize(exact_law({{0, Rational(1, 2)}, {2, Rational(1, 2)}})),
              {{-1, 0.5}, {1, 0.5}});
  check_atoms(standardize(AtomicLaw::bernoulli()), {{-1, 0.5}, {1, 0.5}});
  const double r2 = std::sqrt(2.0);
  check_atoms(standardize(AtomicLaw::lazy_sign(Rational(1, 2))),
              {{-r2, 0.25}, {0, 0.5}, {r2, 0.25}});
}

TEST_CASE("difference_law") {
  const auto d = difference_law(AtomicLaw::bernoulli());
  REQUIRE(d.is_exact());
  CHECK(d.exact_atoms()[0].value == Rational(-2));
  CHECK(d.exact_atoms()[0].mass == Rational(1, 4));
  CHECK(d.exact_atoms()[1].mass == Rational(1, 2));
  check_atoms(difference_law(AtomicLaw::point_mass(0)), {{0, 1}});
  const auto u = difference_law(AtomicLaw::uniform3());
  const std::vector<Rational> want = {Rational(1, 9), Rational(2, 9), Rational(3, 9),
                                      Rational(2, 9), Rational(1, 9)};
  REQUIRE(u.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(u.exact_atoms()[i].value == Rational(static_cast<std::int64_t>(i) - 2));
    CHECK(u.exact_atoms()[i].mass == want[i]);
  }
}

TEST_CASE("lazy_difference_law") {
  const auto l = lazy_difference_law(AtomicLaw::bernoulli(), Rational(1, 2));
  REQUIRE(l.size() == 3);
  CHECK(l.exact_atoms()[0].mass == Rational(1, 8));
  CHECK(l.exact_atoms()[1].mass == Rational(3, 4));
  CHECK(l.exact_atoms()[2].mass == Rational(1, 8));
  check_atoms(lazy_difference_law(AtomicLaw::uniform3(), Rational(0)), {{0, 1}});
  check_atoms(lazy_difference_law(AtomicLaw::point_mass(0), Rational(1)), {{0, 1}});
}

TEST_CASE("verify_spacing") {
  CHECK(verify_spacing(AtomicLaw::bernoulli(), SpacingCertificate{2, 2, 0.5}));
  CHECK_FALSE(verify_spacing(AtomicLaw::bernoulli(), SpacingCertificate{1, 1.5, 0.1}));
  CHECK_FALSE(verify_spacing(AtomicLaw::point_mass(3), SpacingCertificate{0.1, 10, 0.01}));
  CHECK(verify_spacing(GaussianLaw{}, SpacingCertificate{1, 2, std::erf(1.0) - std::erf(0.5)}));
  CHECK_THROWS_AS(SpacingCertificate({2, 1, 0.5}).validate(), Error);
}

TEST_CASE("sample_truncated") {
  SamplerConfig cfg{42, 1.0, 7};
  const auto a = sample_truncated(AtomicLaw::bernoulli(), cfg, 4);
  const auto b = sample_truncated(AtomicLaw::bernoulli(), cfg, 4);
  CHECK(a == b);
  for (double x : a) CHECK(std::fabs(x) == 1.0);

  SamplerConfig g{1, 1.0, 10};
  for (double x : sample_truncated(GaussianLaw{}, g, 100'000)) REQUIRE(std::fabs(x) <= 100.0);

  SamplerConfig bad{1, 0.0, 2};
  CHECK_THROWS_AS(sample_truncated(exact_law({{-10, Rational(1, 2)}, {10, Rational(1, 2)}}), bad, 1),
                  Error);
}

TEST_CASE("law literals") {
  CHECK(law_label(parse_law("bernoulli")) == "bernoulli");
  CHECK(std::holds_alternative<GaussianLaw>(parse_law("gaussian")));
  const auto a = parse_atomic_law("atoms[(0,1/4),(3,3/4)]");
  CHECK(a.exact_atoms()[1].mass == Rational(3, 4));
  CHECK_THROWS_AS(parse_atomic_law("gaussian"), Error);
  CHECK_THROWS_AS(parse_law("nonsense"), Error);
}

TEST_CASE("property: difference law symmetric, standardize idempotent, Odlyzko atom bound") {
  Stream s(2024);
  for (int iter = 0; iter < 200; ++iter) {
    const std::size_t k = 1 + s.below(4);
    std::vector<ExactAtom> atoms;
    std::int64_t total = 0;
    std::vector<std::int64_t> w(k);
    for (auto& x : w) total += (x = 1 + s.between(0, 5));
    for (std::size_t i = 0; i < k; ++i) {
      atoms.push_back({Rational(s.between(-6, 6)), Rational(w[i], total)});
    }
    const AtomicLaw law = AtomicLaw::from_exact(atoms, "gen");
    CAPTURE(iter);

    const AtomicLaw d = difference_law(law);
    const auto& da = d.exact_atoms();
    for (std::size_t i = 0; i < da.size(); ++i) {
      CHECK(da[i].value == -da[da.size() - 1 - i].value);
      CHECK(da[i].mass == da[da.size() - 1 - i].mass);
    }

    if (law.size() > 1) {
      const AtomicLaw s1 = standardize(law);
      const AtomicLaw s2 = standardize(s1);
      REQUIRE(s1.size() == s2.size());
      for (std::size_t i = 0; i < s1.size(); ++i) {
        CHECK(std::fabs(s1.atoms()[i].value - s2.atoms()[i].value) <= 1e-12);
      }
      const auto cert = natural_certificate(law);
      REQUIRE(cert);
      REQUIRE(verify_spacing(law, *cert));
      // max mass <= sqrt(1 - c3), i.e. max mass^2 <= 1 - c3 exactly.
      Rational pmax(0);
      for (const auto& a : law.exact_atoms()) pmax = std::max(pmax, a.mass);
      Rational c3(0);
      for (const auto& a : law.exact_atoms()) c3 += a.mass * a.mass;
      c3 = Rational(1) - c3;  // P(xi != xi')
      CHECK(pmax * pmax <= Rational(1) - c3);
    }
  }
}

}  // TEST_SUITE
