#include <doctest.h>

#include <cmath>

#include "rsym/detconc.hpp"
#include "rsym/error.hpp"
#include "test_support.hpp"

using namespace rsym;

namespace {

SpectralSummary diag_summary(std::vector<double> d) {
  DenseMatrix m(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return spectral_summary(m);
}

}  // namespace

TEST_SUITE("detconc") {

TEST_CASE("cutoff_log") {
  CHECK(cutoff_log(0.05, 0.1, CutoffSign::kPlus) == doctest::Approx(std::log(0.1)));
  CHECK(cutoff_log(1, 0.1, CutoffSign::kPlus) == 0.0);
  CHECK(cutoff_log(-2, 0.1, CutoffSign::kMinus) == doctest::Approx(std::log(2.0)));
  CHECK_THROWS_AS(cutoff_log(1, 0, CutoffSign::kPlus), Error);
}

TEST_CASE("cutoff spec") {
  const auto spec = CutoffSpec::make(0.5, 1.0);
  CHECK(spec.lipschitz_bound == 2.0);
  CHECK(spec.delta0(1.0, 100) == doctest::Approx(16 * std::sqrt(M_PI) * 2 / 100));
  CHECK_NOTHROW(spec.validate(1.0, 100));
  CHECK_THROWS_AS(spec.validate(1.0, 10), Error);
}

TEST_CASE("spectral_window_count") {
  const auto s = diag_summary({1, 2, 3});
  CHECK(spectral_window_count(s, 1.5, 2.5) == 1);
  CHECK(spectral_window_count(s, 2.5, 1.5) == 0);
  CHECK(spectral_window_count(s, 1, 3) == 3);
}

TEST_CASE("spectral window scaling for normalized Bernoulli") {
  const std::size_t n = 400;
  double total = 0;
  for (std::uint64_t t = 0; t < 20; ++t) {
    auto m = sample_symmetric(AtomicLaw::bernoulli(), FixedPart::zero(), n, t);
    auto s = spectral_summary(m.m);
    for (double& l : s.eigenvalues) l /= std::sqrt(static_cast<double>(n));
    total += static_cast<double>(spectral_window_count(s, -0.1, 0.1)) /
             (std::sqrt(static_cast<double>(n)) * 0.2 * std::sqrt(static_cast<double>(n)));
  }
  // Semicircle density at 0 is 1/pi, so the normalized count is near 0.32.
  CHECK(total / 20 <= 1.0);
  CHECK(total / 20 > 0.1);
}

TEST_CASE("truncated_log_det") {
  const auto t = truncated_log_det(diag_summary({3, -1, 0.01}), 0.1);
  CHECK(t.kept_sum == doctest::Approx(std::log(3.0)));
  CHECK(t.dropped_count == 1);
  CHECK(t.small_product_bound == doctest::Approx(std::log(0.01)));

  const auto s = diag_summary({3, -2, 0.5});
  const auto full = truncated_log_det(s, 0.1);
  CHECK(full.dropped_count == 0);
  CHECK(full.kept_sum == doctest::Approx(s.log_abs_det));

  try {
    truncated_log_det(diag_summary({1, 2, 0}), 0.1);
    FAIL("expected DegenerateSpectrum");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDegenerateSpectrum);
  }
}

TEST_CASE("concentration preconditions and the 1x1 case") {
  CHECK_THROWS_AS(concentration_experiment(AtomicLaw::bernoulli(), {10}, 29, 0), Error);
  CHECK_THROWS_AS(concentration_experiment(GaussianLaw{}, {10}, 30, 0), Error);

  const AtomicLaw law = parse_atomic_law("atoms[(1,1/2),(3,1/2)]");
  DetConcOptions opt;
  opt.epsilon = 0.5;
  const auto rep = concentration_experiment(law, {1}, 400, 3, opt);
  for (const auto& r : rep.rows) {
    CHECK((r.log_abs_det == 0.0 || r.log_abs_det == doctest::Approx(std::log(3.0))));
  }
  // log|m11| takes 0 and log 3 with equal mass: std = log(3)/2 up to sampling.
  CHECK(rep.stats[0].std_log_abs_det == doctest::Approx(std::log(3.0) / 2).epsilon(0.05));
}

TEST_CASE("concentration report shape and determinism") {
  DetConcOptions one, three;
  three.workers = 3;
  const auto a = concentration_experiment(AtomicLaw::bernoulli(), {30, 40}, 40, 5, one);
  const auto b = concentration_experiment(AtomicLaw::bernoulli(), {30, 40}, 40, 5, three);
  REQUIRE(a.rows.size() == 80);
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].log_abs_det == b.rows[i].log_abs_det);
    CHECK(a.rows[i].kept_sum == b.rows[i].kept_sum);
  }
  for (const auto& st : a.stats) {
    for (std::size_t i = 1; i < st.survival.size(); ++i) CHECK(st.survival[i] <= st.survival[i - 1]);
  }
}

TEST_CASE("wilson interval and verdicts") {
  const auto ci = wilson_interval(0, 10'000);
  CHECK(ci.lo == 0.0);
  CHECK(ci.hi < 0.001);
  CHECK(verdict_below(ci, 0.01) == Verdict::kPass);
  CHECK(verdict_below(wilson_interval(500, 1000), 0.01) == Verdict::kFail);
  CHECK(verdict_below(wilson_interval(10, 1000), 0.01) == Verdict::kInconclusive);
}

TEST_CASE("tail experiment") {
  const auto rep = tail_experiment(AtomicLaw::bernoulli(), FixedPart::zero(), {8, 12}, 0.0, 200, 4);
  CHECK(rep.rows.size() == 400);
  // Threshold 1: the smallest singular value of a small sign matrix is
  // typically below it.
  for (const auto& st : rep.stats) CHECK(st.sigma_frequency > 0.5);
  CHECK(rep.sigma_fit.has_value());
  try {
    tail_experiment(AtomicLaw::point_mass(1), FixedPart::zero(), {8}, 3.0, 10, 0);
    FAIL("expected SpacingUnverified");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kSpacingUnverified);
  }
}

TEST_CASE("property: Lipschitz bound, reconstruction, truncation consistency") {
  Stream s(404);
  for (int iter = 0; iter < 2000; ++iter) {
    const double eps = 0.01 + s.uniform();
    const double x = 10 * (s.uniform() - 0.5);
    const double y = 10 * (s.uniform() - 0.5);
    for (auto sign : {CutoffSign::kPlus, CutoffSign::kMinus}) {
      CHECK(std::fabs(cutoff_log(x, eps, sign) - cutoff_log(y, eps, sign)) <=
            std::fabs(x - y) / eps * (1 + 1e-12));
    }
    if (std::fabs(x) >= eps) {
      const double rec = cutoff_log(x, eps, CutoffSign::kPlus) +
                         cutoff_log(x, eps, CutoffSign::kMinus) - std::log(eps);
      CHECK(std::fabs(rec - std::log(std::fabs(x))) <= 1e-12);
    }
  }
  for (int iter = 0; iter < 40; ++iter) {
    const std::size_t n = 2 + s.below(30);
    const auto m = sample_symmetric(GaussianLaw{}, FixedPart::zero(), n, s);
    const auto sum = spectral_summary(m.m);
    const double eps = 0.05 + s.uniform();
    const auto t = truncated_log_det(sum, eps);
    CHECK(t.kept_sum + t.dropped_sum ==
          doctest::Approx(sum.log_abs_det).epsilon(1e-9).scale(1.0));
    // Partition of the line into intervals: counts sum to n.
    const double cut1 = s.normal(), cut2 = cut1 + std::fabs(s.normal());
    const std::size_t total = spectral_window_count(sum, -1e300, std::nextafter(cut1, -1e300)) +
                              spectral_window_count(sum, cut1, cut2) +
                              spectral_window_count(sum, std::nextafter(cut2, 1e300), 1e300);
    CHECK(total == n);
    if (eps <= 1) {
      // Truncated product >= full product when every dropped |lambda| <= eps <= 1.
      CHECK(t.kept_sum >= sum.log_abs_det - 1e-12);
    }
  }
}

}  // TEST_SUITE

TEST_CASE("singular samples are reported, not fatal") {
  const auto rep = concentration_experiment(AtomicLaw::bernoulli(), {6}, 200, 1);
  const auto& st = rep.stats[0];
  std::size_t flagged = 0;
  for (const auto& r : rep.rows) flagged += r.singular;
  CHECK(st.singular_trials == flagged);
  CHECK(st.singular_trials > 0);
  CHECK(std::isfinite(st.std_kept));
}
