#include <benchmark/benchmark.h>

#include "rsym/ensembles.hpp"
#include "rsym/exact.hpp"
#include "rsym/gap.hpp"
#include "rsym/smallball.hpp"

namespace {

void BM_LinearSmallBallExact(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<double> a(n);
  for (std::size_t i = 0; i < n; ++i) a[i] = 1.0 + static_cast<double>(i % 7);
  const auto form = rsym::LinearForm::make(a);
  const auto law = rsym::AtomicLaw::uniform3();
  for (auto _ : state) {
    benchmark::DoNotOptimize(rsym::linear_small_ball_exact(form, law, 0.5).rho);
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_LinearSmallBallExact)->RangeMultiplier(2)->Range(16, 512)->Complexity();

void BM_SpectralSummary(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto m = rsym::sample_symmetric(rsym::AtomicLaw::bernoulli(), rsym::FixedPart::zero(), n,
                                        std::uint64_t{1});
  for (auto _ : state) {
    benchmark::DoNotOptimize(rsym::spectral_summary(m.m).sigma_n);
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SpectralSummary)->RangeMultiplier(2)->Range(16, 256)->Complexity(benchmark::oNCubed);

void BM_BareissRank(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  rsym::Stream s(5);
  std::vector<std::int64_t> base(n * n);
  for (auto& x : base) x = s.between(-1, 1);
  std::vector<std::int64_t> work(n * n);
  for (auto _ : state) {
    work = base;
    benchmark::DoNotOptimize(rsym::bareiss_rank(work, n, n));
  }
}
BENCHMARK(BM_BareissRank)->DenseRange(4, 12, 4);

void BM_GapEnumerate(benchmark::State& state) {
  const auto q = rsym::Gap::symmetric({rsym::Rational(1), rsym::Rational(37), rsym::Rational(1001)},
                                      {state.range(0), state.range(0), state.range(0)});
  for (auto _ : state) {
    benchmark::DoNotOptimize(rsym::is_proper(q));
  }
  state.counters["volume"] = static_cast<double>(q.volume());
}
BENCHMARK(BM_GapEnumerate)->Arg(2)->Arg(5)->Arg(10);

}  // namespace

BENCHMARK_MAIN();
