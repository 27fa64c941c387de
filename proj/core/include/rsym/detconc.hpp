#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rsym/ensembles.hpp"
#include "rsym/laws.hpp"

namespace rsym {

enum class CutoffSign { kPlus, kMinus };

/// log(max(eps, x)) for kPlus, log(max(eps, -x)) for kMinus; 1/eps-Lipschitz.
double cutoff_log(double x, double epsilon, CutoffSign sign);

struct CutoffSpec {
  double epsilon = 0;
  double delta = 0;
  double lipschitz_bound = 0;  // 1 / epsilon

  static CutoffSpec make(double epsilon, double delta);
  /// 16 C sqrt(pi) |f|_L / n.
  double delta0(double c, std::size_t n) const;
  /// Throws kInvalidArgument unless delta >= delta0(c, n).
  void validate(double c, std::size_t n) const;
};

/// Number of eigenvalues in the closed interval [lo, hi]; 0 when lo > hi.
std::size_t spectral_window_count(const SpectralSummary& summary, double lo, double hi);

struct TruncatedLogDet {
  double kept_sum = 0;        // sum of log|lambda| over |lambda| >= eps
  std::size_t dropped_count = 0;
  double dropped_sum = 0;     // sum of log|lambda| over |lambda| < eps
  double small_product_bound = 0;  // dropped_count * log(min |lambda|)
};

/// kDegenerateSpectrum if some eigenvalue is dropped and the smallest one is
/// numerically zero (|lambda| <= n * DBL_EPSILON * sigma_1).
TruncatedLogDet truncated_log_det(const SpectralSummary& summary, double epsilon);

struct DetConcOptions {
  std::optional<double> epsilon;  // default n^{-1/6}
  bool normalize = true;          // truncate the spectrum of M / sqrt(n)
  unsigned workers = 1;
};

struct DetConcRow {
  std::size_t n = 0;
  std::uint64_t trial = 0;
  std::uint64_t seed = 0;
  double log_abs_det = 0;
  double kept_sum = 0;
  std::size_t dropped_count = 0;
  double sigma_n = 0;
  double kappa = 0;
  bool singular = false;  // numerically zero eigenvalue; excluded from the statistics
};

struct DetConcStats {
  std::size_t n = 0;
  double epsilon = 0;
  std::uint64_t trials = 0;
  std::uint64_t singular_trials = 0;
  double mean_log_abs_det = 0;
  double std_log_abs_det = 0;
  double mean_kept = 0;
  double std_kept = 0;
  double ratio = 0;  // std_kept / (n^{1/3} log n)
  double mean_dropped = 0;
  double deviation_threshold = 0;  // 2 log n / eps
  double deviation_frequency = 0;  // share of trials with |U| >= threshold
  double predicted_scale = 0;      // exp(-log^2 n)
  /// Survival frequencies of |U| at thresholds multiplier * log n / eps.
  std::vector<double> survival_multipliers;
  std::vector<double> survival;
};

struct DetConcReport {
  std::vector<DetConcRow> rows;
  std::vector<DetConcStats> stats;
};

/// Requires a bounded law and trials >= 30. Trial t at size n uses the
/// stream derived from (seed, n, t). Numerically singular samples are kept
/// in the rows but left out of every statistic.
DetConcReport concentration_experiment(const Sampler& law,
                                       const std::vector<std::size_t>& n_list,
                                       std::uint64_t trials, std::uint64_t seed,
                                       const DetConcOptions& options = {});

struct WilsonInterval {
  double lo = 0;
  double hi = 0;
};

WilsonInterval wilson_interval(std::uint64_t hits, std::uint64_t trials, double z = 1.96);

enum class Verdict { kPass, kFail, kInconclusive };
const char* to_string(Verdict v);

/// Pass if the interval lies at or below the threshold, fail if strictly
/// above, inconclusive when it straddles.
Verdict verdict_below(const WilsonInterval& ci, double threshold);

struct TailRow {
  std::size_t n = 0;
  std::uint64_t trial = 0;
  std::uint64_t seed = 0;
  double sigma_n = 0;
  double kappa = 0;
};

struct TailStats {
  std::size_t n = 0;
  std::uint64_t trials = 0;
  double sigma_threshold = 0;  // n^{-A}
  double kappa_threshold = 0;  // n^{A}
  std::uint64_t sigma_hits = 0;
  std::uint64_t kappa_hits = 0;
  double sigma_frequency = 0;
  double kappa_frequency = 0;
  WilsonInterval sigma_ci;
  WilsonInterval kappa_ci;
};

struct LogLogFit {
  double slope = 0;
  double intercept = 0;
  std::size_t points = 0;
};

struct TailReport {
  std::vector<TailRow> rows;
  std::vector<TailStats> stats;
  std::optional<LogLogFit> sigma_fit;  // over n with nonzero frequency
};

struct TailOptions {
  std::optional<SpacingCertificate> certificate;  // default: the law's natural one
  unsigned workers = 1;
};

/// kSpacingUnverified unless the law passes its spacing certificate.
TailReport tail_experiment(const Sampler& law, const FixedPart& f,
                           const std::vector<std::size_t>& n_list, double a_exp,
                           std::uint64_t trials, std::uint64_t seed,
                           const TailOptions& options = {});

/// Least-squares fit of log y against log x over points with y > 0.
std::optional<LogLogFit> log_log_fit(const std::vector<double>& x,
                                     const std::vector<double>& y);

}  // namespace rsym
