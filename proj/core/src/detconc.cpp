#include "rsym/detconc.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <numbers>

#include "rsym/error.hpp"
#include "rsym/parallel.hpp"

namespace rsym {
namespace {

struct Moments {
  double mean = 0;
  double sd = 0;
};

Moments moments(const std::vector<double>& v) {
  Moments m;
  if (v.empty()) return m;
  long double s = 0;
  for (double x : v) s += x;
  m.mean = static_cast<double>(s / static_cast<long double>(v.size()));
  if (v.size() < 2) return m;
  long double q = 0;
  for (double x : v) q += (x - m.mean) * (x - m.mean);
  m.sd = static_cast<double>(std::sqrt(q / static_cast<long double>(v.size() - 1)));
  return m;
}

std::optional<SpacingCertificate> default_certificate(const Sampler& law) {
  if (const auto* a = std::get_if<AtomicLaw>(&law)) return natural_certificate(*a);
  // xi - xi' ~ N(0, 2).
  return SpacingCertificate{1.0, 2.0, std::erf(1.0) - std::erf(0.5)};
}

}  // namespace

double cutoff_log(double x, double epsilon, CutoffSign sign) {
  if (!(epsilon > 0)) fail(ErrorCode::kInvalidArgument, "epsilon must be > 0");
  const double y = sign == CutoffSign::kPlus ? x : -x;
  return std::log(std::max(epsilon, y));
}

CutoffSpec CutoffSpec::make(double epsilon, double delta) {
  if (!(epsilon > 0) || !(delta > 0)) {
    fail(ErrorCode::kInvalidArgument, "epsilon and delta must be > 0");
  }
  return {epsilon, delta, 1.0 / epsilon};
}

double CutoffSpec::delta0(double c, std::size_t n) const {
  return 16.0 * c * std::sqrt(std::numbers::pi) * lipschitz_bound / static_cast<double>(n);
}

void CutoffSpec::validate(double c, std::size_t n) const {
  if (!(epsilon > 0) || !(delta > 0)) {
    fail(ErrorCode::kInvalidArgument, "epsilon and delta must be > 0");
  }
  if (delta < delta0(c, n)) {
    fail(ErrorCode::kInvalidArgument, "delta " + std::to_string(delta) + " is below delta0 = " +
                                          std::to_string(delta0(c, n)));
  }
}

std::size_t spectral_window_count(const SpectralSummary& summary, double lo, double hi) {
  if (!(lo <= hi)) return 0;
  const auto& ev = summary.eigenvalues;
  const auto first = std::lower_bound(ev.begin(), ev.end(), lo);
  const auto last = std::upper_bound(ev.begin(), ev.end(), hi);
  return last > first ? static_cast<std::size_t>(last - first) : 0;
}

TruncatedLogDet truncated_log_det(const SpectralSummary& summary, double epsilon) {
  if (!(epsilon > 0)) fail(ErrorCode::kInvalidArgument, "epsilon must be > 0");
  TruncatedLogDet out;
  double min_abs = INFINITY;
  double max_abs = 0;
  for (double l : summary.eigenvalues) {
    const double a = std::fabs(l);
    min_abs = std::min(min_abs, a);
    max_abs = std::max(max_abs, a);
  }
  long double kept = 0;
  long double dropped = 0;
  for (double l : summary.eigenvalues) {
    const double a = std::fabs(l);
    if (a >= epsilon) {
      kept += std::log(static_cast<long double>(a));
    } else {
      ++out.dropped_count;
      dropped += std::log(static_cast<long double>(a));
    }
  }
  const double zero_level =
      static_cast<double>(summary.eigenvalues.size()) * DBL_EPSILON * max_abs;
  if (out.dropped_count > 0 && min_abs <= zero_level) {
    fail(ErrorCode::kDegenerateSpectrum, "smallest eigenvalue is numerically zero");
  }
  out.kept_sum = static_cast<double>(kept);
  out.dropped_sum = static_cast<double>(dropped);
  out.small_product_bound =
      out.dropped_count > 0 ? static_cast<double>(out.dropped_count) * std::log(min_abs) : 0.0;
  return out;
}

DetConcReport concentration_experiment(const Sampler& law,
                                       const std::vector<std::size_t>& n_list,
                                       std::uint64_t trials, std::uint64_t seed,
                                       const DetConcOptions& options) {
  if (trials < 30) fail(ErrorCode::kInvalidArgument, "concentration needs trials >= 30");
  if (!is_bounded(law)) fail(ErrorCode::kInvalidArgument, "concentration needs a bounded law");
  if (n_list.empty()) fail(ErrorCode::kInvalidArgument, "n_list is empty");
  DetConcReport report;
  for (std::size_t n : n_list) {
    if (n == 0) fail(ErrorCode::kInvalidArgument, "n must be >= 1");
    const double nd = static_cast<double>(n);
    const double eps = options.epsilon.value_or(std::pow(nd, -1.0 / 6.0));
    if (!(eps > 0)) fail(ErrorCode::kInvalidArgument, "epsilon must be > 0");
    const double scale = options.normalize ? 1.0 / std::sqrt(nd) : 1.0;

    std::vector<DetConcRow> rows(trials);
    parallel_for(trials, options.workers, [&](std::size_t t) {
      const std::uint64_t s = derive_seed(seed, n, t);
      const SymmetricSample m = sample_symmetric(law, FixedPart::zero(), n, s);
      SpectralSummary summary = spectral_summary(m.m);
      DetConcRow& row = rows[t];
      row.n = n;
      row.trial = t;
      row.seed = s;
      row.log_abs_det = summary.log_abs_det;
      row.sigma_n = summary.sigma_n;
      row.kappa = summary.kappa;
      for (double& l : summary.eigenvalues) l *= scale;
      try {
        const TruncatedLogDet tr = truncated_log_det(summary, eps);
        row.kept_sum = tr.kept_sum;
        row.dropped_count = tr.dropped_count;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kDegenerateSpectrum) throw;
        row.singular = true;
        long double kept = 0;
        for (double l : summary.eigenvalues) {
          if (std::fabs(l) >= eps) {
            kept += std::log(static_cast<long double>(std::fabs(l)));
          } else {
            ++row.dropped_count;
          }
        }
        row.kept_sum = static_cast<double>(kept);
      }
    });

    std::vector<double> logdet, kept, dropped;
    std::uint64_t singular = 0;
    for (const auto& r : rows) {
      if (r.singular) {
        ++singular;
        continue;
      }
      logdet.push_back(r.log_abs_det);
      kept.push_back(r.kept_sum);
      dropped.push_back(static_cast<double>(r.dropped_count));
    }
    DetConcStats st;
    st.n = n;
    st.epsilon = eps;
    st.trials = trials;
    st.singular_trials = singular;
    if (logdet.size() < 2) {
      fail(ErrorCode::kDegenerateSpectrum, "fewer than two nonsingular samples at n = " + std::to_string(n));
    }
    const Moments ml = moments(logdet);
    const Moments mk = moments(kept);
    st.mean_log_abs_det = ml.mean;
    st.std_log_abs_det = ml.sd;
    st.mean_kept = mk.mean;
    st.std_kept = mk.sd;
    const double logn = std::log(nd);
    st.ratio = logn > 0 ? mk.sd / (std::cbrt(nd) * logn) : 0.0;
    st.mean_dropped = moments(dropped).mean;
    st.deviation_threshold = 2.0 * logn / eps;
    st.predicted_scale = std::exp(-logn * logn);
    auto frequency_at = [&](double threshold) {
      std::size_t hits = 0;
      for (double k : kept) hits += std::fabs(k - mk.mean) >= threshold;
      return static_cast<double>(hits) / static_cast<double>(kept.size());
    };
    st.deviation_frequency = frequency_at(st.deviation_threshold);
    st.survival_multipliers = {0.25, 0.5, 1.0, 2.0, 4.0};
    for (double mult : st.survival_multipliers) {
      st.survival.push_back(frequency_at(mult * logn / eps));
    }
    report.stats.push_back(st);
    report.rows.insert(report.rows.end(), rows.begin(), rows.end());
  }
  return report;
}

WilsonInterval wilson_interval(std::uint64_t hits, std::uint64_t trials, double z) {
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(hits) / n;
  const double z2 = z * z;
  const double denom = 1 + z2 / n;
  const double center = (p + z2 / (2 * n)) / denom;
  const double half = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::kPass: return "pass";
    case Verdict::kFail: return "fail";
    case Verdict::kInconclusive: return "inconclusive";
  }
  return "inconclusive";
}

Verdict verdict_below(const WilsonInterval& ci, double threshold) {
  if (ci.hi <= threshold) return Verdict::kPass;
  if (ci.lo > threshold) return Verdict::kFail;
  return Verdict::kInconclusive;
}

std::optional<LogLogFit> log_log_fit(const std::vector<double>& x,
                                     const std::vector<double>& y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i) {
    if (x[i] > 0 && y[i] > 0) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  }
  if (lx.size() < 2) return std::nullopt;
  const Moments mx = moments(lx);
  const Moments my = moments(ly);
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx.mean) * (ly[i] - my.mean);
    sxx += (lx[i] - mx.mean) * (lx[i] - mx.mean);
  }
  if (sxx == 0) return std::nullopt;
  LogLogFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my.mean - fit.slope * mx.mean;
  fit.points = lx.size();
  return fit;
}

TailReport tail_experiment(const Sampler& law, const FixedPart& f,
                           const std::vector<std::size_t>& n_list, double a_exp,
                           std::uint64_t trials, std::uint64_t seed,
                           const TailOptions& options) {
  const auto cert = options.certificate ? options.certificate : default_certificate(law);
  if (!cert || !verify_spacing(law, *cert)) {
    fail(ErrorCode::kSpacingUnverified, "law " + law_label(law) + " has no passing spacing certificate");
  }
  if (trials < 1) fail(ErrorCode::kInvalidArgument, "trials must be >= 1");
  if (n_list.empty()) fail(ErrorCode::kInvalidArgument, "n_list is empty");
  TailReport report;
  std::vector<double> ns, freqs;
  for (std::size_t n : n_list) {
    if (n == 0) fail(ErrorCode::kInvalidArgument, "n must be >= 1");
    if (!f.is_zero() && f.floating.rows != n) {
      fail(ErrorCode::kInvalidArgument, "fixed part size differs from n = " + std::to_string(n));
    }
    const double nd = static_cast<double>(n);
    std::vector<TailRow> rows(trials);
    parallel_for(trials, options.workers, [&](std::size_t t) {
      const std::uint64_t s = derive_seed(seed, n, t);
      const SymmetricSample m = sample_symmetric(law, f, n, s);
      const SpectralSummary summary = spectral_summary(m.m);
      rows[t] = {n, t, s, summary.sigma_n, summary.kappa};
    });
    TailStats st;
    st.n = n;
    st.trials = trials;
    st.sigma_threshold = std::pow(nd, -a_exp);
    st.kappa_threshold = std::pow(nd, a_exp);
    for (const auto& r : rows) {
      st.sigma_hits += r.sigma_n <= st.sigma_threshold;
      st.kappa_hits += r.kappa >= st.kappa_threshold;
    }
    st.sigma_frequency = static_cast<double>(st.sigma_hits) / static_cast<double>(trials);
    st.kappa_frequency = static_cast<double>(st.kappa_hits) / static_cast<double>(trials);
    st.sigma_ci = wilson_interval(st.sigma_hits, trials);
    st.kappa_ci = wilson_interval(st.kappa_hits, trials);
    ns.push_back(nd);
    freqs.push_back(st.sigma_frequency);
    report.stats.push_back(st);
    report.rows.insert(report.rows.end(), rows.begin(), rows.end());
  }
  report.sigma_fit = log_log_fit(ns, freqs);
  return report;
}

}  // namespace rsym
