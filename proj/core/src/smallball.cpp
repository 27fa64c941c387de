#include "rsym/smallball.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rsym/error.hpp"
#include "rsym/parallel.hpp"

namespace rsym {
namespace {

constexpr double kMergeRelTol = 1e-12;

// Finite distribution kept as parallel value/mass arrays; T is double or
// Rational for both values and masses.
template <class T>
struct Dist {
  std::vector<T> values;
  std::vector<T> masses;

  std::size_t size() const { return values.size(); }
};

bool same_value(const Rational& a, const Rational& b) { return a == b; }
bool same_value(double a, double b) {
  return a == b ||
         std::fabs(a - b) <= kMergeRelTol * std::max(std::fabs(a), std::fabs(b));
}

template <class T>
void canonicalize(Dist<T>& d) {
  std::vector<std::size_t> order(d.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return d.values[i] < d.values[j];
  });
  Dist<T> out;
  out.values.reserve(d.size());
  out.masses.reserve(d.size());
  for (std::size_t idx : order) {
    if (!out.values.empty() && same_value(out.values.back(), d.values[idx])) {
      out.masses.back() += d.masses[idx];
    } else {
      out.values.push_back(d.values[idx]);
      out.masses.push_back(d.masses[idx]);
    }
  }
  d = std::move(out);
}

template <class T>
Dist<T> atoms_of(const AtomicLaw& law);

template <>
Dist<double> atoms_of<double>(const AtomicLaw& law) {
  Dist<double> d;
  for (const Atom& a : law.atoms()) {
    d.values.push_back(a.value);
    d.masses.push_back(a.mass);
  }
  return d;
}

template <>
Dist<Rational> atoms_of<Rational>(const AtomicLaw& law) {
  Dist<Rational> d;
  for (const ExactAtom& a : law.exact_atoms()) {
    d.values.push_back(a.value);
    d.masses.push_back(a.mass);
  }
  return d;
}

template <class T>
AtomicLaw to_law(const Dist<T>& d, std::string label) {
  if constexpr (std::is_same_v<T, Rational>) {
    std::vector<ExactAtom> atoms;
    for (std::size_t i = 0; i < d.size(); ++i) atoms.push_back({d.values[i], d.masses[i]});
    return AtomicLaw::from_exact(std::move(atoms), std::move(label));
  } else {
    std::vector<Atom> atoms;
    double total = 0;
    for (double m : d.masses) total += m;
    // Renormalize rounding drift accumulated over many convolutions.
    for (std::size_t i = 0; i < d.size(); ++i) {
      atoms.push_back({d.values[i], d.masses[i] / total});
    }
    return AtomicLaw::from_atoms(std::move(atoms), std::move(label));
  }
}

template <class T>
Dist<T> linear_sum(const std::vector<T>& a, const std::vector<T>& f,
                   const Dist<T>& base, std::uint64_t cap) {
  Dist<T> acc;
  acc.values.push_back(T(0));
  acc.masses.push_back(T(1));
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == T(0)) continue;
    Dist<T> next;
    next.values.reserve(acc.size() * base.size());
    next.masses.reserve(acc.size() * base.size());
    for (std::size_t k = 0; k < base.size(); ++k) {
      const T term = a[i] * (base.values[k] + f[i]);
      for (std::size_t j = 0; j < acc.size(); ++j) {
        next.values.push_back(acc.values[j] + term);
        next.masses.push_back(acc.masses[j] * base.masses[k]);
      }
    }
    canonicalize(next);
    if (next.size() > cap) {
      fail(ErrorCode::kAtomBlowup, "sum distribution exceeds " +
                                       std::to_string(cap) + " atoms");
    }
    acc = std::move(next);
  }
  return acc;
}

struct WindowResult {
  std::size_t left = 0;
  std::size_t right = 0;  // exclusive
};

bool within_width(const Rational& lo, const Rational& hi, const Rational& width) {
  return hi - lo <= width;
}
bool within_width(double lo, double hi, double width) {
  const double scale = std::max({std::fabs(lo), std::fabs(hi), width});
  return hi - lo <= width + kMergeRelTol * scale;
}

// Maximum mass over closed windows of the given width anchored at atoms.
template <class T>
WindowResult best_window(const std::vector<T>& values, const std::vector<T>& masses,
                         const T& width, T& best_mass) {
  WindowResult best;
  best_mass = T(-1);
  T mass = T(0);
  std::size_t r = 0;
  for (std::size_t l = 0; l < values.size(); ++l) {
    if (r < l) {
      r = l;
      mass = T(0);
    }
    while (r < values.size() && within_width(values[l], values[r], width)) {
      mass += masses[r];
      ++r;
    }
    if (mass > best_mass) {
      best_mass = mass;
      best = {l, r};
    }
    mass -= masses[l];
  }
  return best;
}

template <class T>
SmallBallEstimate estimate_from(const Dist<T>& d, const T& beta, Method method) {
  T mass;
  const WindowResult w = best_window(d.values, d.masses, beta + beta, mass);
  SmallBallEstimate est;
  est.method = method;
  est.beta = to_double(beta);
  const T center = d.values[w.left] + beta;
  est.rho = to_double(mass);
  est.witness_center = to_double(center);
  if constexpr (std::is_same_v<T, Rational>) {
    est.exact_rho = mass;
    est.exact_center = center;
  } else {
    // Sums of doubles can creep past 1 by an ulp or two.
    est.rho = std::min(est.rho, 1.0);
  }
  return est;
}

std::vector<Rational> zeros_like(std::size_t n) { return std::vector<Rational>(n, Rational(0)); }

std::uint64_t checked_power(std::uint64_t base, std::size_t exp, std::uint64_t cap) {
  unsigned __int128 v = 1;
  for (std::size_t i = 0; i < exp; ++i) {
    v *= base;
    if (v > cap) return cap + 1;
  }
  return static_cast<std::uint64_t>(v);
}

// Enumerates every outcome of n iid draws from `base`, calling
// visit(values, mass) with the drawn vector.
template <class T, class Fn>
void for_each_outcome(const Dist<T>& base, std::size_t n, Fn&& visit) {
  std::vector<std::size_t> idx(n, 0);
  std::vector<T> values(n);
  for (std::size_t i = 0; i < n; ++i) values[i] = base.values[0];
  while (true) {
    T mass = T(1);
    for (std::size_t i = 0; i < n; ++i) mass *= base.masses[idx[i]];
    visit(static_cast<const std::vector<T>&>(values), mass);
    std::size_t i = n;
    while (i > 0) {
      --i;
      if (++idx[i] < base.size()) {
        values[i] = base.values[idx[i]];
        break;
      }
      idx[i] = 0;
      values[i] = base.values[0];
      if (i == 0) return;
    }
    if (n == 0) return;
  }
}

template <class T>
Dist<T> quadratic_dist(const std::vector<T>& a, const std::vector<T>& f,
                       std::size_t n, const Dist<T>& base) {
  Dist<T> out;
  std::vector<T> y(n);
  // Depth-first enumeration with running value:
  // adding y_i contributes a_ii y_i^2 + y_i * sum_{j<i} (a_ij + a_ji) y_j.
  std::vector<T> prefix_value(n + 1, T(0));
  std::vector<T> prefix_mass(n + 1, T(1));
  std::vector<std::size_t> idx(n, 0);
  std::size_t depth = 0;
  if (n == 0) {
    out.values.push_back(T(0));
    out.masses.push_back(T(1));
    return out;
  }
  while (true) {
    const std::size_t i = depth;
    y[i] = base.values[idx[i]] + f[i];
    T cross = T(0);
    for (std::size_t j = 0; j < i; ++j) {
      const T c = a[i * n + j] + a[j * n + i];
      if (!(c == T(0))) cross += c * y[j];
    }
    prefix_value[i + 1] = prefix_value[i] + a[i * n + i] * y[i] * y[i] + y[i] * cross;
    prefix_mass[i + 1] = prefix_mass[i] * base.masses[idx[i]];
    if (i + 1 == n) {
      out.values.push_back(prefix_value[n]);
      out.masses.push_back(prefix_mass[n]);
      // advance
      std::size_t d = n;
      bool done = true;
      while (d > 0) {
        --d;
        if (++idx[d] < base.size()) {
          depth = d;
          done = false;
          break;
        }
        idx[d] = 0;
      }
      if (done) break;
    } else {
      ++depth;
    }
  }
  canonicalize(out);
  return out;
}

template <class T>
Dist<T> bilinear_dist(const std::vector<T>& a, const std::vector<T>& f, std::size_t n,
                      const Dist<T>& base_x, const Dist<T>& base_y) {
  Dist<T> out;
  std::vector<T> c(n);
  for_each_outcome(base_x, n, [&](const std::vector<T>& x, const T& mx) {
    for (std::size_t j = 0; j < n; ++j) {
      T s = T(0);
      for (std::size_t i = 0; i < n; ++i) {
        if (!(a[i * n + j] == T(0))) s += a[i * n + j] * (x[i] + f[i]);
      }
      c[j] = s;
    }
    for_each_outcome(base_y, n, [&](const std::vector<T>& y, const T& my) {
      T v = T(0);
      for (std::size_t j = 0; j < n; ++j) {
        if (!(c[j] == T(0))) v += c[j] * (y[j] + f[j]);
      }
      out.values.push_back(v);
      out.masses.push_back(mx * my);
    });
  });
  canonicalize(out);
  return out;
}

double sample_linear(const LinearForm& form, const Sampler& law, Stream& stream) {
  double s = 0;
  for (std::size_t i = 0; i < form.size(); ++i) {
    const double x = draw(law, stream);
    s += form.coefficients[i] * (x + form.shifts[i]);
  }
  return s;
}

SmallBallEstimate estimate_from_samples(std::vector<double> samples, double beta) {
  std::sort(samples.begin(), samples.end());
  std::vector<double> ones(samples.size(), 1.0);
  double count = 0;
  const WindowResult w = best_window(samples, ones, 2 * beta, count);
  SmallBallEstimate est;
  est.method = Method::kMonteCarlo;
  est.beta = beta;
  est.rho = count / static_cast<double>(samples.size());
  est.ci_halfwidth = dkw_halfwidth(samples.size());
  est.witness_center = samples[w.left] + beta;
  return est;
}

}  // namespace

std::string to_string(Method m) {
  return m == Method::kExact ? "exact" : "mc";
}

LinearForm LinearForm::make(std::vector<double> a, std::vector<double> f) {
  LinearForm form;
  if (f.empty()) f.assign(a.size(), 0.0);
  form.coefficients = std::move(a);
  form.shifts = std::move(f);
  form.validate();
  return form;
}

LinearForm LinearForm::exact(std::vector<Rational> a, std::vector<Rational> f) {
  if (f.empty()) f = zeros_like(a.size());
  LinearForm form;
  for (const auto& x : a) form.coefficients.push_back(x.to_double());
  for (const auto& x : f) form.shifts.push_back(x.to_double());
  form.exact_coefficients = std::move(a);
  form.exact_shifts = std::move(f);
  form.validate();
  return form;
}

void LinearForm::validate() const {
  if (coefficients.empty()) fail(ErrorCode::kInvalidArgument, "linear form needs n >= 1");
  if (shifts.size() != coefficients.size()) {
    fail(ErrorCode::kInvalidArgument, "shift vector length differs from coefficients");
  }
  for (std::size_t i = 0; i < size(); ++i) {
    if (!std::isfinite(coefficients[i]) || !std::isfinite(shifts[i])) {
      fail(ErrorCode::kInvalidArgument, "linear form entries must be finite");
    }
  }
}

QuadraticForm QuadraticForm::make(std::size_t n, std::vector<double> a,
                                  std::vector<double> f) {
  QuadraticForm q;
  q.n = n;
  q.a = std::move(a);
  q.shifts = f.empty() ? std::vector<double>(n, 0.0) : std::move(f);
  q.validate();
  return q;
}

QuadraticForm QuadraticForm::exact(std::size_t n, std::vector<Rational> a,
                                   std::vector<Rational> f) {
  if (f.empty()) f = zeros_like(n);
  QuadraticForm q;
  q.n = n;
  for (const auto& x : a) q.a.push_back(x.to_double());
  for (const auto& x : f) q.shifts.push_back(x.to_double());
  q.exact_a = std::move(a);
  q.exact_shifts = std::move(f);
  q.validate();
  return q;
}

bool QuadraticForm::is_symmetric() const {
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (a[i * n + j] != a[j * n + i]) return false;
      if (exact_a && (*exact_a)[i * n + j] != (*exact_a)[j * n + i]) return false;
    }
  }
  return true;
}

bool QuadraticForm::is_normalized() const {
  double s = 0;
  for (double x : a) s += x * x;
  return std::fabs(s - 1.0) <= 1e-12;
}

void QuadraticForm::validate() const {
  if (n == 0) fail(ErrorCode::kInvalidArgument, "form needs n >= 1");
  if (a.size() != n * n || shifts.size() != n) {
    fail(ErrorCode::kInvalidArgument, "coefficient matrix must be n x n with n shifts");
  }
  for (double x : a) {
    if (!std::isfinite(x)) fail(ErrorCode::kInvalidArgument, "non-finite coefficient");
  }
}

AtomicLaw linear_sum_law(const LinearForm& form, const AtomicLaw& law,
                         std::uint64_t cap) {
  form.validate();
  if (form.is_exact() && law.is_exact()) {
    return to_law(linear_sum(*form.exact_coefficients, *form.exact_shifts,
                             atoms_of<Rational>(law), cap),
                  "linear-sum");
  }
  return to_law(linear_sum(form.coefficients, form.shifts, atoms_of<double>(law), cap),
                "linear-sum");
}

SmallBallEstimate linear_small_ball_exact(const LinearForm& form,
                                          const AtomicLaw& law, const Rational& beta,
                                          std::uint64_t cap) {
  form.validate();
  if (beta.sign() < 0) fail(ErrorCode::kInvalidArgument, "beta must be >= 0");
  if (form.is_exact() && law.is_exact()) {
    const auto d = linear_sum(*form.exact_coefficients, *form.exact_shifts,
                              atoms_of<Rational>(law), cap);
    return estimate_from(d, beta, Method::kExact);
  }
  return linear_small_ball_exact(form, law, beta.to_double(), cap);
}

SmallBallEstimate linear_small_ball_exact(const LinearForm& form,
                                          const AtomicLaw& law, double beta,
                                          std::uint64_t cap) {
  form.validate();
  if (!(beta >= 0)) fail(ErrorCode::kInvalidArgument, "beta must be >= 0");
  if (form.is_exact() && law.is_exact()) {
    if (const auto exact_beta = Rational::from_double_exact(beta)) {
      return linear_small_ball_exact(form, law, *exact_beta, cap);
    }
  }
  const auto d = linear_sum(form.coefficients, form.shifts, atoms_of<double>(law), cap);
  return estimate_from(d, beta, Method::kExact);
}

double window_mass(const AtomicLaw& law, double center, double beta) {
  double mass = 0;
  for (const Atom& a : law.atoms()) {
    if (within_width(center - beta, a.value, 2 * beta) &&
        within_width(a.value, center + beta, 2 * beta)) {
      mass += a.mass;
    }
  }
  return mass;
}

double dkw_halfwidth(std::uint64_t trials, double delta) {
  return std::sqrt(std::log(2.0 / delta) / (2.0 * static_cast<double>(trials)));
}

SmallBallEstimate linear_small_ball_mc(const LinearForm& form, const Sampler& law,
                                       double beta, const MonteCarloOptions& options) {
  form.validate();
  if (options.trials < 1) fail(ErrorCode::kInvalidArgument, "trials must be >= 1");
  if (!(beta >= 0)) fail(ErrorCode::kInvalidArgument, "beta must be >= 0");
  std::vector<double> samples(options.trials);
  parallel_for(options.trials, options.workers, [&](std::size_t t) {
    Stream stream(options.seed, t);
    samples[t] = sample_linear(form, law, stream);
  });
  return estimate_from_samples(std::move(samples), beta);
}

SmallBallEstimate quadratic_small_ball_exact(const QuadraticForm& form,
                                             const AtomicLaw& law, double beta,
                                             std::uint64_t cap) {
  form.validate();
  if (!form.is_symmetric()) fail(ErrorCode::kInvalidArgument, "quadratic form must be symmetric");
  if (!(beta >= 0)) fail(ErrorCode::kInvalidArgument, "beta must be >= 0");
  if (checked_power(law.size(), form.n, cap) > cap) {
    fail(ErrorCode::kEnumerationTooLarge,
         std::to_string(law.size()) + "^" + std::to_string(form.n) + " outcomes exceed cap");
  }
  if (form.is_exact() && law.is_exact()) {
    if (const auto exact_beta = Rational::from_double_exact(beta)) {
      const auto d = quadratic_dist(*form.exact_a, *form.exact_shifts, form.n,
                                    atoms_of<Rational>(law));
      return estimate_from(d, *exact_beta, Method::kExact);
    }
  }
  const auto d = quadratic_dist(form.a, form.shifts, form.n, atoms_of<double>(law));
  return estimate_from(d, beta, Method::kExact);
}

AtomicLaw bilinear_law(const QuadraticForm& form, const AtomicLaw& law_x,
                       const AtomicLaw& law_y, std::uint64_t cap) {
  form.validate();
  const std::uint64_t count = checked_power(law_x.size(), form.n, cap);
  if (count > cap || checked_power(law_y.size(), form.n, cap) * count > cap) {
    fail(ErrorCode::kEnumerationTooLarge, "bilinear enumeration exceeds cap");
  }
  if (form.is_exact() && law_x.is_exact() && law_y.is_exact()) {
    return to_law(bilinear_dist(*form.exact_a, *form.exact_shifts, form.n,
                                atoms_of<Rational>(law_x), atoms_of<Rational>(law_y)),
                  "bilinear");
  }
  return to_law(bilinear_dist(form.a, form.shifts, form.n, atoms_of<double>(law_x),
                              atoms_of<double>(law_y)),
                "bilinear");
}

SmallBallEstimate bilinear_small_ball(const QuadraticForm& form, const Sampler& law_x,
                                      const Sampler& law_y, double beta,
                                      const BilinearOptions& options) {
  form.validate();
  if (!(beta >= 0)) fail(ErrorCode::kInvalidArgument, "beta must be >= 0");
  if (options.method == Method::kExact) {
    const auto* ax = std::get_if<AtomicLaw>(&law_x);
    const auto* ay = std::get_if<AtomicLaw>(&law_y);
    if (!ax || !ay) fail(ErrorCode::kInvalidArgument, "exact bilinear needs atomic laws");
    const std::uint64_t cap = options.cap;
    const std::uint64_t count = checked_power(ax->size(), form.n, cap);
    if (count > cap || checked_power(ay->size(), form.n, cap) * count > cap) {
      fail(ErrorCode::kEnumerationTooLarge, "bilinear enumeration exceeds cap");
    }
    if (form.is_exact() && ax->is_exact() && ay->is_exact()) {
      if (const auto exact_beta = Rational::from_double_exact(beta)) {
        const auto d = bilinear_dist(*form.exact_a, *form.exact_shifts, form.n,
                                     atoms_of<Rational>(*ax), atoms_of<Rational>(*ay));
        return estimate_from(d, *exact_beta, Method::kExact);
      }
    }
    const auto d = bilinear_dist(form.a, form.shifts, form.n, atoms_of<double>(*ax),
                                 atoms_of<double>(*ay));
    return estimate_from(d, beta, Method::kExact);
  }

  const auto& mc = options.mc;
  if (mc.trials < 1) fail(ErrorCode::kInvalidArgument, "trials must be >= 1");
  std::vector<double> samples(mc.trials);
  const std::size_t n = form.n;
  parallel_for(mc.trials, mc.workers, [&](std::size_t t) {
    Stream stream(mc.seed, t);
    std::vector<double> x(n), y(n);
    for (auto& v : x) v = draw(law_x, stream);
    for (auto& v : y) v = draw(law_y, stream);
    double s = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        s += form(i, j) * (x[i] + form.shifts[i]) * (y[j] + form.shifts[j]);
      }
    }
    samples[t] = s;
  });
  return estimate_from_samples(std::move(samples), beta);
}

TruncatedProduct truncated_product_bound(const std::vector<double>& u,
                                         const AtomicLaw& law, double beta,
                                         std::size_t n0, std::uint64_t cap) {
  if (n0 < 1 || n0 > u.size()) {
    fail(ErrorCode::kInvalidArgument, "need 1 <= n0 <= dim(u)");
  }
  TruncatedProduct out;
  for (std::size_t i = 0; i < n0; ++i) {
    std::vector<double> suffix(u.begin() + static_cast<std::ptrdiff_t>(i),
                               u.begin() + static_cast<std::ptrdiff_t>(n0));
    LinearForm form = LinearForm::make(suffix);
    // Keep the suffix exact when every coordinate is a short binary fraction.
    std::vector<Rational> exact;
    bool representable = law.is_exact();
    for (double v : suffix) {
      if (!representable) break;
      const auto r = Rational::from_double_exact(v);
      if (!r || r->den() > (std::int64_t{1} << 20)) {
        representable = false;
      } else {
        exact.push_back(*r);
      }
    }
    if (representable) form = LinearForm::exact(exact);
    const double rho = linear_small_ball_exact(form, law, beta, cap).rho;
    out.factors.push_back(rho);
    out.product *= rho;
  }
  return out;
}

double central_binomial_mass(std::uint64_t n) {
  // C(n, floor(n/2)) / 2^n as a running product, stable for large n.
  double mass = 1.0;
  for (std::uint64_t k = 1; k <= n; ++k) {
    // Going from n = k-1 to n = k multiplies by k / (2 * ceil(k / 2)).
    mass *= static_cast<double>(k) / (2.0 * static_cast<double>((k + 1) / 2));
  }
  return mass;
}

}  // namespace rsym
