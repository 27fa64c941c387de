#include "rsym/structure.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include <json.hpp>

#include "rsym/error.hpp"
#include "rsym/parallel.hpp"

namespace rsym {
namespace {

using nlohmann::json;

std::set<std::size_t> as_set(const std::vector<std::size_t>& v, std::size_t n,
                             const char* what) {
  std::set<std::size_t> s;
  for (std::size_t i : v) {
    if (i >= n) fail(ErrorCode::kInvalidArgument, std::string(what) + " index out of range");
    if (!s.insert(i).second) {
      fail(ErrorCode::kInvalidArgument, std::string(what) + " has a repeated index");
    }
  }
  return s;
}

double sup_window(std::vector<double>& samples, double width) {
  std::sort(samples.begin(), samples.end());
  std::size_t best = 0;
  std::size_t r = 0;
  for (std::size_t l = 0; l < samples.size(); ++l) {
    r = std::max(r, l);
    while (r < samples.size() && samples[r] - samples[l] <= width) ++r;
    best = std::max(best, r - l);
  }
  return samples.empty() ? 0.0 : static_cast<double>(best) / static_cast<double>(samples.size());
}

QuadraticForm without_shifts(const QuadraticForm& form) {
  if (form.is_exact()) return QuadraticForm::exact(form.n, *form.exact_a);
  return QuadraticForm::make(form.n, form.a);
}

// ---- inverse search ------------------------------------------------------

struct Candidate {
  std::vector<Rational> generators;
  std::vector<std::int64_t> bounds;
  std::vector<std::optional<LatticePoint>> assignments;
  std::size_t covered = 0;
  std::size_t reach = 0;  // coefficients representable inside the size cap
  std::uint64_t size = 0;
};

bool candidate_less(const Candidate& a, const Candidate& b) {
  if (a.size != b.size) return a.size < b.size;
  if (a.generators.size() != b.generators.size()) {
    return a.generators.size() < b.generators.size();
  }
  return std::lexicographical_compare(a.generators.begin(), a.generators.end(),
                                      b.generators.begin(), b.generators.end());
}

long double distance(long double value, const std::vector<long double>& g,
                     const std::vector<std::int64_t>& k) {
  long double s = 0;
  for (std::size_t i = 0; i < g.size(); ++i) s += static_cast<long double>(k[i]) * g[i];
  return std::fabs(s - value);
}

std::optional<Rational> exact_generator(double g, double beta, std::uint64_t size_cap) {
  const double tol = std::max(beta / (4.0 * static_cast<double>(size_cap)),
                              1e-15 * std::fabs(g));
  if (auto r = Rational::approximate(g, tol, 1'000'000'000)) {
    if (!r->is_zero()) return r;
  }
  return Rational::from_double_exact(g);
}

std::optional<Candidate> evaluate_candidate(const std::vector<double>& a,
                                            std::vector<Rational> gens, double beta,
                                            std::size_t required,
                                            std::uint64_t size_cap) {
  const std::size_t n = a.size();
  std::vector<long double> g;
  for (const auto& x : gens) g.push_back(x.to_long_double());
  std::vector<std::optional<LatticePoint>> rep(n);

  if (gens.size() == 1) {
    const std::int64_t kmax = static_cast<std::int64_t>((size_cap - 1) / 2);
    for (std::size_t i = 0; i < n; ++i) {
      const long double q = static_cast<long double>(a[i]) / g[0];
      if (std::fabs(q) > static_cast<long double>(kmax) + 1) continue;
      const LatticePoint k{static_cast<std::int64_t>(std::llround(q))};
      if (std::llabs(k[0]) <= kmax && distance(a[i], g, k) <= beta) rep[i] = k;
    }
  } else {
    // K1 >= 1 is needed for a genuine rank-2 box, so |k2| <= (cap/3 - 1)/2.
    const std::int64_t k2max =
        size_cap >= 3 ? static_cast<std::int64_t>((size_cap / 3 - 1) / 2) : 0;
    const std::int64_t k1max = static_cast<std::int64_t>((size_cap - 1) / 2);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::int64_t step = 0; step <= 2 * k2max; ++step) {
        const std::int64_t t = (step % 2 == 0) ? step / 2 : -(step + 1) / 2;
        const long double q = (static_cast<long double>(a[i]) - t * g[1]) / g[0];
        if (std::fabs(q) > static_cast<long double>(k1max) + 1) continue;
        const LatticePoint k{static_cast<std::int64_t>(std::llround(q)), t};
        if (std::llabs(k[0]) <= k1max && distance(a[i], g, k) <= beta) {
          rep[i] = k;
          break;
        }
      }
    }
  }

  Candidate c;
  c.generators = std::move(gens);
  for (const auto& r : rep) c.reach += r.has_value();
  if (c.reach < required) {
    c.size = UINT64_MAX;
    return c;  // reported for coverage only
  }

  std::vector<std::int64_t> best_bounds;
  std::uint64_t best_size = UINT64_MAX;
  if (c.generators.size() == 1) {
    std::vector<std::int64_t> mags;
    for (const auto& r : rep) {
      if (r) mags.push_back(std::llabs((*r)[0]));
    }
    std::sort(mags.begin(), mags.end());
    const std::int64_t k = required == 0 ? 0 : mags[required - 1];
    best_bounds = {k};
    best_size = static_cast<std::uint64_t>(2 * k + 1);
  } else {
    std::set<std::int64_t> thresholds;
    for (const auto& r : rep) {
      if (r) thresholds.insert(std::llabs((*r)[1]));
    }
    for (std::int64_t t : thresholds) {
      std::vector<std::int64_t> mags;
      for (const auto& r : rep) {
        if (r && std::llabs((*r)[1]) <= t) mags.push_back(std::llabs((*r)[0]));
      }
      if (mags.size() < required) continue;
      std::sort(mags.begin(), mags.end());
      const std::int64_t k1 = required == 0 ? 0 : mags[required - 1];
      const std::uint64_t size = static_cast<std::uint64_t>((2 * k1 + 1) * (2 * t + 1));
      if (size < best_size) {
        best_size = size;
        best_bounds = {k1, t};
      }
    }
  }
  if (best_size > size_cap) {
    c.size = UINT64_MAX;
    return c;
  }
  c.bounds = best_bounds;
  c.size = best_size;
  c.assignments.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!rep[i]) continue;
    bool inside = true;
    for (std::size_t d = 0; d < c.bounds.size(); ++d) {
      inside = inside && std::llabs((*rep[i])[d]) <= c.bounds[d];
    }
    if (inside) {
      c.assignments[i] = rep[i];
      ++c.covered;
    }
  }
  return c;
}

}  // namespace

// ---- row matrix ------------------------------------------------------------

void RowMatrixSpec::validate() const {
  if (n == 0) fail(ErrorCode::kInvalidArgument, "row matrix needs n >= 1");
  if (k == 0) fail(ErrorCode::kInvalidArgument, "k must be nonzero");
  const auto in_rows = as_set(rows, n, "I");
  const auto plus = as_set(plus_columns, n, "I0'");
  const auto minus = as_set(minus_columns, n, "I0''");
  for (std::size_t c : minus) {
    if (plus.count(c)) fail(ErrorCode::kInvalidArgument, "I0' and I0'' overlap");
  }
  for (std::size_t i : in_rows) {
    if (plus.count(i) || minus.count(i)) {
      fail(ErrorCode::kOverlapError, "index " + std::to_string(i) + " lies in I and I0");
    }
  }
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const Entry& e : coeffs) {
    if (!in_rows.count(e.row)) fail(ErrorCode::kInvalidArgument, "coefficient row not in I");
    if (!plus.count(e.col) && !minus.count(e.col)) {
      fail(ErrorCode::kInvalidArgument, "coefficient column not in I0");
    }
    if (!seen.insert({e.row, e.col}).second) {
      fail(ErrorCode::kInvalidArgument, "repeated coefficient entry");
    }
  }
  if (bound_exponent) {
    const double limit = std::pow(static_cast<double>(n), *bound_exponent);
    auto check = [&](std::int64_t v) {
      if (static_cast<double>(std::llabs(v)) > limit) {
        fail(ErrorCode::kBoundViolation,
             "entry " + std::to_string(v) + " exceeds n^C = " + std::to_string(limit));
      }
    };
    check(k);
    for (const Entry& e : coeffs) check(e.value);
  }
}

RowMatrixSpec RowMatrixSpec::from_json(std::string_view text) {
  RowMatrixSpec spec;
  try {
    const json j = json::parse(text);
    spec.n = j.at("n").get<std::size_t>();
    spec.rows = j.value("I", std::vector<std::size_t>{});
    spec.plus_columns = j.value("I0p", std::vector<std::size_t>{});
    spec.minus_columns = j.value("I0pp", std::vector<std::size_t>{});
    spec.k = j.at("k").get<std::int64_t>();
    for (const auto& e : j.value("coeffs", json::array())) {
      if (!e.is_array() || e.size() != 3) {
        fail(ErrorCode::kParseError, "coeffs entries must be [i, i0, value]");
      }
      spec.coeffs.push_back({e[0].get<std::size_t>(), e[1].get<std::size_t>(),
                             e[2].get<std::int64_t>()});
    }
    if (j.contains("C")) spec.bound_exponent = j.at("C").get<double>();
  } catch (const json::exception& e) {
    fail(ErrorCode::kParseError, std::string("row matrix JSON: ") + e.what());
  }
  spec.validate();
  return spec;
}

std::string RowMatrixSpec::to_json() const {
  json j;
  j["n"] = n;
  j["I"] = rows;
  j["I0p"] = plus_columns;
  j["I0pp"] = minus_columns;
  j["k"] = k;
  json c = json::array();
  for (const Entry& e : coeffs) c.push_back({e.row, e.col, e.value});
  j["coeffs"] = c;
  if (bound_exponent) j["C"] = *bound_exponent;
  return j.dump();
}

ExactMatrix build_row_matrix(const RowMatrixSpec& spec) {
  spec.validate();
  ExactMatrix r = ExactMatrix::identity(spec.n);
  for (std::size_t i : spec.rows) r(i, i) = spec.k;
  const std::set<std::size_t> minus(spec.minus_columns.begin(), spec.minus_columns.end());
  for (const auto& e : spec.coeffs) {
    r(e.row, e.col) = minus.count(e.col) ? -e.value : e.value;
  }
  return r;
}

bool conditioning_check(const DenseMatrix& r, double c) {
  if (!r.is_square()) fail(ErrorCode::kInvalidArgument, "conditioning check needs a square matrix");
  if (r.rows == 0) return true;
  const double n = static_cast<double>(r.rows);
  const double lo = std::pow(n, -c);
  const double hi = std::pow(n, c);
  const auto s = singular_values(r);
  return s.front() <= hi && s.back() >= lo;
}

bool conditioning_check(const ExactMatrix& r, double c) {
  DenseMatrix d(r.rows(), r.cols());
  d.data = r.to_doubles();
  return conditioning_check(d, c);
}

// ---- bipartition -----------------------------------------------------------

Bipartition Bipartition::from_indices(std::size_t n, const std::vector<std::size_t>& members) {
  Bipartition u;
  u.membership.assign(n, false);
  for (std::size_t i : members) {
    if (i >= n) fail(ErrorCode::kInvalidArgument, "bipartition index out of range");
    u.membership[i] = true;
  }
  return u;
}

Bipartition Bipartition::random(std::size_t n, Stream& stream) {
  Bipartition u;
  u.membership.resize(n);
  for (std::size_t i = 0; i < n; ++i) u.membership[i] = (stream.next() >> 63) != 0;
  return u;
}

DenseMatrix bipartition_matrix(const DenseMatrix& a, const Bipartition& u) {
  if (!a.is_square() || a.rows != u.size()) {
    fail(ErrorCode::kInvalidArgument, "bipartition size differs from matrix");
  }
  DenseMatrix out(a.rows, a.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t j = 0; j < a.cols; ++j) {
      if (u.contains(i) != u.contains(j)) out(i, j) = a(i, j);
    }
  }
  return out;
}

QuadraticForm bipartition_matrix(const QuadraticForm& form, const Bipartition& u) {
  form.validate();
  if (form.n != u.size()) fail(ErrorCode::kInvalidArgument, "bipartition size differs from form");
  QuadraticForm out = form;
  for (std::size_t i = 0; i < form.n; ++i) {
    for (std::size_t j = 0; j < form.n; ++j) {
      if (u.contains(i) == u.contains(j)) {
        out.a[i * form.n + j] = 0.0;
        if (out.exact_a) (*out.exact_a)[i * form.n + j] = 0;
      }
    }
  }
  return out;
}

// ---- decoupling ------------------------------------------------------------

double decoupling_constant() {
  return std::pow(2 * std::numbers::pi, 3.5) * std::exp(4 * std::numbers::pi);
}

DecouplingRecord verify_decoupling(const QuadraticForm& form, const AtomicLaw& law,
                                   double beta, const Bipartition& u,
                                   double radius_constant,
                                   const DecouplingOptions& options) {
  form.validate();
  if (!(beta >= 0)) fail(ErrorCode::kInvalidArgument, "beta must be >= 0");
  if (!(radius_constant > 0)) fail(ErrorCode::kInvalidArgument, "radius constant must be > 0");
  const QuadraticForm masked = without_shifts(bipartition_matrix(form, u));
  const AtomicLaw diff = difference_law(law);
  const std::size_t n = form.n;

  DecouplingRecord rec;
  rec.method = options.method;
  rec.radius = radius_constant * beta * std::sqrt(std::log(static_cast<double>(n)));

  if (options.method == Method::kExact) {
    rec.rho_quad = quadratic_small_ball_exact(form, law, beta, options.cap).rho;
    const AtomicLaw bil = bilinear_law(masked, diff, diff, options.cap);
    const LinearForm identity =
        bil.is_exact() ? LinearForm::exact({Rational(1)}) : LinearForm::make({1.0});
    rec.rhs = linear_small_ball_exact(identity, bil, rec.radius, options.cap).rho;
    rec.rhs_at_zero = window_mass(bil, 0.0, rec.radius);
    rec.lhs = std::pow(rec.rho_quad, 8) / decoupling_constant();
  } else {
    const auto& mc = options.mc;
    if (mc.trials < 1) fail(ErrorCode::kInvalidArgument, "trials must be >= 1");
    std::vector<double> quad(mc.trials), bil(mc.trials);
    const Sampler xi(law);
    const Sampler delta(diff);
    parallel_for(mc.trials, mc.workers, [&](std::size_t t) {
      Stream stream(mc.seed, t);
      std::vector<double> x(n), v(n), w(n);
      for (std::size_t i = 0; i < n; ++i) x[i] = draw(xi, stream) + form.shifts[i];
      for (std::size_t i = 0; i < n; ++i) v[i] = draw(delta, stream);
      for (std::size_t i = 0; i < n; ++i) w[i] = draw(delta, stream);
      double q = 0, b = 0;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          q += form(i, j) * x[i] * x[j];
          b += masked(i, j) * v[i] * w[j];
        }
      }
      quad[t] = q;
      bil[t] = b;
    });
    std::size_t near_zero = 0;
    for (double b : bil) near_zero += std::fabs(b) <= rec.radius;
    rec.rhs_at_zero = static_cast<double>(near_zero) / static_cast<double>(mc.trials);
    rec.rho_quad = sup_window(quad, 2 * beta);
    rec.rhs = sup_window(bil, 2 * rec.radius);
    rec.lhs = std::pow(rec.rho_quad, 8) / decoupling_constant();
    const double band = dkw_halfwidth(mc.trials);
    const double lhs_hi = std::pow(std::min(1.0, rec.rho_quad + band), 8) / decoupling_constant();
    rec.slack = band + (lhs_hi - rec.lhs);
  }
  rec.holds = rec.rhs >= rec.lhs - rec.slack;
  return rec;
}

DecouplingScan scan_decoupling(const QuadraticForm& form, const AtomicLaw& law,
                               double beta, const Bipartition& u,
                               const std::vector<double>& constants,
                               const DecouplingOptions& options) {
  DecouplingScan scan;
  scan.constants = constants;
  std::sort(scan.constants.begin(), scan.constants.end());
  for (double c : scan.constants) {
    scan.records.push_back(verify_decoupling(form, law, beta, u, c, options));
    if (scan.records.back().holds && !scan.smallest_holding) scan.smallest_holding = c;
  }
  scan.needs_larger_constant = !scan.smallest_holding.has_value();
  return scan;
}

// ---- inverse Littlewood-Offord search -------------------------------------

bool check_cover(const Gap& q, const std::vector<double>& coefficients,
                 const std::vector<std::optional<LatticePoint>>& assignments,
                 double beta) {
  if (coefficients.size() != assignments.size()) return false;
  for (std::size_t i = 0; i < coefficients.size(); ++i) {
    if (!assignments[i]) continue;
    if (!q.in_box(*assignments[i])) return false;
    const long double v = evaluate(q, *assignments[i]).to_long_double() * q.unit_value;
    if (std::fabs(v - static_cast<long double>(coefficients[i])) > beta) return false;
  }
  return true;
}

LoSearchResult inverse_lo_search(const LinearForm& form, double beta, int rank_cap,
                                 std::size_t closeness_budget,
                                 const LoSearchOptions& options) {
  form.validate();
  if (rank_cap < 1 || rank_cap > 2) fail(ErrorCode::kInvalidArgument, "rank cap must be 1 or 2");
  if (!(beta >= 0)) fail(ErrorCode::kInvalidArgument, "beta must be >= 0");
  if (options.size_cap < 1) fail(ErrorCode::kInvalidArgument, "size cap must be >= 1");
  const auto& a = form.coefficients;
  const std::size_t n = a.size();

  LoSearchResult result;
  result.required = closeness_budget >= n ? 0 : n - closeness_budget;
  result.assignments.assign(n, std::nullopt);

  std::vector<double> mags;
  for (double x : a) {
    if (x != 0) mags.push_back(std::fabs(x));
  }
  std::sort(mags.begin(), mags.end());
  mags.erase(std::unique(mags.begin(), mags.end()), mags.end());
  const std::int64_t pmax = std::max<std::int64_t>(
      1, static_cast<std::int64_t>(std::floor(std::sqrt(static_cast<double>(closeness_budget)))));

  std::set<std::vector<Rational>> generator_sets;
  for (double m : mags) {
    for (std::int64_t p = 1; p <= pmax; ++p) {
      if (auto g = exact_generator(m / static_cast<double>(p), beta, options.size_cap)) {
        generator_sets.insert({*g});
      }
    }
  }
  if (rank_cap == 2) {
    const std::size_t refs = std::min(mags.size(), options.rank2_references);
    for (std::size_t i = 0; i < refs; ++i) {
      for (std::size_t j = i + 1; j < refs; ++j) {
        for (std::int64_t p = 1; p <= pmax; ++p) {
          const double pd = static_cast<double>(p);
          auto g1 = exact_generator(mags[i] / pd, beta, options.size_cap);
          auto g2 = exact_generator(mags[j] / pd, beta, options.size_cap);
          if (g1 && g2) generator_sets.insert({*g1, *g2});
        }
      }
    }
  }
  const std::vector<std::vector<Rational>> candidates(generator_sets.begin(),
                                                      generator_sets.end());
  result.candidates = candidates.size();

  std::vector<std::optional<Candidate>> evaluated(candidates.size());
  parallel_for(candidates.size(), options.workers, [&](std::size_t c) {
    auto cand = evaluate_candidate(a, candidates[c], beta, result.required, options.size_cap);
    if (cand && cand->size != UINT64_MAX && cand->generators.size() == 2) {
      Gap g = Gap::symmetric(cand->generators, cand->bounds);
      if (!is_proper(g, options.size_cap)) cand->size = UINT64_MAX;
    }
    evaluated[c] = std::move(cand);
  });

  const Candidate* best = nullptr;
  for (const auto& c : evaluated) {
    if (!c) continue;
    result.best_coverage = std::max(result.best_coverage, c->reach);
    if (c->size == UINT64_MAX) continue;
    if (!best || candidate_less(*c, *best)) best = &*c;
  }
  if (best) {
    result.gap = Gap::symmetric(best->generators, best->bounds);
    result.assignments = best->assignments;
    result.covered = best->covered;
  }
  return result;
}

ForwardBound forward_lo_bound(const Gap& q, const std::vector<LatticePoint>& assignments,
                              const AtomicLaw& law, double beta, std::uint64_t cap) {
  q.validate();
  if (!(beta >= 0)) fail(ErrorCode::kInvalidArgument, "beta must be >= 0");
  ForwardBound out;
  const std::size_t n = assignments.size();
  out.radius = beta * static_cast<double>(n) * law.max_abs_value();
  if (n == 0) return out;
  std::vector<Rational> values;
  for (const auto& p : assignments) values.push_back(evaluate(q, p));
  LinearForm form;
  if (q.unit_name.empty()) {
    form = LinearForm::exact(values);
  } else {
    std::vector<double> real;
    for (const auto& v : values) real.push_back(q.to_real(v));
    form = LinearForm::make(real);
  }
  out.bound = linear_small_ball_exact(form, law, Rational(0), cap).rho;
  return out;
}

}  // namespace rsym
