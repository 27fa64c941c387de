#include "rsym/ensembles.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include "rsym/error.hpp"
#include "rsym/gap.hpp"
#include "rsym/parallel.hpp"

namespace rsym {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Bareiss on ±1 matrices stays inside 64 bits up to roughly this size.
constexpr std::size_t kCorankLimit = 24;

DenseMatrix dense_of(const ExactMatrix& m) {
  DenseMatrix d(m.rows(), m.cols());
  d.data = m.to_doubles();
  return d;
}

void check_bound(double value, std::size_t n, const std::optional<double>& gamma) {
  if (!gamma) return;
  const double limit = std::pow(static_cast<double>(n), *gamma);
  if (std::fabs(value) > limit) {
    fail(ErrorCode::kBoundViolation,
         "fixed entry " + std::to_string(value) + " exceeds n^gamma = " + std::to_string(limit));
  }
}

const ExactMatrix& require_exact(const SymmetricSample& s) {
  if (!s.is_exact()) fail(ErrorCode::kInvalidArgument, "operation needs an exact sample");
  return *s.exact_m;
}

// ---- cofactor audit --------------------------------------------------------

__int128 checked_add(__int128 a, __int128 b) {
  __int128 r;
  if (__builtin_add_overflow(a, b, &r)) fail(ErrorCode::kArithmeticOverflow, "cofactor sum overflow");
  return r;
}

__int128 checked_mul(__int128 a, __int128 b) {
  __int128 r;
  if (__builtin_mul_overflow(a, b, &r)) fail(ErrorCode::kArithmeticOverflow, "cofactor product overflow");
  return r;
}

struct AuditData {
  std::size_t n = 0;
  std::vector<long double> m;    // permuted M, row-major
  std::vector<long double> c;    // cofactor matrix of permuted M
  std::vector<long double> ca;   // cofactor matrix of A = M without row/col 0
  long double det = 0;
  double sigma_n = 0;
};

bool within(long double lhs, long double rhs) {
  return lhs <= rhs + 1e-9L * std::max(std::fabs(lhs), std::fabs(rhs));
}

// lhs_sum >= n^e * det^2, compared in logs.
bool lower_bound_holds(long double sum, long double e, long double det, std::size_t n) {
  if (det == 0) return true;
  if (sum <= 0) return false;
  const long double lhs = std::log(sum);
  const long double rhs = e * std::log(static_cast<long double>(n)) + 2 * std::log(std::fabs(det));
  return lhs >= rhs - 1e-9L * std::max(std::fabs(lhs), std::fabs(rhs));
}

void numeric_steps(const AuditData& d, double a_exp, double b_exp, double gamma,
                   CofactorAudit& out) {
  const std::size_t n = d.n;
  const long double ln = static_cast<long double>(n);
  out.sigma_n = d.sigma_n;
  out.hypothesis = d.sigma_n <= std::pow(static_cast<double>(n), -a_exp);

  long double row = 0;
  for (std::size_t j = 0; j < n; ++j) row += d.c[j] * d.c[j];
  out.row_bound = lower_bound_holds(row, 2.0L * a_exp - 1, d.det, n);

  const long double entry_limit = std::pow(ln, 2.0L * b_exp + 2.0L * gamma + 3);
  long double col0 = 0, col1 = 0;
  for (std::size_t i = 1; i < n; ++i) {
    col0 += d.m[i * n] * d.m[i * n];
    col1 += d.m[i * n + 1] * d.m[i * n + 1];
  }
  out.entry_bound = within(col0, entry_limit) && within(col1, entry_limit);

  long double minor = 0;
  for (long double v : d.ca) minor += v * v;
  out.minor_bound =
      lower_bound_holds(minor, 2.0L * a_exp - 2.0L * b_exp - 2.0L * gamma - 4, d.det, n);
}

void finish(CofactorAudit& out) {
  const bool chain = out.row_bound && out.row_expansion && out.cauchy_schwarz &&
                     out.entry_bound && out.minor_bound;
  out.holds = !out.hypothesis || chain;
}

std::size_t pivot_row(const std::vector<long double>& c, std::size_t n) {
  std::size_t best = 0;
  long double best_norm = -1;
  for (std::size_t i = 0; i < n; ++i) {
    long double s = 0;
    for (std::size_t j = 0; j < n; ++j) s += c[i * n + j] * c[i * n + j];
    if (s > best_norm) {
      best_norm = s;
      best = i;
    }
  }
  return best;
}

template <class Matrix>
Matrix swap_first(const Matrix& m, std::size_t n, std::size_t p) {
  Matrix out = m;
  auto idx = [&](std::size_t i) { return i == 0 ? p : (i == p ? 0 : i); };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) out(i, j) = m(idx(i), idx(j));
  }
  return out;
}

long double ld_det(std::vector<long double> a, std::size_t n) {
  long double det = 1;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < n; ++i) {
      if (std::fabs(a[i * n + k]) > std::fabs(a[p * n + k])) p = i;
    }
    if (a[p * n + k] == 0) return 0;
    if (p != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a[p * n + j], a[k * n + j]);
      det = -det;
    }
    det *= a[k * n + k];
    for (std::size_t i = k + 1; i < n; ++i) {
      const long double f = a[i * n + k] / a[k * n + k];
      for (std::size_t j = k; j < n; ++j) a[i * n + j] -= f * a[k * n + j];
    }
  }
  return det;
}

std::vector<long double> ld_cofactors(const std::vector<long double>& a, std::size_t n) {
  std::vector<long double> c(n * n);
  if (n == 1) {
    c[0] = 1;
    return c;
  }
  std::vector<long double> minor((n - 1) * (n - 1));
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t s = 0; s < n; ++s) {
      std::size_t k = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (i == r) continue;
        for (std::size_t j = 0; j < n; ++j) {
          if (j != s) minor[k++] = a[i * n + j];
        }
      }
      const long double d = ld_det(minor, n - 1);
      c[r * n + s] = ((r + s) % 2 == 0) ? d : -d;
    }
  }
  return c;
}

std::vector<long double> cofactor_matrix_ld(const ExactMatrix& m) {
  const std::size_t n = m.rows();
  std::vector<long double> c(n * n);
  if (n == 1) {
    c[0] = 1;
    return c;
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) c[i * n + j] = cofactor(m, i, j).to_long_double();
  }
  return c;
}

std::vector<std::int64_t> cofactor_matrix_int(const ExactMatrix& m) {
  const std::size_t n = m.rows();
  std::vector<std::int64_t> c(n * n);
  if (n == 1) {
    c[0] = 1;
    return c;
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const Rational v = cofactor(m, i, j);
      c[i * n + j] = v.num();  // integral input gives integral cofactors
    }
  }
  return c;
}

bool is_integral(const ExactMatrix& m) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (!m(i, j).is_integer()) return false;
    }
  }
  return true;
}

double draw_value(const Sampler& law, Stream& stream, std::optional<Rational>* exact) {
  if (const auto* atomic = std::get_if<AtomicLaw>(&law)) {
    const std::size_t idx = atomic->index_for(stream.uniform());
    if (exact && atomic->is_exact()) *exact = atomic->exact_atoms()[idx].value;
    return atomic->atoms()[idx].value;
  }
  return stream.normal();
}

std::vector<std::string> tokens(std::istream& is) {
  std::vector<std::string> out;
  std::string t;
  while (is >> t) out.push_back(t);
  return out;
}

std::size_t square_side(std::size_t count) {
  const auto n = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(count))));
  if (n * n != count) {
    fail(ErrorCode::kParseError,
         "matrix text holds " + std::to_string(count) + " entries, not a square count");
  }
  return n;
}

}  // namespace

FixedPart FixedPart::from_exact(ExactMatrix f, std::optional<double> gamma) {
  FixedPart p;
  p.floating = dense_of(f);
  p.exact = std::move(f);
  p.gamma = gamma;
  return p;
}

FixedPart FixedPart::from_dense(DenseMatrix f, std::optional<double> gamma) {
  FixedPart p;
  p.floating = std::move(f);
  p.gamma = gamma;
  return p;
}

SymmetricSample SymmetricSample::from_exact(const ExactMatrix& m) {
  if (!m.is_symmetric()) fail(ErrorCode::kInvalidArgument, "matrix is not symmetric");
  SymmetricSample s;
  s.n = m.rows();
  s.kind = EntryKind::kExact;
  s.m = dense_of(m);
  s.x = s.m;
  s.f = DenseMatrix(s.n, s.n);
  s.exact_m = m;
  return s;
}

SymmetricSample SymmetricSample::from_dense(const DenseMatrix& m) {
  if (!m.is_symmetric()) fail(ErrorCode::kInvalidArgument, "matrix is not symmetric");
  SymmetricSample s;
  s.n = m.rows;
  s.kind = EntryKind::kFloating;
  s.m = m;
  s.x = m;
  s.f = DenseMatrix(s.n, s.n);
  return s;
}

SymmetricSample sample_symmetric(const Sampler& law, const FixedPart& f, std::size_t n,
                                 Stream& stream) {
  if (n == 0) fail(ErrorCode::kInvalidArgument, "matrix size must be >= 1");
  if (!f.is_zero()) {
    if (f.floating.rows != n || f.floating.cols != n) {
      fail(ErrorCode::kInvalidArgument, "fixed part has the wrong shape");
    }
    if (!f.floating.is_symmetric() || (f.exact && !f.exact->is_symmetric())) {
      fail(ErrorCode::kInvalidArgument, "fixed part must be symmetric");
    }
    for (double v : f.floating.data) check_bound(v, n, f.gamma);
  }
  const auto* atomic = std::get_if<AtomicLaw>(&law);
  const bool exact = atomic && atomic->is_exact() && (f.is_zero() || f.exact);

  SymmetricSample s;
  s.n = n;
  s.kind = exact ? EntryKind::kExact : EntryKind::kFloating;
  s.f = f.is_zero() ? DenseMatrix(n, n) : f.floating;
  s.x = DenseMatrix(n, n);
  ExactMatrix xm;
  if (exact) xm = ExactMatrix(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      std::optional<Rational> ev;
      const double v = draw_value(law, stream, exact ? &ev : nullptr);
      s.x(i, j) = s.x(j, i) = v;
      if (exact) xm(i, j) = xm(j, i) = *ev;
    }
  }
  s.m = s.x;
  for (std::size_t k = 0; k < n * n; ++k) s.m.data[k] += s.f.data[k];
  if (exact) {
    if (f.exact) {
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) xm(i, j) += (*f.exact)(i, j);
      }
    }
    s.exact_m = std::move(xm);
  }
  return s;
}

SymmetricSample sample_symmetric(const Sampler& law, const FixedPart& f, std::size_t n,
                                 std::uint64_t seed) {
  Stream stream(seed);
  return sample_symmetric(law, f, n, stream);
}

SpectralSummary spectral_summary(const DenseMatrix& m) {
  if (!m.is_square() || m.rows == 0) fail(ErrorCode::kInvalidArgument, "need a non-empty square matrix");
  SpectralSummary s;
  s.eigenvalues = symmetric_eigen(m, false).values;
  s.sigma_1 = 0;
  s.sigma_n = kInf;
  long double log_det = 0;
  for (double l : s.eigenvalues) {
    const double a = std::fabs(l);
    s.sigma_1 = std::max(s.sigma_1, a);
    s.sigma_n = std::min(s.sigma_n, a);
    log_det += std::log(static_cast<long double>(a));
  }
  s.log_abs_det = static_cast<double>(log_det);
  s.kappa = s.sigma_n > 0 ? s.sigma_1 / s.sigma_n : kInf;
  return s;
}

SpectralSummary spectral_summary(const SymmetricSample& s) {
  SpectralSummary out = spectral_summary(s.m);
  if (s.is_exact() && s.n <= kCorankLimit) {
    try {
      out.corank = s.n - exact_rank(*s.exact_m);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kArithmeticOverflow) throw;
    }
  }
  return out;
}

std::size_t exact_rank(const SymmetricSample& s) { return exact_rank(require_exact(s)); }

std::size_t floating_rank(const DenseMatrix& m, double rel_tol) {
  const auto sv = singular_values(m);
  if (sv.empty()) return 0;
  const double threshold = rel_tol * sv.front() * static_cast<double>(std::max(m.rows, m.cols));
  std::size_t r = 0;
  for (double v : sv) r += v > threshold;
  return r;
}

CofactorExpansion cofactor_expansion_check(const SymmetricSample& s) {
  const ExactMatrix& m = require_exact(s);
  const std::size_t n = m.rows();
  CofactorExpansion out;
  out.lhs = exact_determinant(m);
  if (n == 1) {
    out.rhs = m(0, 0);
  } else {
    const ExactMatrix a = m.without(0, 0);
    const ExactMatrix adj = adjugate(a);
    Rational quad = 0;
    for (std::size_t i = 1; i < n; ++i) {
      for (std::size_t j = 1; j < n; ++j) quad += m(0, i) * adj(i - 1, j - 1) * m(0, j);
    }
    out.rhs = m(0, 0) * exact_determinant(a) - quad;
  }
  out.equal = out.lhs == out.rhs;
  return out;
}

CofactorAudit cofactor_inequality_check(const SymmetricSample& s, double a_exp,
                                        double b_exp, double gamma) {
  const ExactMatrix& m0 = require_exact(s);
  const std::size_t n = m0.rows();
  if (n < 2) fail(ErrorCode::kInvalidArgument, "cofactor chain needs n >= 2");
  if (!is_integral(m0)) return cofactor_inequality_check(s.m, a_exp, b_exp, gamma);

  CofactorAudit out;
  out.pivot = pivot_row(cofactor_matrix_ld(m0), n);
  const ExactMatrix m = swap_first(m0, n, out.pivot);
  const ExactMatrix a = m.without(0, 0);
  const auto c = cofactor_matrix_int(m);
  const auto ca = cofactor_matrix_int(a);
  const std::size_t na = n - 1;
  const Rational det = exact_determinant(m);
  const Rational det_a = exact_determinant(a);

  // Exact identities: c_11(M) = det A = sum_i m_i2 c_i2(A) and
  // c_1j(M) = -sum_i m_i1 c_ij(A) for j >= 2.
  out.row_expansion = Rational(c[0]) == det_a;
  __int128 laplace = 0;
  for (std::size_t i = 1; i < n; ++i) {
    laplace = checked_add(laplace, checked_mul(m(i, 1).num(), ca[(i - 1) * na]));
  }
  out.row_expansion = out.row_expansion && laplace == static_cast<__int128>(det_a.num());

  __int128 col0 = 0, col1 = 0;
  for (std::size_t i = 1; i < n; ++i) {
    col0 = checked_add(col0, checked_mul(m(i, 0).num(), m(i, 0).num()));
    col1 = checked_add(col1, checked_mul(m(i, 1).num(), m(i, 1).num()));
  }
  out.cauchy_schwarz = true;
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t ja = j == 0 ? 0 : j - 1;
    __int128 col_c = 0;
    for (std::size_t i = 0; i < na; ++i) {
      col_c = checked_add(col_c, checked_mul(ca[i * na + ja], ca[i * na + ja]));
    }
    const __int128 lhs = checked_mul(c[j], c[j]);
    const __int128 rhs = checked_mul(j == 0 ? col1 : col0, col_c);
    out.cauchy_schwarz = out.cauchy_schwarz && lhs <= rhs;
    if (j == 0) continue;
    __int128 s_sum = 0;
    for (std::size_t i = 1; i < n; ++i) {
      s_sum = checked_add(s_sum, checked_mul(m(i, 0).num(), ca[(i - 1) * na + ja]));
    }
    out.row_expansion = out.row_expansion && static_cast<__int128>(c[j]) == -s_sum;
  }

  AuditData d;
  d.n = n;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) d.m.push_back(m(i, j).to_long_double());
  }
  for (auto v : c) d.c.push_back(static_cast<long double>(v));
  for (auto v : ca) d.ca.push_back(static_cast<long double>(v));
  d.det = det.to_long_double();
  d.sigma_n = spectral_summary(s.m).sigma_n;
  numeric_steps(d, a_exp, b_exp, gamma, out);
  finish(out);
  return out;
}

CofactorAudit cofactor_inequality_check(const DenseMatrix& m0, double a_exp, double b_exp,
                                        double gamma) {
  if (!m0.is_symmetric()) fail(ErrorCode::kInvalidArgument, "matrix is not symmetric");
  const std::size_t n = m0.rows;
  if (n < 2) fail(ErrorCode::kInvalidArgument, "cofactor chain needs n >= 2");

  std::vector<long double> raw(m0.data.begin(), m0.data.end());
  CofactorAudit out;
  out.pivot = pivot_row(ld_cofactors(raw, n), n);
  const DenseMatrix m = swap_first(m0, n, out.pivot);

  AuditData d;
  d.n = n;
  d.m.assign(m.data.begin(), m.data.end());
  d.c = ld_cofactors(d.m, n);
  const std::size_t na = n - 1;
  std::vector<long double> a(na * na);
  for (std::size_t i = 0; i < na; ++i) {
    for (std::size_t j = 0; j < na; ++j) a[i * na + j] = d.m[(i + 1) * n + j + 1];
  }
  d.ca = ld_cofactors(a, na);
  d.det = ld_det(d.m, n);
  d.sigma_n = spectral_summary(m0).sigma_n;

  auto close = [](long double x, long double y) {
    return std::fabs(x - y) <= 1e-9L * std::max({std::fabs(x), std::fabs(y), 1e-300L});
  };
  const long double det_a = ld_det(a, na);
  out.row_expansion = close(d.c[0], det_a);
  long double laplace = 0;
  for (std::size_t i = 1; i < n; ++i) laplace += d.m[i * n + 1] * d.ca[(i - 1) * na];
  out.row_expansion = out.row_expansion && close(laplace, det_a);
  long double col0 = 0, col1 = 0;
  for (std::size_t i = 1; i < n; ++i) {
    col0 += d.m[i * n] * d.m[i * n];
    col1 += d.m[i * n + 1] * d.m[i * n + 1];
  }
  out.cauchy_schwarz = true;
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t ja = j == 0 ? 0 : j - 1;
    long double col_c = 0;
    for (std::size_t i = 0; i < na; ++i) col_c += d.ca[i * na + ja] * d.ca[i * na + ja];
    out.cauchy_schwarz =
        out.cauchy_schwarz && within(d.c[j] * d.c[j], (j == 0 ? col1 : col0) * col_c);
    if (j == 0) continue;
    long double s_sum = 0;
    for (std::size_t i = 1; i < n; ++i) s_sum += d.m[i * n] * d.ca[(i - 1) * na + ja];
    out.row_expansion = out.row_expansion && close(d.c[j], -s_sum);
  }
  numeric_steps(d, a_exp, b_exp, gamma, out);
  finish(out);
  return out;
}

std::vector<GrowthStep> grow_and_track(const SymmetricSample& s, const AtomicLaw& law,
                                       std::size_t steps, std::uint64_t seed) {
  ExactMatrix m = require_exact(s);
  if (!law.is_exact()) fail(ErrorCode::kInvalidArgument, "rank growth needs an exact law");
  std::size_t rank = exact_rank(m);
  if (rank + 2 > m.rows()) {
    fail(ErrorCode::kInvalidArgument, "rank growth needs rank <= n - 2, got rank " +
                                          std::to_string(rank) + " at n = " +
                                          std::to_string(m.rows()));
  }
  Stream stream(seed);
  const auto& atoms = law.exact_atoms();
  std::vector<GrowthStep> out;
  for (std::size_t step = 0; step < steps; ++step) {
    const std::size_t n = m.rows();
    ExactMatrix b(n + 1, n + 1);
    b(0, 0) = atoms[law.index_for(stream.uniform())].value;
    for (std::size_t j = 0; j < n; ++j) {
      const Rational v = atoms[law.index_for(stream.uniform())].value;
      b(0, j + 1) = v;
      b(j + 1, 0) = v;
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) b(i + 1, j + 1) = m(i, j);
    }
    const std::size_t new_rank = exact_rank(b);
    out.push_back({n + 1, new_rank, new_rank == rank + 2});
    rank = new_rank;
    m = std::move(b);
  }
  return out;
}

std::size_t remove_pivot_row(const SymmetricSample& s) {
  const ExactMatrix& m = require_exact(s);
  const std::size_t n = m.rows();
  if (exact_rank(m) + 1 != n) fail(ErrorCode::kInvalidArgument, "pivot removal needs rank n - 1");
  if (n == 1) return 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (exact_rank(m.without(i, i)) + 2 >= n) return i;
  }
  fail(ErrorCode::kNoPivot, "no symmetric removal keeps rank n - 2");
}

NearKernel near_kernel_vector(const SymmetricSample& s, std::size_t row_budget) {
  const std::size_t n = s.n;
  const auto eig = symmetric_eigen(s.m, true);
  std::size_t k = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (std::fabs(eig.values[i]) < std::fabs(eig.values[k])) k = i;
  }
  NearKernel out;
  out.lambda = eig.values[k];
  out.u.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.u[i] = eig.vectors(i, k);
  out.residuals.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    long double r = 0;
    for (std::size_t j = 0; j < n; ++j) r += static_cast<long double>(s.m(i, j)) * out.u[j];
    out.residuals[i] = static_cast<double>(std::fabs(r));
  }
  std::sort(out.residuals.begin(), out.residuals.end());
  out.budget_residual = row_budget < n ? out.residuals[n - row_budget - 1] : 0.0;
  return out;
}

OdlyzkoResult odlyzko_experiment(const AtomicLaw& law, double c3, std::size_t n,
                                 std::size_t k, std::uint64_t trials, std::uint64_t seed,
                                 unsigned workers) {
  if (!law.is_exact()) fail(ErrorCode::kInvalidArgument, "membership test needs an exact law");
  if (n == 0 || k > n) fail(ErrorCode::kInvalidArgument, "need 0 <= k <= n, n >= 1");
  if (trials < 1) fail(ErrorCode::kInvalidArgument, "trials must be >= 1");
  if (!(c3 > 0 && c3 <= 1)) fail(ErrorCode::kInvalidArgument, "c3 must lie in (0, 1]");
  std::int64_t scale = 1;
  for (const auto& a : law.exact_atoms()) scale = checked_lcm(scale, a.value.den());
  std::vector<std::int64_t> ints;
  for (const auto& a : law.exact_atoms()) ints.push_back((a.value * Rational(scale)).num());

  Stream h_stream(derive_seed(seed, n, k));
  std::vector<LatticePoint> h(k, LatticePoint(n));
  for (auto& row : h) {
    for (auto& v : row) v = ints[law.index_for(h_stream.uniform())];
  }
  std::vector<std::vector<std::int64_t>> normals =
      k == 0 ? std::vector<std::vector<std::int64_t>>{} : integer_kernel_basis(h, n);
  if (k == 0) {
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<std::int64_t> e(n, 0);
      e[i] = 1;
      normals.push_back(e);
    }
  }

  OdlyzkoResult out;
  out.n = n;
  out.k = k;
  out.dimension = n - normals.size();
  out.trials = trials;
  const std::uint64_t trial_seed = derive_seed(seed, n + 0x9e37, k);
  std::vector<char> hit(trials, 0);
  parallel_for(trials, workers, [&](std::size_t t) {
    Stream stream(trial_seed, t);
    std::vector<std::int64_t> u(n);
    for (auto& v : u) v = ints[law.index_for(stream.uniform())];
    bool inside = true;
    for (const auto& a : normals) {
      __int128 dot = 0;
      for (std::size_t i = 0; i < n; ++i) dot += static_cast<__int128>(a[i]) * u[i];
      if (dot != 0) {
        inside = false;
        break;
      }
    }
    hit[t] = inside;
  });
  out.hits = static_cast<std::uint64_t>(std::count(hit.begin(), hit.end(), 1));
  out.frequency = static_cast<double>(out.hits) / static_cast<double>(trials);
  out.standard_error =
      std::sqrt(out.frequency * (1 - out.frequency) / static_cast<double>(trials));
  out.bound = std::pow(std::sqrt(1 - c3), static_cast<double>(n - k));
  return out;
}

void write_text(std::ostream& os, const DenseMatrix& m) {
  const auto old = os.precision(17);
  for (std::size_t i = 0; i < m.rows; ++i) {
    for (std::size_t j = 0; j < m.cols; ++j) os << (j ? " " : "") << m(i, j);
    os << '\n';
  }
  os.precision(old);
}

DenseMatrix read_text(std::istream& is) {
  const auto t = tokens(is);
  const std::size_t n = square_side(t.size());
  DenseMatrix m(n, n);
  for (std::size_t k = 0; k < t.size(); ++k) {
    try {
      std::size_t used = 0;
      m.data[k] = std::stod(t[k], &used);
      if (used != t[k].size()) throw std::invalid_argument(t[k]);
    } catch (const std::logic_error&) {
      fail(ErrorCode::kParseError, "bad matrix entry '" + t[k] + "'");
    }
  }
  return m;
}

void write_binary(std::ostream& os, const DenseMatrix& m) {
  if (!m.is_square()) fail(ErrorCode::kInvalidArgument, "binary format stores square matrices");
  const std::uint64_t n = m.rows;
  os.write(reinterpret_cast<const char*>(&n), sizeof n);
  os.write(reinterpret_cast<const char*>(m.data.data()),
           static_cast<std::streamsize>(m.data.size() * sizeof(double)));
  if (!os) fail(ErrorCode::kIoError, "binary matrix write failed");
}

DenseMatrix read_binary(std::istream& is) {
  std::uint64_t n = 0;
  if (!is.read(reinterpret_cast<char*>(&n), sizeof n)) {
    fail(ErrorCode::kParseError, "binary matrix header missing");
  }
  if (n > 100'000) fail(ErrorCode::kParseError, "binary matrix size implausible");
  DenseMatrix m(n, n);
  if (!is.read(reinterpret_cast<char*>(m.data.data()),
               static_cast<std::streamsize>(m.data.size() * sizeof(double)))) {
    fail(ErrorCode::kParseError, "binary matrix truncated");
  }
  return m;
}

void write_exact(std::ostream& os, const ExactMatrix& m) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) os << (j ? " " : "") << m(i, j).str();
    os << '\n';
  }
}

ExactMatrix read_exact(std::istream& is) {
  const auto t = tokens(is);
  const std::size_t n = square_side(t.size());
  ExactMatrix m(n, n);
  for (std::size_t k = 0; k < t.size(); ++k) m(k / n, k % n) = Rational::parse(t[k]);
  return m;
}

}  // namespace rsym
