#include "rsym/gap.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "rsym/error.hpp"
#include "rsym/exact.hpp"

namespace rsym {
namespace {

constexpr __int128 kMax64 = std::numeric_limits<std::int64_t>::max();

std::int64_t narrow(__int128 v) {
  if (v > kMax64 || v < -kMax64) {
    fail(ErrorCode::kArithmeticOverflow, "GAP value exceeds 64 bits");
  }
  return static_cast<std::int64_t>(v);
}

// Values of q scaled by the lcm of all denominators, so the GAP becomes an
// integer progression with the same collision structure.
struct ScaledGap {
  std::int64_t scale = 1;
  std::int64_t offset = 0;
  std::vector<std::int64_t> generators;

  explicit ScaledGap(const Gap& q) {
    scale = q.offset.den();
    for (const Rational& g : q.generators) scale = checked_lcm(scale, g.den());
    offset = narrow(static_cast<__int128>(q.offset.num()) * (scale / q.offset.den()));
    for (const Rational& g : q.generators) {
      generators.push_back(
          narrow(static_cast<__int128>(g.num()) * (scale / g.den())));
    }
  }

  std::int64_t value(const LatticePoint& p) const {
    __int128 v = offset;
    for (std::size_t i = 0; i < p.size(); ++i) {
      v += static_cast<__int128>(p[i]) * generators[i];
    }
    return narrow(v);
  }
};

void check_cap(const Gap& q, std::uint64_t cap) {
  if (q.volume() > cap) {
    fail(ErrorCode::kVolumeTooLarge,
         "GAP volume " + std::to_string(q.volume()) + " exceeds cap " +
             std::to_string(cap));
  }
}

// Visits every lattice point of the box in lexicographic order.
template <class Fn>
void for_each_point(const Gap& q, Fn&& fn) {
  LatticePoint p = q.lower;
  const std::size_t r = q.rank();
  while (true) {
    fn(static_cast<const LatticePoint&>(p));
    std::size_t i = r;
    while (i > 0) {
      --i;
      if (p[i] < q.upper[i]) {
        ++p[i];
        break;
      }
      p[i] = q.lower[i];
      if (i == 0) return;
    }
    if (r == 0) return;
  }
}

std::vector<Rational> parse_rational_list(std::string_view text) {
  std::string body(text);
  if (body.size() < 2 || body.front() != '[' || body.back() != ']') {
    fail(ErrorCode::kParseError, "expected [..] list: '" + body + "'");
  }
  body = body.substr(1, body.size() - 2);
  std::vector<Rational> items;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    items.push_back(Rational::parse(item));
  }
  return items;
}

std::vector<std::int64_t> parse_int_list(std::string_view text) {
  std::vector<std::int64_t> out;
  for (const Rational& r : parse_rational_list(text)) {
    if (!r.is_integer()) fail(ErrorCode::kParseError, "bound must be an integer");
    out.push_back(r.num());
  }
  return out;
}

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return std::string(s);
}

template <class T>
std::string join(const std::vector<T>& items) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) os << ',';
    os << items[i];
  }
  os << ']';
  return os.str();
}

// Unimodular U with U d = e_0 for a primitive integer vector d, together
// with its inverse.
struct Unimodular {
  std::vector<std::vector<std::int64_t>> u;
  std::vector<std::vector<std::int64_t>> u_inv;
};

Unimodular unimodular_to_e0(std::vector<std::int64_t> d) {
  const std::size_t r = d.size();
  Unimodular t;
  t.u.assign(r, std::vector<std::int64_t>(r, 0));
  t.u_inv.assign(r, std::vector<std::int64_t>(r, 0));
  for (std::size_t i = 0; i < r; ++i) t.u[i][i] = t.u_inv[i][i] = 1;

  const auto nonzero_count = [&] {
    return std::count_if(d.begin(), d.end(), [](std::int64_t x) { return x != 0; });
  };
  while (nonzero_count() > 1) {
    std::size_t piv = r;
    for (std::size_t i = 0; i < r; ++i) {
      if (d[i] != 0 && (piv == r || std::llabs(d[i]) < std::llabs(d[piv]))) piv = i;
    }
    for (std::size_t j = 0; j < r; ++j) {
      if (j == piv || d[j] == 0) continue;
      const std::int64_t q = d[j] / d[piv];
      if (q == 0) continue;
      // row_j -= q row_piv on U; column_piv += q column_j on U^{-1}.
      d[j] -= q * d[piv];
      for (std::size_t c = 0; c < r; ++c) {
        t.u[j][c] = narrow(t.u[j][c] - static_cast<__int128>(q) * t.u[piv][c]);
      }
      for (std::size_t row = 0; row < r; ++row) {
        t.u_inv[row][piv] =
            narrow(t.u_inv[row][piv] + static_cast<__int128>(q) * t.u_inv[row][j]);
      }
    }
  }
  std::size_t last = 0;
  while (last < r && d[last] == 0) ++last;
  if (last == r) fail(ErrorCode::kInvalidArgument, "zero relation vector");
  if (last != 0) {
    std::swap(d[0], d[last]);
    std::swap(t.u[0], t.u[last]);
    for (auto& row : t.u_inv) std::swap(row[0], row[last]);
  }
  if (d[0] < 0) {
    for (auto& x : t.u[0]) x = -x;
    for (auto& row : t.u_inv) row[0] = -row[0];
  }
  return t;
}

// Working state of the reduction: a symmetric GAP and witness coordinates.
struct ReductionState {
  std::vector<Rational> generators;
  std::vector<std::int64_t> bounds;
  std::vector<LatticePoint> witnesses;

  void drop(std::size_t idx) {
    generators.erase(generators.begin() + static_cast<std::ptrdiff_t>(idx));
    bounds.erase(bounds.begin() + static_cast<std::ptrdiff_t>(idx));
    for (auto& w : witnesses) w.erase(w.begin() + static_cast<std::ptrdiff_t>(idx));
  }

  Gap as_gap(const Gap& like) const {
    Gap g = Gap::symmetric(generators, bounds);
    g.unit_name = like.unit_name;
    g.unit_value = like.unit_value;
    return g;
  }
};

Rational witness_value(const std::vector<Rational>& gens, const LatticePoint& k) {
  Rational v = 0;
  for (std::size_t i = 0; i < k.size(); ++i) v += Rational(k[i]) * gens[i];
  return v;
}

}  // namespace

Gap Gap::symmetric(std::vector<Rational> generators,
                   std::vector<std::int64_t> bounds) {
  Gap q;
  q.offset = 0;
  q.generators = std::move(generators);
  q.upper = bounds;
  q.lower.resize(bounds.size());
  for (std::size_t i = 0; i < bounds.size(); ++i) q.lower[i] = -bounds[i];
  q.validate();
  return q;
}

bool Gap::is_symmetric() const {
  if (!offset.is_zero()) return false;
  for (std::size_t i = 0; i < rank(); ++i) {
    if (lower[i] != -upper[i]) return false;
  }
  return true;
}

void Gap::validate() const {
  if (lower.size() != generators.size() || upper.size() != generators.size()) {
    fail(ErrorCode::kInvalidArgument, "GAP bounds and generators differ in length");
  }
  for (std::size_t i = 0; i < rank(); ++i) {
    if (lower[i] > upper[i]) {
      fail(ErrorCode::kInvalidArgument, "GAP lower bound exceeds upper bound");
    }
  }
  if (!(unit_value > 0) || !std::isfinite(unit_value)) {
    fail(ErrorCode::kInvalidArgument, "GAP unit must be positive");
  }
}

std::uint64_t Gap::volume() const {
  unsigned __int128 v = 1;
  for (std::size_t i = 0; i < rank(); ++i) {
    v *= static_cast<unsigned __int128>(upper[i] - lower[i] + 1);
    if (v > std::numeric_limits<std::uint64_t>::max()) {
      return std::numeric_limits<std::uint64_t>::max();
    }
  }
  return static_cast<std::uint64_t>(v);
}

bool Gap::in_box(const LatticePoint& p) const {
  if (p.size() != rank()) return false;
  for (std::size_t i = 0; i < rank(); ++i) {
    if (p[i] < lower[i] || p[i] > upper[i]) return false;
  }
  return true;
}

std::string Gap::literal() const {
  std::ostringstream os;
  os << "gap{g0=" << offset << "; g=" << join(generators) << "; K=" << join(lower)
     << "; K'=" << join(upper);
  if (!unit_name.empty()) os << "; unit=" << unit_name;
  os << '}';
  return os.str();
}

Gap Gap::parse(std::string_view literal) {
  std::string text = trim(literal);
  if (!text.starts_with("gap{") || text.back() != '}') {
    fail(ErrorCode::kParseError, "GAP literal must look like gap{...}");
  }
  text = text.substr(4, text.size() - 5);
  Gap q;
  bool have_g = false, have_lower = false, have_upper = false;
  std::stringstream ss(text);
  std::string field;
  while (std::getline(ss, field, ';')) {
    field = trim(field);
    if (field.empty()) continue;
    const auto eq = field.find('=');
    if (eq == std::string::npos) {
      fail(ErrorCode::kParseError, "GAP field without '=': " + field);
    }
    const std::string key = trim(field.substr(0, eq));
    const std::string value = trim(field.substr(eq + 1));
    if (key == "g0") {
      q.offset = Rational::parse(value);
    } else if (key == "g") {
      q.generators = parse_rational_list(value);
      have_g = true;
    } else if (key == "K") {
      q.lower = parse_int_list(value);
      have_lower = true;
    } else if (key == "K'") {
      q.upper = parse_int_list(value);
      have_upper = true;
    } else if (key == "unit") {
      q.unit_name = value;
      if (value.starts_with("sqrt(") && value.back() == ')') {
        q.unit_value =
            std::sqrt(Rational::parse(value.substr(5, value.size() - 6)).to_double());
      } else {
        fail(ErrorCode::kParseError, "unsupported unit '" + value + "'");
      }
    } else {
      fail(ErrorCode::kParseError, "unknown GAP field '" + key + "'");
    }
  }
  if (!have_g) fail(ErrorCode::kParseError, "GAP literal needs g=[...]");
  if (!have_upper) fail(ErrorCode::kParseError, "GAP literal needs K'=[...]");
  if (!have_lower) {
    q.lower.resize(q.upper.size());
    for (std::size_t i = 0; i < q.upper.size(); ++i) q.lower[i] = -q.upper[i];
  }
  q.validate();
  return q;
}

Rational evaluate(const Gap& q, const LatticePoint& p) {
  if (!q.in_box(p)) fail(ErrorCode::kOutOfBox, "lattice point outside the GAP box");
  Rational v = q.offset;
  for (std::size_t i = 0; i < p.size(); ++i) v += Rational(p[i]) * q.generators[i];
  return v;
}

std::vector<Rational> enumerate(const Gap& q, std::uint64_t cap) {
  q.validate();
  check_cap(q, cap);
  const ScaledGap scaled(q);
  std::vector<std::int64_t> values;
  values.reserve(q.volume());
  for_each_point(q, [&](const LatticePoint& p) { values.push_back(scaled.value(p)); });
  std::sort(values.begin(), values.end());
  std::vector<Rational> out;
  out.reserve(values.size());
  for (std::int64_t v : values) out.emplace_back(v, scaled.scale);
  return out;
}

bool is_proper(const Gap& q, std::uint64_t cap) {
  q.validate();
  check_cap(q, cap);
  const ScaledGap scaled(q);
  std::vector<std::int64_t> values;
  values.reserve(q.volume());
  for_each_point(q, [&](const LatticePoint& p) { values.push_back(scaled.value(p)); });
  std::sort(values.begin(), values.end());
  return std::adjacent_find(values.begin(), values.end()) == values.end();
}

std::optional<LatticePoint> beta_close(const Gap& q, const Rational& a,
                                       const Rational& beta, std::uint64_t cap) {
  q.validate();
  check_cap(q, cap);
  if (beta.sign() < 0) fail(ErrorCode::kInvalidArgument, "beta must be >= 0");
  if (!q.unit_name.empty()) {
    return beta_close(q, a.to_double(), beta.to_double(), cap);
  }
  std::optional<LatticePoint> best;
  Rational best_dist;
  for_each_point(q, [&](const LatticePoint& p) {
    const Rational dist = (evaluate(q, p) - a).abs();
    if (dist > beta) return;
    // Lexicographic order of the visit makes the first minimum the tie winner.
    if (!best || dist < best_dist) {
      best = p;
      best_dist = dist;
    }
  });
  return best;
}

std::optional<LatticePoint> beta_close(const Gap& q, double a, double beta,
                                       std::uint64_t cap) {
  q.validate();
  check_cap(q, cap);
  if (!(beta >= 0)) fail(ErrorCode::kInvalidArgument, "beta must be >= 0");
  std::optional<LatticePoint> best;
  long double best_dist = 0;
  for_each_point(q, [&](const LatticePoint& p) {
    const long double v = evaluate(q, p).to_long_double() * q.unit_value;
    const long double dist = std::fabs(v - static_cast<long double>(a));
    if (dist > beta) return;
    if (!best || dist < best_dist) {
      best = p;
      best_dist = dist;
    }
  });
  return best;
}

bool spans(const Gap& q, const std::vector<LatticePoint>& points) {
  for (const auto& p : points) {
    if (!q.in_box(p)) fail(ErrorCode::kOutOfBox, "spanning point outside the box");
  }
  const std::size_t r = q.rank();
  if (r == 0) return true;
  std::vector<std::int64_t> buf;
  buf.reserve(points.size() * r);
  for (const auto& p : points) buf.insert(buf.end(), p.begin(), p.end());
  return bareiss_rank(buf, points.size(), r) == r;
}

std::vector<std::vector<std::int64_t>> integer_kernel_basis(
    const std::vector<LatticePoint>& points, std::size_t dimension) {
  const std::size_t m = points.size();
  ExactMatrix a(m, dimension);
  for (std::size_t i = 0; i < m; ++i) {
    if (points[i].size() != dimension) {
      fail(ErrorCode::kInvalidArgument, "point dimension mismatch");
    }
    for (std::size_t j = 0; j < dimension; ++j) a(i, j) = points[i][j];
  }
  // Reduced row echelon form over the rationals.
  std::vector<std::size_t> pivot_cols;
  std::size_t row = 0;
  for (std::size_t c = 0; c < dimension && row < m; ++c) {
    std::size_t p = row;
    while (p < m && a(p, c).is_zero()) ++p;
    if (p == m) continue;
    for (std::size_t j = 0; j < dimension; ++j) std::swap(a(p, j), a(row, j));
    const Rational inv = Rational(1) / a(row, c);
    for (std::size_t j = 0; j < dimension; ++j) a(row, j) *= inv;
    for (std::size_t i = 0; i < m; ++i) {
      if (i == row || a(i, c).is_zero()) continue;
      const Rational f = a(i, c);
      for (std::size_t j = 0; j < dimension; ++j) a(i, j) -= f * a(row, j);
    }
    pivot_cols.push_back(c);
    ++row;
  }

  std::vector<std::vector<std::int64_t>> basis;
  for (std::size_t f = 0; f < dimension; ++f) {
    if (std::find(pivot_cols.begin(), pivot_cols.end(), f) != pivot_cols.end()) continue;
    std::vector<Rational> x(dimension, Rational(0));
    x[f] = 1;
    for (std::size_t i = 0; i < pivot_cols.size(); ++i) x[pivot_cols[i]] = -a(i, f);
    std::int64_t l = 1;
    for (const Rational& v : x) l = checked_lcm(l, v.den());
    std::vector<std::int64_t> alpha(dimension);
    std::int64_t g = 0;
    for (std::size_t j = 0; j < dimension; ++j) {
      alpha[j] = (x[j] * Rational(l)).num();
      g = checked_gcd(g, alpha[j]);
    }
    for (auto& v : alpha) v /= g;
    for (std::size_t j = dimension; j > 0; --j) {
      if (alpha[j - 1] != 0) {
        if (alpha[j - 1] < 0) {
          for (auto& v : alpha) v = -v;
        }
        break;
      }
    }
    basis.push_back(std::move(alpha));
  }
  return basis;
}

std::vector<std::int64_t> integer_hyperplane(
    const std::vector<LatticePoint>& points, std::size_t dimension) {
  const auto basis = integer_kernel_basis(points, dimension);
  if (basis.empty()) {
    fail(ErrorCode::kFullRank, "points have full rank; no annihilating vector");
  }
  const std::vector<std::int64_t>* best = nullptr;
  std::int64_t best_norm = 0;
  for (const auto& alpha : basis) {
    std::int64_t norm = 0;
    for (auto v : alpha) norm = std::max(norm, static_cast<std::int64_t>(std::llabs(v)));
    if (!best || norm < best_norm || (norm == best_norm && alpha < *best)) {
      best = &alpha;
      best_norm = norm;
    }
  }
  return *best;
}

ReductionResult rank_reduce(const Gap& q, const std::vector<Rational>& values,
                            const std::vector<LatticePoint>& witnesses,
                            std::uint64_t cap) {
  q.validate();
  if (!q.is_symmetric()) fail(ErrorCode::kInvalidArgument, "rank_reduce needs a symmetric GAP");
  if (values.size() != witnesses.size()) {
    fail(ErrorCode::kInvalidArgument, "one witness per value is required");
  }
  if (q.volume() > cap) fail(ErrorCode::kVolumeTooLarge, "input GAP exceeds cap");
  if (!is_proper(q, cap)) fail(ErrorCode::kInvalidArgument, "rank_reduce needs a proper GAP");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (evaluate(q, witnesses[i]) != values[i]) {
      fail(ErrorCode::kInvalidArgument, "witness does not evaluate to its value");
    }
  }

  ReductionState st{q.generators, q.upper, witnesses};
  ReductionResult result;
  const double input_volume = static_cast<double>(q.volume());

  const auto check_identity = [&](const std::vector<Rational>& before_gens,
                                  const std::vector<LatticePoint>& before_w) {
    for (std::size_t i = 0; i < st.witnesses.size(); ++i) {
      if (witness_value(st.generators, st.witnesses[i]) !=
          witness_value(before_gens, before_w[i])) {
        fail(ErrorCode::kReductionStalled, "reduction step changed a witness value");
      }
    }
  };

  for (std::size_t guard = 0; guard <= 2 * q.rank() + 2; ++guard) {
    // Coordinates that cannot contribute: zero generator or zero-width box.
    for (std::size_t i = st.generators.size(); i > 0; --i) {
      const std::size_t idx = i - 1;
      if (st.generators[idx].is_zero() || st.bounds[idx] == 0) {
        st.drop(idx);
        result.steps.push_back({ReductionStep::Kind::kDropTrivial, {}, idx});
      }
    }
    const Gap current = st.as_gap(q);
    if (current.rank() == 0) break;
    if (current.volume() > cap) {
      fail(ErrorCode::kReductionStalled, "reduced GAP exceeds the enumeration cap");
    }

    if (!is_proper(current, cap)) {
      // Find the first collision in lexicographic order and turn it into a
      // primitive relation sum d_i g_i = 0.
      const ScaledGap scaled(current);
      std::vector<std::pair<std::int64_t, LatticePoint>> pts;
      for_each_point(current, [&](const LatticePoint& p) {
        pts.emplace_back(scaled.value(p), p);
      });
      std::stable_sort(pts.begin(), pts.end(),
                       [](const auto& x, const auto& y) { return x.first < y.first; });
      std::vector<std::int64_t> d;
      for (std::size_t i = 1; i < pts.size(); ++i) {
        if (pts[i].first == pts[i - 1].first) {
          d.resize(current.rank());
          std::int64_t g = 0;
          for (std::size_t j = 0; j < d.size(); ++j) {
            d[j] = pts[i].second[j] - pts[i - 1].second[j];
            g = checked_gcd(g, d[j]);
          }
          for (auto& v : d) v /= g;
          break;
        }
      }
      const Unimodular t = unimodular_to_e0(d);
      const std::size_t r = current.rank();
      const auto before_gens = st.generators;
      const auto before_w = st.witnesses;
      // New generators g' = (U^{-1})^T g, coordinates k' = U k.
      std::vector<Rational> gens(r, Rational(0));
      for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < r; ++j) {
          if (t.u_inv[j][i] != 0) gens[i] += Rational(t.u_inv[j][i]) * st.generators[j];
        }
      }
      std::vector<std::int64_t> bounds(r, 0);
      for (std::size_t i = 0; i < r; ++i) {
        __int128 b = 0;
        for (std::size_t j = 0; j < r; ++j) {
          b += static_cast<__int128>(std::llabs(t.u[i][j])) * st.bounds[j];
        }
        bounds[i] = narrow(b);
      }
      for (auto& w : st.witnesses) {
        LatticePoint nw(r, 0);
        for (std::size_t i = 0; i < r; ++i) {
          __int128 v = 0;
          for (std::size_t j = 0; j < r; ++j) v += static_cast<__int128>(t.u[i][j]) * w[j];
          nw[i] = narrow(v);
        }
        w = std::move(nw);
      }
      st.generators = std::move(gens);
      st.bounds = std::move(bounds);
      check_identity(before_gens, before_w);
      if (!st.generators[0].is_zero()) {
        fail(ErrorCode::kReductionStalled, "collision relation did not vanish");
      }
      st.drop(0);
      check_identity(before_gens, before_w);
      result.steps.push_back({ReductionStep::Kind::kGeneratorRelation, d, 0});
      continue;
    }

    if (spans(current, st.witnesses)) break;

    const auto alpha = integer_hyperplane(st.witnesses, current.rank());
    std::size_t j = alpha.size();
    while (j > 0 && alpha[j - 1] == 0) --j;
    --j;
    const auto before_gens = st.generators;
    const auto before_w = st.witnesses;
    const Rational w = st.generators[j] / Rational(alpha[j]);
    for (std::size_t i = 0; i < st.generators.size(); ++i) {
      if (i != j) st.generators[i] -= Rational(alpha[i]) * w;
    }
    st.generators[j] = 0;  // k_j g_j is absorbed by the other generators
    st.drop(j);
    for (std::size_t i = 0; i < st.witnesses.size(); ++i) {
      if (witness_value(st.generators, st.witnesses[i]) !=
          witness_value(before_gens, before_w[i])) {
        fail(ErrorCode::kReductionStalled, "hyperplane step changed a witness value");
      }
    }
    result.steps.push_back({ReductionStep::Kind::kWitnessHyperplane, alpha, j});
  }

  result.gap = st.as_gap(q);
  result.witnesses = st.witnesses;
  if (!is_proper(result.gap, cap) || !spans(result.gap, result.witnesses)) {
    fail(ErrorCode::kReductionStalled, "reduction did not reach a spanning proper GAP");
  }
  result.volume_inflation = static_cast<double>(result.gap.volume()) / input_volume;
  return result;
}

ReductionResult rank_reduce(const Gap& q, const std::vector<Rational>& values,
                            std::uint64_t cap) {
  std::vector<LatticePoint> witnesses;
  for (const Rational& v : values) {
    auto p = beta_close(q, v, Rational(0), cap);
    if (!p) fail(ErrorCode::kInvalidArgument, "value " + v.str() + " is not in the GAP");
    witnesses.push_back(*p);
  }
  return rank_reduce(q, values, witnesses, cap);
}

}  // namespace rsym
