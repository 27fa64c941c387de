#include "rsym/rational.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>

#include "rsym/error.hpp"

namespace rsym {
namespace {

constexpr __int128 kMax64 = std::numeric_limits<std::int64_t>::max();
constexpr __int128 kMin64 = std::numeric_limits<std::int64_t>::min();

__int128 gcd128(__int128 a, __int128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    const __int128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

int bit_length(unsigned __int128 v) {
  int bits = 0;
  while (v != 0) {
    v >>= 1;
    ++bits;
  }
  return bits;
}

std::int64_t parse_int(std::string_view text) {
  std::int64_t value = 0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || first == last) {
    fail(ErrorCode::kParseError,
         "not an integer: '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

std::int64_t checked_gcd(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(gcd128(a, b));
}

std::int64_t checked_lcm(std::int64_t a, std::int64_t b) {
  if (a == 0 || b == 0) return 0;
  const __int128 g = gcd128(a, b);
  __int128 l = static_cast<__int128>(a) / g * b;
  if (l < 0) l = -l;
  if (l > kMax64) fail(ErrorCode::kArithmeticOverflow, "lcm overflow");
  return static_cast<std::int64_t>(l);
}

Rational::Rational(std::int64_t num, std::int64_t den) {
  *this = from_wide(num, den);
}

Rational Rational::from_wide(__int128 num, __int128 den) {
  if (den == 0) fail(ErrorCode::kInvalidArgument, "zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const __int128 g = gcd128(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  if (num > kMax64 || num < kMin64 || den > kMax64) {
    fail(ErrorCode::kArithmeticOverflow, "rational result exceeds 64 bits");
  }
  Rational r;
  r.num_ = static_cast<std::int64_t>(num);
  r.den_ = static_cast<std::int64_t>(den);
  return r;
}

Rational Rational::operator-() const {
  return from_wide(-static_cast<__int128>(num_), den_);
}

Rational operator+(const Rational& a, const Rational& b) {
  if (a.den_ == b.den_) {
    return Rational::from_wide(static_cast<__int128>(a.num_) + b.num_,
                               a.den_);
  }
  const __int128 n = static_cast<__int128>(a.num_) * b.den_ +
                     static_cast<__int128>(b.num_) * a.den_;
  const __int128 d = static_cast<__int128>(a.den_) * b.den_;
  return Rational::from_wide(n, d);
}

Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }

Rational operator*(const Rational& a, const Rational& b) {
  // Cross-reduce first so that products of reduced fractions stay small.
  const __int128 g1 = gcd128(a.num_, b.den_);
  const __int128 g2 = gcd128(b.num_, a.den_);
  const __int128 n = (a.num_ / (g1 == 0 ? 1 : g1)) *
                     static_cast<__int128>(b.num_ / (g2 == 0 ? 1 : g2));
  const __int128 d = (a.den_ / (g2 == 0 ? 1 : g2)) *
                     static_cast<__int128>(b.den_ / (g1 == 0 ? 1 : g1));
  return Rational::from_wide(n, d);
}

Rational operator/(const Rational& a, const Rational& b) {
  if (b.num_ == 0) fail(ErrorCode::kInvalidArgument, "division by zero");
  return a * Rational::from_wide(b.den_, b.num_);
}

std::partial_ordering Rational::compare(double x) const {
  if (std::isnan(x)) return std::partial_ordering::unordered;
  if (std::isinf(x)) {
    return x > 0 ? std::partial_ordering::less
                 : std::partial_ordering::greater;
  }
  if (x == 0.0) return num_ <=> static_cast<std::int64_t>(0);
  int exp = 0;
  const double frac = std::frexp(x, &exp);
  // x = mant * 2^shift with |mant| < 2^53.
  const auto mant = static_cast<std::int64_t>(std::ldexp(frac, 53));
  const int shift = exp - 53;
  // Compare num/den with mant*2^shift  <=>  num vs mant*den*2^shift.
  __int128 lhs = num_;
  __int128 rhs = static_cast<__int128>(mant) * den_;
  const auto mag = [](__int128 v) {
    return static_cast<unsigned __int128>(v < 0 ? -v : v);
  };
  if (shift >= 0) {
    if (bit_length(mag(rhs)) + shift > 125) {
      return rhs > 0 ? std::partial_ordering::less
                     : std::partial_ordering::greater;
    }
    rhs <<= shift;
  } else {
    if (bit_length(mag(lhs)) - shift > 125) {
      if (num_ == 0) return 0 <=> rhs;
      return num_ > 0 ? std::partial_ordering::greater
                      : std::partial_ordering::less;
    }
    lhs <<= -shift;
  }
  return lhs <=> rhs;
}

Rational Rational::parse(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front())))
    text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back())))
    text.remove_suffix(1);
  if (text.empty()) fail(ErrorCode::kParseError, "empty rational literal");

  if (const auto slash = text.find('/'); slash != std::string_view::npos) {
    return Rational(parse_int(text.substr(0, slash)),
                    parse_int(text.substr(slash + 1)));
  }

  // Decimal with optional exponent, converted exactly: d.ddd e[+-]x.
  std::string_view mantissa = text;
  std::int64_t exponent = 0;
  if (const auto e = text.find_first_of("eE"); e != std::string_view::npos) {
    mantissa = text.substr(0, e);
    exponent = parse_int(text.substr(e + 1));
  }
  bool negative = false;
  if (!mantissa.empty() && (mantissa.front() == '-' || mantissa.front() == '+')) {
    negative = mantissa.front() == '-';
    mantissa.remove_prefix(1);
  }
  std::string digits;
  std::int64_t frac_digits = 0;
  bool seen_point = false;
  for (char c : mantissa) {
    if (c == '.') {
      if (seen_point) fail(ErrorCode::kParseError, "bad decimal literal");
      seen_point = true;
    } else if (c >= '0' && c <= '9') {
      digits.push_back(c);
      if (seen_point) ++frac_digits;
    } else {
      fail(ErrorCode::kParseError,
           "bad rational literal: '" + std::string(text) + "'");
    }
  }
  if (digits.empty()) fail(ErrorCode::kParseError, "bad decimal literal");
  const std::int64_t scale = frac_digits - exponent;
  __int128 num = 0;
  for (char c : digits) {
    num = num * 10 + (c - '0');
    if (num > kMax64 * 10) {
      fail(ErrorCode::kArithmeticOverflow, "decimal literal too long");
    }
  }
  __int128 den = 1;
  if (scale > 0) {
    for (std::int64_t i = 0; i < scale; ++i) {
      den *= 10;
      if (den > kMax64 * 10) {
        fail(ErrorCode::kArithmeticOverflow, "decimal literal too precise");
      }
    }
  } else {
    for (std::int64_t i = 0; i < -scale; ++i) {
      num *= 10;
      if (num > kMax64 * 10) {
        fail(ErrorCode::kArithmeticOverflow, "decimal literal too large");
      }
    }
  }
  return from_wide(negative ? -num : num, den);
}

std::optional<Rational> Rational::from_double_exact(double value) {
  if (!std::isfinite(value)) return std::nullopt;
  if (value == 0.0) return Rational(0);
  int exp = 0;
  const double frac = std::frexp(value, &exp);
  auto mant = static_cast<std::int64_t>(std::ldexp(frac, 53));
  int shift = exp - 53;
  while (shift < 0 && (mant & 1) == 0) {
    mant >>= 1;
    ++shift;
  }
  if (shift >= 0) {
    if (shift > 62 || bit_length(static_cast<unsigned __int128>(
                          mant < 0 ? -mant : mant)) + shift > 62) {
      return std::nullopt;
    }
    return Rational(mant * (std::int64_t{1} << shift));
  }
  if (-shift > 62) return std::nullopt;
  return Rational(mant, std::int64_t{1} << -shift);
}

std::optional<Rational> Rational::approximate(double value, double tolerance,
                                              std::int64_t max_den) {
  if (!std::isfinite(value) || tolerance < 0 || max_den < 1) {
    return std::nullopt;
  }
  const bool negative = value < 0;
  long double x = std::fabs(static_cast<long double>(value));
  const long double target = x;
  if (target > static_cast<long double>(kMax64 / 2)) return std::nullopt;

  // Convergents h/k of the continued fraction of |value|.
  __int128 h_prev = 1, k_prev = 0;
  __int128 h = static_cast<__int128>(std::floor(x));
  __int128 k = 1;
  const auto within = [&](__int128 p, __int128 q) {
    return std::fabs(static_cast<long double>(p) / static_cast<long double>(q) -
                     target) <= tolerance;
  };
  const auto finish = [&](__int128 p, __int128 q) -> std::optional<Rational> {
    if (p > kMax64 || q > kMax64) return std::nullopt;
    return Rational(static_cast<std::int64_t>(negative ? -p : p),
                    static_cast<std::int64_t>(q));
  };
  if (within(h, k)) return finish(h, k);
  long double rem = x - std::floor(x);
  for (int iter = 0; iter < 96 && rem > 0; ++iter) {
    x = 1.0L / rem;
    const auto a = static_cast<__int128>(std::floor(x));
    rem = x - std::floor(x);
    // Semiconvergents (h_prev + t h) / (k_prev + t k), t = 1..a, approach
    // the next convergent; the first one inside tolerance has the smallest
    // denominator.
    for (__int128 t = (a + 1) / 2; t <= a; ++t) {
      const __int128 p = h_prev + t * h;
      const __int128 q = k_prev + t * k;
      if (q > max_den) return std::nullopt;
      if (within(p, q)) {
        // Walk back while smaller t still qualifies.
        __int128 best = t;
        while (best > 1 && within(h_prev + (best - 1) * h,
                                  k_prev + (best - 1) * k)) {
          --best;
        }
        return finish(h_prev + best * h, k_prev + best * k);
      }
    }
    const __int128 h_next = h_prev + a * h;
    const __int128 k_next = k_prev + a * k;
    h_prev = h;
    k_prev = k;
    h = h_next;
    k = k_next;
    if (k > max_den) return std::nullopt;
  }
  if (within(h, k)) return finish(h, k);
  return std::nullopt;
}

std::optional<Rational> Rational::sqrt_exact() const {
  if (num_ < 0) return std::nullopt;
  const auto isqrt = [](std::int64_t v) -> std::optional<std::int64_t> {
    auto r = static_cast<std::int64_t>(std::sqrt(static_cast<long double>(v)));
    while (r > 0 && static_cast<__int128>(r) * r > v) --r;
    while (static_cast<__int128>(r + 1) * (r + 1) <= v) ++r;
    if (static_cast<__int128>(r) * r != v) return std::nullopt;
    return r;
  };
  const auto n = isqrt(num_);
  const auto d = isqrt(den_);
  if (!n || !d) return std::nullopt;
  return Rational(*n, *d);
}

std::string Rational::str() const {
  if (den_ == 1) return std::to_string(num_);
  return std::to_string(num_) + "/" + std::to_string(den_);
}

}  // namespace rsym
