#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>

namespace rsym {

/// Exact rational number over 64-bit integers.
///
/// The value is always stored in lowest terms with a positive denominator.
/// Arithmetic is carried out in 128-bit intermediates and reduced; a result
/// that does not fit back into 64 bits raises ErrorCode::kArithmeticOverflow
/// instead of wrapping. Comparisons never overflow.
class Rational {
 public:
  constexpr Rational() = default;
  constexpr Rational(std::int64_t value) : num_(value) {}  // NOLINT implicit
  Rational(std::int64_t num, std::int64_t den);

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }

  bool is_zero() const { return num_ == 0; }
  bool is_integer() const { return den_ == 1; }
  int sign() const { return (num_ > 0) - (num_ < 0); }

  double to_double() const {
    return static_cast<double>(num_) / static_cast<double>(den_);
  }
  long double to_long_double() const {
    return static_cast<long double>(num_) / static_cast<long double>(den_);
  }

  /// Parses "p", "p/q", or a finite decimal such as "-0.125" or "1e-3".
  static Rational parse(std::string_view text);

  /// Exact conversion of a binary double; fails if it needs more than 62
  /// bits of denominator or the numerator overflows.
  static std::optional<Rational> from_double_exact(double value);

  /// Best rational approximation with |x - p/q| <= tolerance and the
  /// smallest denominator reachable along the continued-fraction
  /// convergents and their semiconvergents, q <= max_den.
  static std::optional<Rational> approximate(double value, double tolerance,
                                             std::int64_t max_den);

  /// Exact square root if numerator and denominator are perfect squares.
  std::optional<Rational> sqrt_exact() const;

  std::string str() const;

  Rational operator-() const;
  Rational abs() const { return num_ < 0 ? -*this : *this; }

  friend Rational operator+(const Rational& a, const Rational& b);
  friend Rational operator-(const Rational& a, const Rational& b);
  friend Rational operator*(const Rational& a, const Rational& b);
  friend Rational operator/(const Rational& a, const Rational& b);

  Rational& operator+=(const Rational& o) { return *this = *this + o; }
  Rational& operator-=(const Rational& o) { return *this = *this - o; }
  Rational& operator*=(const Rational& o) { return *this = *this * o; }
  Rational& operator/=(const Rational& o) { return *this = *this / o; }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend std::strong_ordering operator<=>(const Rational& a,
                                          const Rational& b) {
    const __int128 lhs = static_cast<__int128>(a.num_) * b.den_;
    const __int128 rhs = static_cast<__int128>(b.num_) * a.den_;
    return lhs <=> rhs;
  }

  /// Exact three-way comparison against a double (NaN compares unordered).
  std::partial_ordering compare(double x) const;

  friend std::ostream& operator<<(std::ostream& os, const Rational& r) {
    return os << r.str();
  }

 private:
  static Rational from_wide(__int128 num, __int128 den);

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

std::int64_t checked_gcd(std::int64_t a, std::int64_t b);
std::int64_t checked_lcm(std::int64_t a, std::int64_t b);

/// Value-type overloads so templated code can treat double and Rational alike.
inline double to_double(double x) { return x; }
inline double to_double(const Rational& x) { return x.to_double(); }
inline double abs_value(double x) { return x < 0 ? -x : x; }
inline Rational abs_value(const Rational& x) { return x.abs(); }

}  // namespace rsym

template <>
struct std::hash<rsym::Rational> {
  std::size_t operator()(const rsym::Rational& r) const noexcept {
    const std::size_t h1 = std::hash<std::int64_t>{}(r.num());
    const std::size_t h2 = std::hash<std::int64_t>{}(r.den());
    return h1 ^ (h2 + 0x9e3779b97f4a7c15ULL + (h1 << 6) + (h1 >> 2));
  }
};
