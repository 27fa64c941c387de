#pragma once

#include <cstdint>
#include <vector>

#include "rsym/exact.hpp"
#include "rsym/random.hpp"
#include "rsym/rational.hpp"

namespace rsym::test {

// Hand-rolled generators for property tests. Each takes the stream so a
// failing case can be reproduced from the printed seed.

inline std::vector<std::int64_t> random_ints(Stream& s, std::size_t n, std::int64_t lo,
                                             std::int64_t hi) {
  std::vector<std::int64_t> v(n);
  for (auto& x : v) x = s.between(lo, hi);
  return v;
}

inline ExactMatrix random_symmetric_int(Stream& s, std::size_t n, std::int64_t lo,
                                        std::int64_t hi) {
  ExactMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      m(i, j) = m(j, i) = Rational(s.between(lo, hi));
    }
  }
  return m;
}

// Plain Laplace expansion, only for the tiny sizes used as an oracle.
inline Rational laplace_det(const ExactMatrix& m) {
  const std::size_t n = m.rows();
  if (n == 0) return Rational(1);
  if (n == 1) return m(0, 0);
  Rational det(0);
  for (std::size_t j = 0; j < n; ++j) {
    if (m(0, j).is_zero()) continue;
    const Rational minor = laplace_det(m.without(0, j));
    det += (j % 2 ? -m(0, j) : m(0, j)) * minor;
  }
  return det;
}

}  // namespace rsym::test
