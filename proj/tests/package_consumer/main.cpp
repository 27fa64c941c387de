#include <rsym/smallball.hpp>

int main() {
  const auto form = rsym::LinearForm::exact(std::vector<rsym::Rational>(10, rsym::Rational(1)));
  const auto est = rsym::linear_small_ball_exact(form, rsym::AtomicLaw::bernoulli(), rsym::Rational(0));
  return est.exact_rho == rsym::Rational(252, 1024) ? 0 : 1;
}
