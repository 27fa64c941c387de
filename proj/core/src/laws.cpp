#include "rsym/laws.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <numeric>

#include "rsym/error.hpp"

namespace rsym {
namespace {

constexpr double kMergeRelTol = 1e-12;
constexpr double kMassTol = 1e-12;

bool close_relative(double a, double b) {
  return a == b ||
         std::fabs(a - b) <= kMergeRelTol * std::max(std::fabs(a), std::fabs(b));
}

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return std::string(s);
}

}  // namespace

void AtomicLaw::finalize() {
  cumulative_.resize(atoms_.size());
  double acc = 0;
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    acc += atoms_[i].mass;
    cumulative_[i] = acc;
  }
}

AtomicLaw AtomicLaw::from_atoms(std::vector<Atom> atoms, std::string label) {
  for (const Atom& a : atoms) {
    if (!std::isfinite(a.value) || !std::isfinite(a.mass) || a.mass < 0) {
      fail(ErrorCode::kInvalidLaw, "atoms must be finite with mass >= 0");
    }
  }
  std::erase_if(atoms, [](const Atom& a) { return a.mass == 0; });
  if (atoms.empty()) fail(ErrorCode::kInvalidLaw, "law has no atoms");
  std::sort(atoms.begin(), atoms.end(),
            [](const Atom& a, const Atom& b) { return a.value < b.value; });

  AtomicLaw law;
  law.label_ = std::move(label);
  for (const Atom& a : atoms) {
    if (!law.atoms_.empty() && close_relative(law.atoms_.back().value, a.value)) {
      law.atoms_.back().mass += a.mass;
    } else {
      law.atoms_.push_back(a);
    }
  }
  double total = 0;
  for (const Atom& a : law.atoms_) total += a.mass;
  if (std::fabs(total - 1.0) > kMassTol) {
    fail(ErrorCode::kInvalidLaw,
         "masses sum to " + std::to_string(total) + ", expected 1");
  }
  law.finalize();
  return law;
}

AtomicLaw AtomicLaw::from_exact(std::vector<ExactAtom> atoms,
                                std::string label) {
  std::map<Rational, Rational> merged;
  Rational total = 0;
  for (const ExactAtom& a : atoms) {
    if (a.mass.sign() < 0) fail(ErrorCode::kInvalidLaw, "negative mass");
    if (a.mass.is_zero()) continue;
    merged[a.value] += a.mass;
    total += a.mass;
  }
  if (merged.empty()) fail(ErrorCode::kInvalidLaw, "law has no atoms");
  if (total != Rational(1)) {
    fail(ErrorCode::kInvalidLaw, "masses sum to " + total.str() + ", expected 1");
  }
  AtomicLaw law;
  law.label_ = std::move(label);
  std::vector<ExactAtom> exact;
  exact.reserve(merged.size());
  for (const auto& [value, mass] : merged) {
    exact.push_back({value, mass});
    law.atoms_.push_back({value.to_double(), mass.to_double()});
  }
  law.exact_ = std::move(exact);
  law.finalize();
  return law;
}

AtomicLaw AtomicLaw::bernoulli() {
  return from_exact({{-1, {1, 2}}, {1, {1, 2}}}, "bernoulli");
}

AtomicLaw AtomicLaw::uniform3() {
  return from_exact({{-1, {1, 3}}, {0, {1, 3}}, {1, {1, 3}}}, "uniform3");
}

AtomicLaw AtomicLaw::point_mass(const Rational& value) {
  return from_exact({{value, 1}}, "point(" + value.str() + ")");
}

AtomicLaw AtomicLaw::lazy_sign(const Rational& mu) {
  if (mu.sign() < 0 || mu > Rational(1)) {
    fail(ErrorCode::kInvalidArgument, "mu must lie in [0, 1]");
  }
  const Rational half = mu / Rational(2);
  return from_exact({{-1, half}, {0, Rational(1) - mu}, {1, half}},
                    "lazy(" + mu.str() + ")");
}

const std::vector<ExactAtom>& AtomicLaw::exact_atoms() const {
  if (!exact_) {
    fail(ErrorCode::kInvalidArgument,
         "law '" + label_ + "' has no exact representation");
  }
  return *exact_;
}

double AtomicLaw::mean() const {
  double m = 0;
  for (const Atom& a : atoms_) m += a.value * a.mass;
  return m;
}

double AtomicLaw::variance() const {
  const double m = mean();
  double v = 0;
  for (const Atom& a : atoms_) v += (a.value - m) * (a.value - m) * a.mass;
  return v;
}

double AtomicLaw::max_mass() const {
  double best = 0;
  for (const Atom& a : atoms_) best = std::max(best, a.mass);
  return best;
}

double AtomicLaw::max_abs_value() const {
  double best = 0;
  for (const Atom& a : atoms_) best = std::max(best, std::fabs(a.value));
  return best;
}

std::size_t AtomicLaw::index_for(double u) const {
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  if (it == cumulative_.end()) return atoms_.size() - 1;
  return static_cast<std::size_t>(it - cumulative_.begin());
}

void SpacingCertificate::validate() const {
  if (!(c1 > 0) || !(c2 >= c1) || !(c3 > 0) || !(c3 <= 1)) {
    fail(ErrorCode::kInvalidArgument,
         "spacing certificate needs 0 < c1 <= c2 and 0 < c3 <= 1");
  }
}

double SamplerConfig::truncation_bound() const {
  if (n < 1) fail(ErrorCode::kInvalidArgument, "n must be positive");
  const double bound =
      std::pow(static_cast<double>(n), truncation_exponent + 1.0);
  if (!std::isfinite(bound) || !(bound > 0)) {
    fail(ErrorCode::kInvalidArgument, "truncation bound is not finite");
  }
  return bound;
}

AtomicLaw standardize(const AtomicLaw& law) {
  if (law.size() < 2) {
    fail(ErrorCode::kDegenerateLaw, "a point mass cannot be standardized");
  }
  const std::string label = "std(" + law.label() + ")";
  if (law.is_exact()) {
    Rational mean = 0;
    for (const auto& a : law.exact_atoms()) mean += a.value * a.mass;
    Rational var = 0;
    for (const auto& a : law.exact_atoms()) {
      const Rational d = a.value - mean;
      var += d * d * a.mass;
    }
    if (var.is_zero()) fail(ErrorCode::kDegenerateLaw, "zero variance");
    if (const auto sd = var.sqrt_exact()) {
      std::vector<ExactAtom> out;
      for (const auto& a : law.exact_atoms()) {
        out.push_back({(a.value - mean) / *sd, a.mass});
      }
      return AtomicLaw::from_exact(std::move(out), label);
    }
  }
  const double mean = law.mean();
  const double var = law.variance();
  if (!(var > 0)) fail(ErrorCode::kDegenerateLaw, "zero variance");
  const double sd = std::sqrt(var);
  std::vector<Atom> out;
  for (const Atom& a : law.atoms()) out.push_back({(a.value - mean) / sd, a.mass});
  return AtomicLaw::from_atoms(std::move(out), label);
}

AtomicLaw difference_law(const AtomicLaw& law) {
  const std::string label = "diff(" + law.label() + ")";
  if (law.is_exact()) {
    std::vector<ExactAtom> out;
    for (const auto& a : law.exact_atoms()) {
      for (const auto& b : law.exact_atoms()) {
        out.push_back({a.value - b.value, a.mass * b.mass});
      }
    }
    return AtomicLaw::from_exact(std::move(out), label);
  }
  std::vector<Atom> out;
  for (const Atom& a : law.atoms()) {
    for (const Atom& b : law.atoms()) {
      out.push_back({a.value - b.value, a.mass * b.mass});
    }
  }
  return AtomicLaw::from_atoms(std::move(out), label);
}

AtomicLaw lazy_difference_law(const AtomicLaw& law, const Rational& mu) {
  if (mu.sign() < 0 || mu > Rational(1)) {
    fail(ErrorCode::kInvalidArgument, "mu must lie in [0, 1]");
  }
  const AtomicLaw diff = difference_law(law);
  const std::string label = "lazy(" + mu.str() + ")*" + diff.label();
  // xi - xi' is symmetric, so eta*(xi - xi') is the mixture
  // mu * diff + (1 - mu) * delta_0.
  if (diff.is_exact()) {
    std::vector<ExactAtom> out;
    for (const auto& a : diff.exact_atoms()) out.push_back({a.value, a.mass * mu});
    out.push_back({0, Rational(1) - mu});
    return AtomicLaw::from_exact(std::move(out), label);
  }
  return lazy_difference_law(law, mu.to_double());
}

AtomicLaw lazy_difference_law(const AtomicLaw& law, double mu) {
  if (!(mu >= 0 && mu <= 1)) {
    fail(ErrorCode::kInvalidArgument, "mu must lie in [0, 1]");
  }
  if (law.is_exact()) {
    if (const auto exact = Rational::from_double_exact(mu)) {
      return lazy_difference_law(law, *exact);
    }
  }
  const AtomicLaw diff = difference_law(law);
  std::vector<Atom> out;
  for (const Atom& a : diff.atoms()) out.push_back({a.value, a.mass * mu});
  out.push_back({0.0, 1.0 - mu});
  return AtomicLaw::from_atoms(std::move(out),
                               "lazy(" + std::to_string(mu) + ")*" + diff.label());
}

double spacing_mass(const AtomicLaw& law, double c1, double c2) {
  const AtomicLaw diff = difference_law(law);
  if (diff.is_exact()) {
    Rational mass = 0;
    for (const auto& a : diff.exact_atoms()) {
      const Rational v = a.value.abs();
      if (v.compare(c1) >= 0 && v.compare(c2) <= 0) mass += a.mass;
    }
    return mass.to_double();
  }
  double mass = 0;
  for (const Atom& a : diff.atoms()) {
    const double v = std::fabs(a.value);
    if (v >= c1 && v <= c2) mass += a.mass;
  }
  return mass;
}

bool verify_spacing(const AtomicLaw& law, const SpacingCertificate& cert) {
  cert.validate();
  const AtomicLaw diff = difference_law(law);
  if (diff.is_exact()) {
    Rational mass = 0;
    for (const auto& a : diff.exact_atoms()) {
      const Rational v = a.value.abs();
      if (v.compare(cert.c1) >= 0 && v.compare(cert.c2) <= 0) mass += a.mass;
    }
    return mass.compare(cert.c3) >= 0;
  }
  return spacing_mass(law, cert.c1, cert.c2) >= cert.c3;
}

bool verify_spacing(const GaussianLaw&, const SpacingCertificate& cert) {
  cert.validate();
  // xi - xi' ~ N(0, 2): P(c1 <= |Z| <= c2) = erf(c2/2) - erf(c1/2).
  const double mass = std::erf(cert.c2 / 2.0) - std::erf(cert.c1 / 2.0);
  return mass + 1e-9 >= cert.c3;
}

bool verify_spacing(const Sampler& law, const SpacingCertificate& cert) {
  return std::visit([&](const auto& l) { return verify_spacing(l, cert); }, law);
}

std::optional<SpacingCertificate> natural_certificate(const AtomicLaw& law) {
  const AtomicLaw diff = difference_law(law);
  double lo = 0, hi = 0, mass = 0;
  for (const Atom& a : diff.atoms()) {
    const double v = std::fabs(a.value);
    if (v == 0) continue;
    lo = (lo == 0) ? v : std::min(lo, v);
    hi = std::max(hi, v);
    mass += a.mass;
  }
  if (lo == 0) return std::nullopt;
  if (diff.is_exact()) {
    Rational exact_mass = 0;
    for (const auto& a : diff.exact_atoms()) {
      if (!a.value.is_zero()) exact_mass += a.mass;
    }
    mass = exact_mass.to_double();
    // Round down so the certificate verifies exactly.
    if (exact_mass.compare(mass) < 0) mass = std::nextafter(mass, 0.0);
  }
  return SpacingCertificate{lo, hi, mass};
}

double draw(const Sampler& law, Stream& stream) {
  if (const auto* atomic = std::get_if<AtomicLaw>(&law)) {
    return atomic->atoms()[atomic->index_for(stream.uniform())].value;
  }
  return stream.normal();
}

std::vector<double> sample_truncated(const Sampler& law,
                                     const SamplerConfig& cfg,
                                     std::size_t count) {
  const double bound = cfg.truncation_bound();
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    Stream stream(cfg.seed, i);
    bool accepted = false;
    for (std::int64_t attempt = 0; attempt < kRejectionRetryCap; ++attempt) {
      const double x = draw(law, stream);
      if (std::fabs(x) <= bound) {
        out[i] = x;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      fail(ErrorCode::kRejectionDiverges,
           "no draw within |x| <= " + std::to_string(bound) + " after " +
               std::to_string(kRejectionRetryCap) + " attempts");
    }
  }
  return out;
}

Sampler parse_law(std::string_view literal) {
  const std::string text = trim(literal);
  if (text == "bernoulli") return AtomicLaw::bernoulli();
  if (text == "uniform3") return AtomicLaw::uniform3();
  if (text == "gaussian") return GaussianLaw{};

  const auto inner = [&](std::string_view prefix) -> std::optional<std::string> {
    if (text.size() > prefix.size() + 1 && text.starts_with(prefix) &&
        text[prefix.size()] == '(' && text.back() == ')') {
      return text.substr(prefix.size() + 1, text.size() - prefix.size() - 2);
    }
    return std::nullopt;
  };
  if (const auto arg = inner("lazy")) {
    return AtomicLaw::lazy_sign(Rational::parse(*arg));
  }
  if (const auto arg = inner("point")) {
    return AtomicLaw::point_mass(Rational::parse(*arg));
  }
  if (text.starts_with("atoms[") && text.back() == ']') {
    const std::string body = text.substr(6, text.size() - 7);
    std::vector<ExactAtom> atoms;
    std::size_t pos = 0;
    while (true) {
      const auto open = body.find('(', pos);
      if (open == std::string::npos) break;
      const auto close = body.find(')', open);
      if (close == std::string::npos) {
        fail(ErrorCode::kParseError, "unterminated atom in '" + text + "'");
      }
      const std::string pair = body.substr(open + 1, close - open - 1);
      const auto comma = pair.find(',');
      if (comma == std::string::npos) {
        fail(ErrorCode::kParseError, "atom needs (value,mass): '" + pair + "'");
      }
      atoms.push_back({Rational::parse(pair.substr(0, comma)),
                       Rational::parse(pair.substr(comma + 1))});
      pos = close + 1;
    }
    if (atoms.empty()) fail(ErrorCode::kParseError, "empty atom list");
    return AtomicLaw::from_exact(std::move(atoms), text);
  }
  fail(ErrorCode::kParseError, "unknown law literal '" + text + "'");
}

AtomicLaw parse_atomic_law(std::string_view literal) {
  Sampler law = parse_law(literal);
  if (auto* atomic = std::get_if<AtomicLaw>(&law)) return std::move(*atomic);
  fail(ErrorCode::kInvalidLaw,
       "law '" + std::string(literal) + "' is not atomic");
}

const std::string& law_label(const Sampler& law) {
  return std::visit(
      [](const auto& l) -> const std::string& {
        if constexpr (std::is_same_v<std::decay_t<decltype(l)>, AtomicLaw>) {
          return l.label();
        } else {
          return l.label;
        }
      },
      law);
}

bool is_bounded(const Sampler& law) {
  return std::holds_alternative<AtomicLaw>(law);
}

}  // namespace rsym
