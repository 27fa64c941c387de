#include "rsym/experiment.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include <json.hpp>

#include "rsym/error.hpp"
#include "rsym/gap.hpp"
#include "rsym/parallel.hpp"
#include "rsym/smallball.hpp"
#include "rsym/structure.hpp"

namespace rsym {
namespace {

using nlohmann::json;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& text) {
  std::string body = trim(text);
  if (!body.empty() && body.front() == '[' && body.back() == ']') {
    body = body.substr(1, body.size() - 2);
  }
  std::vector<std::string> out;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

[[noreturn]] void bad_field(const std::string& key, const std::string& value,
                            const std::string& expected) {
  fail(ErrorCode::kInvalidConfig,
       "field '" + key + "': expected " + expected + ", got '" + value + "'");
}

std::string json_scalar(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_array()) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) out += ",";
      out += json_scalar(v[i]);
    }
    return out;
  }
  return v.dump();
}

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx, data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx, digest, &len) != 1) {
    EVP_MD_CTX_free(ctx);
    fail(ErrorCode::kIoError, "SHA-256 computation failed");
  }
  EVP_MD_CTX_free(ctx);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 15];
  }
  return out;
}

std::string to_str(std::uint64_t v) { return std::to_string(v); }

Verdict combine(const std::vector<Verdict>& vs) {
  bool inconclusive = false;
  for (Verdict v : vs) {
    if (v == Verdict::kFail) return Verdict::kFail;
    inconclusive = inconclusive || v == Verdict::kInconclusive;
  }
  return inconclusive ? Verdict::kInconclusive : Verdict::kPass;
}

Sampler config_law(const ExperimentConfig& c) {
  const std::string text = c.get_string("law", "bernoulli");
  try {
    return parse_law(text);
  } catch (const Error& e) {
    fail(ErrorCode::kInvalidConfig, "field 'law': " + std::string(e.what()));
  }
}

AtomicLaw config_atomic_law(const ExperimentConfig& c) {
  Sampler law = config_law(c);
  if (auto* a = std::get_if<AtomicLaw>(&law)) return *a;
  fail(ErrorCode::kInvalidConfig, "field 'law': this experiment needs an atomic law");
}

unsigned config_workers(const ExperimentConfig& c) {
  const auto w = c.get_uint("workers", 1);
  if (w < 1 || w > 1024) bad_field("workers", c.get_string("workers", ""), "1..1024");
  return static_cast<unsigned>(w);
}

// ---- experiments -----------------------------------------------------------

void run_smallball(const ExperimentConfig& c, ResultRecord& r) {
  const Sampler law = config_law(c);
  const double beta = c.get_double("beta", 0.0);
  const std::string method = c.get_string("method", "auto");
  const auto coeffs = c.get_doubles("coeffs", {});
  const auto shifts = c.get_doubles("shifts", {});
  std::vector<std::vector<double>> forms;
  if (!coeffs.empty()) {
    forms.push_back(coeffs);
  } else {
    for (std::size_t n : c.get_sizes("n_list", {c.get_uint("n", 16)})) {
      forms.emplace_back(n, 1.0);
    }
  }
  const std::optional<double> bound =
      c.has("bound") ? std::optional<double>(c.get_double("bound", 0)) : std::nullopt;
  r.columns = {"n", "beta", "method", "rho", "center", "ci_halfwidth", "rho_sqrt_n"};
  std::vector<Verdict> verdicts;
  for (const auto& a : forms) {
    if (!shifts.empty() && shifts.size() != a.size()) {
      bad_field("shifts", c.get_string("shifts", ""), "one shift per coefficient");
    }
    const LinearForm form = LinearForm::make(a, shifts);
    const auto* atomic = std::get_if<AtomicLaw>(&law);
    SmallBallEstimate est;
    bool exact = method == "exact" || (method == "auto" && atomic != nullptr);
    if (exact && !atomic) bad_field("method", method, "mc for a non-atomic law");
    if (exact) {
      // Integer coefficients try the rational path first; masses that outgrow
      // 64-bit fractions fall back to double arithmetic over the same atoms.
      bool integral = true;
      for (double v : a) integral = integral && v == std::round(v) && std::fabs(v) < 1e15;
      for (double v : shifts) integral = integral && v == std::round(v) && std::fabs(v) < 1e15;
      try {
        if (!integral) throw Error(ErrorCode::kArithmeticOverflow, "non-integral coefficients");
        std::vector<Rational> ea, ef;
        for (double v : a) ea.emplace_back(static_cast<std::int64_t>(v));
        for (double v : shifts) ef.emplace_back(static_cast<std::int64_t>(v));
        est = linear_small_ball_exact(LinearForm::exact(ea, ef), *atomic, beta);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kArithmeticOverflow) throw;
        try {
          est = linear_small_ball_exact(form, *atomic, beta);
        } catch (const Error& e2) {
          if (method == "exact" || e2.code() != ErrorCode::kAtomBlowup) throw;
          exact = false;
        }
      }
    }
    if (!exact) {
      if (method != "auto" && method != "mc") bad_field("method", method, "auto, exact or mc");
      MonteCarloOptions mc{c.get_uint("trials", 100'000), c.get_uint("seed", 0), config_workers(c)};
      est = linear_small_ball_mc(form, law, beta, mc);
    }
    const double n = static_cast<double>(a.size());
    r.rows.push_back({to_str(a.size()), format_double(beta), to_string(est.method),
                      format_double(est.rho), format_double(est.witness_center),
                      format_double(est.ci_halfwidth), format_double(est.rho * std::sqrt(n))});
    if (bound) {
      if (est.rho + est.ci_halfwidth <= *bound) {
        verdicts.push_back(Verdict::kPass);
      } else if (est.rho - est.ci_halfwidth > *bound) {
        verdicts.push_back(Verdict::kFail);
      } else {
        verdicts.push_back(Verdict::kInconclusive);
      }
    }
  }
  r.verdict = bound ? combine(verdicts) : Verdict::kPass;
  if (!bound) r.notes.push_back("no bound declared; verdict reflects successful evaluation only");
}

void run_tail(const ExperimentConfig& c, ResultRecord& r) {
  const Sampler law = config_law(c);
  const auto n_list = c.get_sizes("n_list", {20, 40, 80});
  const double a_exp = c.get_double("A_exp", 3.0);
  const double threshold = c.get_double("threshold", 0.01);
  TailOptions opts;
  opts.workers = config_workers(c);
  if (c.has("c1") || c.has("c2") || c.has("c3")) {
    opts.certificate = SpacingCertificate{c.get_double("c1", 1), c.get_double("c2", 2),
                                          c.get_double("c3", 0.5)};
  }
  const TailReport rep = tail_experiment(law, FixedPart::zero(), n_list, a_exp,
                                         c.get_uint("trials", 1000), c.get_uint("seed", 0), opts);
  r.columns = {"n", "trial", "seed", "sigma_n", "kappa"};
  for (const auto& row : rep.rows) {
    r.rows.push_back({to_str(row.n), to_str(row.trial), to_str(row.seed),
                      format_double(row.sigma_n), format_double(row.kappa)});
  }
  std::vector<Verdict> verdicts;
  for (const auto& st : rep.stats) {
    const std::string p = "n" + std::to_string(st.n) + ".";
    r.metrics[p + "sigma_frequency"] = st.sigma_frequency;
    r.metrics[p + "sigma_ci_lo"] = st.sigma_ci.lo;
    r.metrics[p + "sigma_ci_hi"] = st.sigma_ci.hi;
    r.metrics[p + "kappa_frequency"] = st.kappa_frequency;
    r.metrics[p + "kappa_ci_lo"] = st.kappa_ci.lo;
    r.metrics[p + "kappa_ci_hi"] = st.kappa_ci.hi;
    verdicts.push_back(verdict_below(st.sigma_ci, threshold));
  }
  if (rep.sigma_fit) {
    r.metrics["fit.slope"] = rep.sigma_fit->slope;
    r.metrics["fit.intercept"] = rep.sigma_fit->intercept;
  }
  r.verdict = combine(verdicts);
}

void run_detconc(const ExperimentConfig& c, ResultRecord& r) {
  const Sampler law = config_law(c);
  DetConcOptions opts;
  opts.workers = config_workers(c);
  if (c.has("epsilon")) opts.epsilon = c.get_double("epsilon", 0);
  opts.normalize = c.get_bool("normalize", true);
  const auto rep = concentration_experiment(law, c.get_sizes("n_list", {50, 100, 200}),
                                            c.get_uint("trials", 200), c.get_uint("seed", 0), opts);
  r.columns = {"n", "trial", "seed", "log_abs_det", "kept_sum", "dropped_count", "sigma_n", "kappa"};
  for (const auto& row : rep.rows) {
    r.rows.push_back({to_str(row.n), to_str(row.trial), to_str(row.seed),
                      format_double(row.log_abs_det), format_double(row.kept_sum),
                      to_str(row.dropped_count), format_double(row.sigma_n),
                      format_double(row.kappa)});
  }
  double lo = INFINITY, hi = 0;
  bool deviations_ok = true;
  const double max_dev = c.get_double("max_deviation_frequency", 0.05);
  for (const auto& st : rep.stats) {
    const std::string p = "n" + std::to_string(st.n) + ".";
    r.metrics[p + "epsilon"] = st.epsilon;
    r.metrics[p + "mean_log_abs_det"] = st.mean_log_abs_det;
    r.metrics[p + "std_log_abs_det"] = st.std_log_abs_det;
    r.metrics[p + "mean_kept"] = st.mean_kept;
    r.metrics[p + "std_kept"] = st.std_kept;
    r.metrics[p + "ratio"] = st.ratio;
    r.metrics[p + "mean_dropped"] = st.mean_dropped;
    r.metrics[p + "singular_trials"] = static_cast<double>(st.singular_trials);
    r.metrics[p + "deviation_threshold"] = st.deviation_threshold;
    r.metrics[p + "deviation_frequency"] = st.deviation_frequency;
    r.metrics[p + "predicted_scale"] = st.predicted_scale;
    r.metrics[p + "additive_log_scale"] = st.deviation_threshold;
    lo = std::min(lo, st.ratio);
    hi = std::max(hi, st.ratio);
    deviations_ok = deviations_ok && st.deviation_frequency <= max_dev;
  }
  r.metrics["ratio_spread"] = lo > 0 ? hi / lo : INFINITY;
  const double max_spread = c.get_double("max_ratio_spread", 1.5);
  r.verdict = (r.metrics["ratio_spread"] <= max_spread && deviations_ok) ? Verdict::kPass
                                                                         : Verdict::kFail;
}

QuadraticForm random_zero_diagonal_form(std::size_t n, Stream& stream) {
  std::vector<double> a(n * n, 0.0);
  const double norm = n > 1 ? std::sqrt(static_cast<double>(n * (n - 1))) : 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = ((stream.next() >> 63) ? 1.0 : -1.0) / norm;
      a[i * n + j] = a[j * n + i] = v;
    }
  }
  return QuadraticForm::make(n, a);
}

void run_decoupling(const ExperimentConfig& c, ResultRecord& r) {
  const AtomicLaw law = config_atomic_law(c);
  const std::size_t n = c.get_uint("n", 4);
  const double beta = c.get_double("beta", 0.1);
  const std::uint64_t instances = c.get_uint("trials", 20);
  const std::uint64_t seed = c.get_uint("seed", 0);
  const auto constants = c.get_doubles("radius_constants", {1, 2, 4});
  r.columns = {"instance", "seed", "rho_quad", "lhs", "rhs_c1", "rhs_at_zero_c1", "smallest_constant"};
  std::size_t holding = 0;
  for (std::uint64_t i = 0; i < instances; ++i) {
    const std::uint64_t s = derive_seed(seed, n, i);
    Stream stream(s);
    const QuadraticForm form = random_zero_diagonal_form(n, stream);
    const Bipartition u = Bipartition::random(n, stream);
    const DecouplingScan scan = scan_decoupling(form, law, beta, u, constants);
    holding += scan.smallest_holding.has_value();
    const auto& first = scan.records.front();
    r.rows.push_back({to_str(i), to_str(s), format_double(first.rho_quad),
                      format_double(first.lhs), format_double(first.rhs),
                      format_double(first.rhs_at_zero),
                      scan.smallest_holding ? format_double(*scan.smallest_holding) : "none"});
  }
  r.metrics["instances"] = static_cast<double>(instances);
  r.metrics["holding"] = static_cast<double>(holding);
  r.verdict = holding == instances ? Verdict::kPass : Verdict::kFail;
}

void run_gapreduce(const ExperimentConfig& c, ResultRecord& r) {
  const Gap q = Gap::parse(c.get_string("gap", "gap{g0=0; g=[1,10]; K=[-2,-2]; K'=[2,2]}"));
  std::vector<Rational> values;
  for (const auto& v : split_list(c.get_string("values", "11,22"))) {
    try {
      values.push_back(Rational::parse(v));
    } catch (const Error&) {
      bad_field("values", v, "a rational number");
    }
  }
  const ReductionResult res = rank_reduce(q, values);
  r.columns = {"step", "kind", "relation", "eliminated"};
  for (std::size_t i = 0; i < res.steps.size(); ++i) {
    const auto& st = res.steps[i];
    std::string rel;
    for (std::size_t j = 0; j < st.relation.size(); ++j) {
      rel += (j ? " " : "") + std::to_string(st.relation[j]);
    }
    const char* kind = st.kind == ReductionStep::Kind::kWitnessHyperplane ? "witness_hyperplane"
                       : st.kind == ReductionStep::Kind::kGeneratorRelation ? "generator_relation"
                                                                             : "drop_trivial";
    r.rows.push_back({to_str(i), kind, rel, to_str(st.eliminated)});
  }
  bool contains = true;
  for (const auto& v : values) contains = contains && beta_close(res.gap, v, Rational(0)).has_value();
  const bool span = spans(res.gap, res.witnesses);
  const bool proper = is_proper(res.gap);
  r.notes.push_back("input " + q.literal());
  r.notes.push_back("output " + res.gap.literal());
  r.metrics["input_rank"] = static_cast<double>(q.rank());
  r.metrics["output_rank"] = static_cast<double>(res.gap.rank());
  r.metrics["volume_inflation"] = res.volume_inflation;
  r.metrics["contains_inputs"] = contains;
  r.metrics["spans"] = span;
  r.metrics["proper"] = proper;
  r.verdict = contains && span && proper && res.gap.rank() <= q.rank() ? Verdict::kPass
                                                                       : Verdict::kFail;
}

void run_rankgrow(const ExperimentConfig& c, ResultRecord& r) {
  const AtomicLaw law = config_atomic_law(c);
  const std::size_t n = c.get_uint("n", 4);
  const std::uint64_t trials = c.get_uint("trials", 10'000);
  const std::uint64_t seed = c.get_uint("seed", 0);
  const auto cert = natural_certificate(law);
  if (!cert) fail(ErrorCode::kSpacingUnverified, "law has no spacing certificate");
  const double c3 = c.get_double("c3", cert->c3);
  const SymmetricSample start = SymmetricSample::from_exact(ExactMatrix(n, n));
  const std::size_t k = exact_rank(start);
  const std::size_t steps = c.get_uint("steps", n - k - 1);
  std::vector<std::vector<GrowthStep>> runs(trials);
  parallel_for(trials, config_workers(c), [&](std::size_t t) {
    runs[t] = grow_and_track(start, law, steps, derive_seed(seed, n, t));
  });
  r.columns = {"trial", "seed", "jump_step1", "final_size", "final_rank", "all_jumped"};
  std::uint64_t jumps = 0, chains = 0;
  for (std::uint64_t t = 0; t < trials; ++t) {
    const auto& run = runs[t];
    const bool all = std::all_of(run.begin(), run.end(), [](const GrowthStep& g) { return g.jumped_by_2; });
    const bool first = !run.empty() && run.front().jumped_by_2;
    jumps += first;
    chains += !run.empty() && run.back().size - run.back().rank <= 1;
    r.rows.push_back({to_str(t), to_str(derive_seed(seed, n, t)), first ? "1" : "0",
                      to_str(run.empty() ? n : run.back().size),
                      to_str(run.empty() ? k : run.back().rank), all ? "1" : "0"});
  }
  const double p = static_cast<double>(jumps) / static_cast<double>(trials);
  const double se = std::sqrt(p * (1 - p) / static_cast<double>(trials));
  const double bound = 1 - std::pow(std::sqrt(1 - c3), static_cast<double>(n - k));
  r.metrics["jump_frequency"] = p;
  r.metrics["jump_se"] = se;
  r.metrics["jump_bound"] = bound;
  r.metrics["corank_le_1_frequency"] = static_cast<double>(chains) / static_cast<double>(trials);
  r.verdict = p >= bound - 3 * se ? Verdict::kPass : Verdict::kFail;
}

void run_odlyzko(const ExperimentConfig& c, ResultRecord& r) {
  const AtomicLaw law = config_atomic_law(c);
  const auto cert = natural_certificate(law);
  if (!cert) fail(ErrorCode::kSpacingUnverified, "law has no spacing certificate");
  const double c3 = c.get_double("c3", cert->c3);
  const std::uint64_t trials = c.get_uint("trials", 100'000);
  const std::uint64_t seed = c.get_uint("seed", 0);
  r.columns = {"n", "k", "dimension", "hits", "trials", "frequency", "se", "bound"};
  bool ok = true;
  for (std::size_t n : c.get_sizes("n_list", {8, 12})) {
    for (std::size_t k = 1; k < n; ++k) {
      const auto res = odlyzko_experiment(law, c3, n, k, trials, seed, config_workers(c));
      r.rows.push_back({to_str(n), to_str(k), to_str(res.dimension), to_str(res.hits),
                        to_str(res.trials), format_double(res.frequency),
                        format_double(res.standard_error), format_double(res.bound)});
      ok = ok && res.frequency <= res.bound + 3 * res.standard_error;
    }
  }
  r.verdict = ok ? Verdict::kPass : Verdict::kFail;
}

using Runner = std::function<void(const ExperimentConfig&, ResultRecord&)>;

const std::map<std::string, Runner>& runners() {
  static const std::map<std::string, Runner> table = {
      {"smallball", run_smallball}, {"tail", run_tail},         {"detconc", run_detconc},
      {"decoupling", run_decoupling}, {"gapreduce", run_gapreduce},
      {"rankgrow", run_rankgrow},   {"odlyzko", run_odlyzko}};
  return table;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIoError, "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) fail(ErrorCode::kIoError, "cannot write " + path.string());
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

}  // namespace

// ---- config ----------------------------------------------------------------

ExperimentConfig ExperimentConfig::parse(std::string_view text) {
  ExperimentConfig c;
  const std::string body = trim(text);
  if (!body.empty() && body.front() == '{') {
    try {
      const json j = json::parse(body);
      for (const auto& el : j.items()) c.set(el.key(), json_scalar(el.value()));
    } catch (const json::exception& e) {
      fail(ErrorCode::kInvalidConfig, std::string("config JSON: ") + e.what());
    }
    return c;
  }
  std::stringstream ss(body);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos || eq == 0) {
      fail(ErrorCode::kInvalidConfig, "line " + std::to_string(lineno) + ": expected key=value");
    }
    c.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  return parse(read_file(path));
}

void ExperimentConfig::set(const std::string& key, std::string value) {
  const std::string k = trim(key);
  if (k.empty()) fail(ErrorCode::kInvalidConfig, "empty config key");
  values_[k] = trim(value);
}

std::string ExperimentConfig::get_string(const std::string& key,
                                         const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

std::int64_t ExperimentConfig::get_int(const std::string& key, std::int64_t fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::int64_t v = 0;
  const auto& s = it->second;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) bad_field(key, s, "an integer");
  return v;
}

std::uint64_t ExperimentConfig::get_uint(const std::string& key, std::uint64_t fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::uint64_t v = 0;
  const auto& s = it->second;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) bad_field(key, s, "a non-negative integer");
  return v;
}

double ExperimentConfig::get_double(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  double v = 0;
  const auto& s = it->second;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v)) {
    bad_field(key, s, "a finite number");
  }
  return v;
}

bool ExperimentConfig::get_bool(const std::string& key, bool fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const auto& s = it->second;
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  bad_field(key, s, "a boolean");
}

std::vector<std::size_t> ExperimentConfig::get_sizes(const std::string& key,
                                                     std::vector<std::size_t> fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<std::size_t> out;
  for (const auto& item : split_list(it->second)) {
    std::size_t v = 0;
    const auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || p != item.data() + item.size() || v == 0) {
      bad_field(key, it->second, "a list of positive integers");
    }
    out.push_back(v);
  }
  if (out.empty()) bad_field(key, it->second, "a non-empty list");
  return out;
}

std::vector<double> ExperimentConfig::get_doubles(const std::string& key,
                                                  std::vector<double> fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<double> out;
  for (const auto& item : split_list(it->second)) {
    double v = 0;
    const auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || p != item.data() + item.size()) {
      bad_field(key, it->second, "a list of numbers");
    }
    out.push_back(v);
  }
  return out;
}

std::string ExperimentConfig::canonical() const {
  std::string out;
  for (const auto& [k, v] : values_) {
    if (k == "workers" || k == "out") continue;
    out += k + "=" + v + "\n";
  }
  return out;
}

std::string ExperimentConfig::hash() const { return sha256_hex(canonical()); }

std::string ExperimentConfig::to_text() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + "=" + v + "\n";
  return out;
}

// ---- records ---------------------------------------------------------------

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

std::string ResultRecord::to_json() const {
  json j;
  j["experiment"] = experiment;
  j["config"] = config.values();
  j["config_hash"] = config_hash;
  j["columns"] = columns;
  j["rows"] = rows;
  json m = json::object();
  for (const auto& [k, v] : metrics) {
    if (std::isfinite(v)) {
      m[k] = v;
    } else {
      m[k] = format_double(v);
    }
  }
  j["metrics"] = m;
  j["notes"] = notes;
  j["verdict"] = to_string(verdict);
  j["wall_clock_seconds"] = wall_clock_seconds;
  return j.dump(2);
}

ResultRecord ResultRecord::from_json(std::string_view text) {
  ResultRecord r;
  try {
    const json j = json::parse(text);
    r.experiment = j.at("experiment").get<std::string>();
    for (const auto& el : j.at("config").items()) r.config.set(el.key(), el.value().get<std::string>());
    r.config_hash = j.at("config_hash").get<std::string>();
    r.columns = j.at("columns").get<std::vector<std::string>>();
    r.rows = j.at("rows").get<std::vector<std::vector<std::string>>>();
    const json metrics = j.value("metrics", json::object());
    for (const auto& el : metrics.items()) {
      const json& v = el.value();
      r.metrics[el.key()] = v.is_number() ? v.get<double>() : std::stod(v.get<std::string>());
    }
    r.notes = j.value("notes", std::vector<std::string>{});
    const std::string verdict = j.value("verdict", "inconclusive");
    r.verdict = verdict == "pass"   ? Verdict::kPass
                : verdict == "fail" ? Verdict::kFail
                                    : Verdict::kInconclusive;
    r.wall_clock_seconds = j.value("wall_clock_seconds", 0.0);
  } catch (const json::exception& e) {
    fail(ErrorCode::kParseError, std::string("result record: ") + e.what());
  }
  return r;
}

std::string ResultRecord::to_csv() const {
  std::string out;
  for (std::size_t i = 0; i < columns.size(); ++i) out += (i ? "," : "") + csv_escape(columns[i]);
  out += "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + csv_escape(row[i]);
    out += "\n";
  }
  return out;
}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [k, _] : runners()) v.push_back(k);
    return v;
  }();
  return names;
}

ResultRecord run(const ExperimentConfig& config) {
  const std::string name = config.experiment();
  const auto it = runners().find(name);
  if (it == runners().end()) {
    fail(ErrorCode::kUnknownExperiment, "unknown experiment '" + name + "'");
  }
  ResultRecord r;
  r.experiment = name;
  r.config = config;
  r.config_hash = config.hash();
  const auto start = std::chrono::steady_clock::now();
  it->second(config, r);
  r.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

void write_outputs(const ResultRecord& record, const std::filesystem::path& out) {
  std::filesystem::path base = out;
  if (base.extension() == ".csv" || base.extension() == ".json") base.replace_extension();
  write_file(std::filesystem::path(base.string() + ".csv"), record.to_csv());
  write_file(std::filesystem::path(base.string() + ".json"), record.to_json());
}

ResultRecord replay(const std::filesystem::path& record_path, std::optional<unsigned> workers) {
  const ResultRecord stored = ResultRecord::from_json(read_file(record_path));
  ExperimentConfig config = stored.config;
  if (workers) config.set("workers", std::to_string(*workers));
  const ResultRecord fresh = run(config);
  if (fresh.columns != stored.columns) {
    fail(ErrorCode::kReplayMismatch, "column layout differs from the stored record");
  }
  const std::size_t common = std::min(fresh.rows.size(), stored.rows.size());
  for (std::size_t i = 0; i < common; ++i) {
    if (fresh.rows[i] != stored.rows[i]) {
      std::string a, b;
      for (const auto& s : stored.rows[i]) a += (a.empty() ? "" : ",") + s;
      for (const auto& s : fresh.rows[i]) b += (b.empty() ? "" : ",") + s;
      fail(ErrorCode::kReplayMismatch,
           "row " + std::to_string(i) + " differs: stored [" + a + "] vs replay [" + b + "]");
    }
  }
  if (fresh.rows.size() != stored.rows.size()) {
    fail(ErrorCode::kReplayMismatch, "row count differs: stored " +
                                         std::to_string(stored.rows.size()) + " vs replay " +
                                         std::to_string(fresh.rows.size()));
  }
  return fresh;
}

}  // namespace rsym
