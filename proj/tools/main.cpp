// rsym: command line runner for the random symmetric matrix experiments.
//
//   rsym tail --n-list 20,40,80 --trials 10000 --seed 7 --out runs/tail
//   rsym gapreduce --set "values=11,22"
//   rsym replay runs/tail.json --workers 4
//   rsym ensemble --n 6 --law bernoulli --seed 3
//
// Exit status: 0 pass, 2 fail, 3 inconclusive, 1 error.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "rsym/ensembles.hpp"
#include "rsym/error.hpp"
#include "rsym/experiment.hpp"

namespace {

struct Globals {
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> trials;
  std::optional<unsigned> workers;
  std::string out;
  std::string config;
  std::optional<std::string> law;
  std::optional<std::uint64_t> n;
  std::optional<std::string> n_list;
  std::vector<std::string> overrides;
};

void add_globals(CLI::App* app, Globals& g) {
  app->add_option("--seed", g.seed, "Master seed");
  app->add_option("--trials", g.trials, "Trials per size");
  app->add_option("--workers", g.workers, "Worker threads (never changes results)")
      ->check(CLI::Range(1u, 1024u));
  app->add_option("--out", g.out, "Output base path; writes <out>.csv and <out>.json");
  app->add_option("--config", g.config, "key=value or JSON config file")
      ->check(CLI::ExistingFile);
}

int exit_code(rsym::Verdict v) {
  switch (v) {
    case rsym::Verdict::kPass: return 0;
    case rsym::Verdict::kFail: return 2;
    case rsym::Verdict::kInconclusive: return 3;
  }
  return 1;
}

void print_summary(const rsym::ResultRecord& r, std::ostream& os) {
  os << r.experiment << "  config " << r.config_hash.substr(0, 16) << "  rows " << r.rows.size()
     << "  " << rsym::format_double(r.wall_clock_seconds) << " s\n";
  for (const auto& [k, v] : r.metrics) os << "  " << k << " = " << rsym::format_double(v) << "\n";
  for (const auto& note : r.notes) os << "  note: " << note << "\n";
  os << "verdict: " << rsym::to_string(r.verdict) << "\n";
}

rsym::ExperimentConfig build_config(const std::string& name, const Globals& g) {
  rsym::ExperimentConfig c;
  if (!g.config.empty()) c = rsym::ExperimentConfig::load(g.config);
  if (c.has("experiment") && c.experiment() != name) {
    rsym::fail(rsym::ErrorCode::kInvalidConfig,
               "config names experiment '" + c.experiment() + "' but subcommand is '" + name + "'");
  }
  c.set("experiment", name);
  if (g.seed) c.set("seed", std::to_string(*g.seed));
  if (g.trials) c.set("trials", std::to_string(*g.trials));
  if (g.workers) c.set("workers", std::to_string(*g.workers));
  if (g.law) c.set("law", *g.law);
  if (g.n) c.set("n", std::to_string(*g.n));
  if (g.n_list) c.set("n_list", *g.n_list);
  if (!g.out.empty()) c.set("out", g.out);
  for (const auto& kv : g.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      rsym::fail(rsym::ErrorCode::kInvalidConfig, "--set expects key=value, got '" + kv + "'");
    }
    c.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  return c;
}

int run_ensemble(std::size_t n, const std::string& law, std::uint64_t seed, bool exact) {
  const rsym::Sampler sampler = rsym::parse_law(law);
  const auto s = rsym::sample_symmetric(sampler, rsym::FixedPart::zero(), n, seed);
  if (exact && s.exact_m) {
    rsym::write_exact(std::cout, *s.exact_m);
  } else {
    rsym::write_text(std::cout, s.m);
  }
  const auto summary = rsym::spectral_summary(s);
  std::cout << "# sigma_1 " << rsym::format_double(summary.sigma_1) << "\n"
            << "# sigma_n " << rsym::format_double(summary.sigma_n) << "\n"
            << "# kappa " << rsym::format_double(summary.kappa) << "\n"
            << "# log_abs_det " << rsym::format_double(summary.log_abs_det) << "\n";
  if (summary.corank) std::cout << "# corank " << *summary.corank << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Experiments on random symmetric matrices and small-ball probabilities"};
  app.require_subcommand(1);

  Globals g;
  std::string subcommand;
  for (const auto& name : rsym::experiment_names()) {
    auto* sub = app.add_subcommand(name, "Run the " + name + " experiment");
    add_globals(sub, g);
    sub->add_option("--law", g.law, "Entry law, e.g. bernoulli, uniform3, gaussian");
    sub->add_option("--n", g.n, "Matrix or form size");
    sub->add_option("--n-list", g.n_list, "Comma separated sizes");
    sub->add_option("--set", g.overrides, "Extra config field key=value (repeatable)");
    sub->callback([&subcommand, name] { subcommand = name; });
  }

  std::string record_path;
  auto* replay = app.add_subcommand("replay", "Rerun a stored record and compare rows");
  replay->add_option("record", record_path, "Stored JSON record")->required()->check(CLI::ExistingFile);
  replay->add_option("--workers", g.workers, "Worker threads for the rerun")
      ->check(CLI::Range(1u, 1024u));
  replay->callback([&subcommand] { subcommand = "replay"; });

  std::size_t ens_n = 4;
  std::string ens_law = "bernoulli";
  std::uint64_t ens_seed = 0;
  bool ens_exact = false;
  auto* ensemble = app.add_subcommand("ensemble", "Sample one matrix and print its spectrum");
  ensemble->add_option("--n", ens_n, "Size")->check(CLI::Range(1, 2000));
  ensemble->add_option("--law", ens_law, "Entry law");
  ensemble->add_option("--seed", ens_seed, "Seed");
  ensemble->add_flag("--exact", ens_exact, "Print exact entries when available");
  ensemble->callback([&subcommand] { subcommand = "ensemble"; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (subcommand == "ensemble") return run_ensemble(ens_n, ens_law, ens_seed, ens_exact);
    rsym::ResultRecord record;
    if (subcommand == "replay") {
      record = rsym::replay(record_path, g.workers);
      std::cout << "replay matches " << record.rows.size() << " rows\n";
    } else {
      const rsym::ExperimentConfig config = build_config(subcommand, g);
      record = rsym::run(config);
      const std::string out = config.get_string("out", "");
      if (!out.empty()) rsym::write_outputs(record, out);
    }
    print_summary(record, std::cout);
    return exit_code(record.verdict);
  } catch (const rsym::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
