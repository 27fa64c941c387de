#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rsym/detconc.hpp"

namespace rsym {

/// Flat string-valued configuration. Text form is one key=value per line
/// ('#' starts a comment); a document starting with '{' is read as JSON.
class ExperimentConfig {
 public:
  ExperimentConfig() = default;

  static ExperimentConfig parse(std::string_view text);
  static ExperimentConfig load(const std::filesystem::path& path);

  void set(const std::string& key, std::string value);
  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::map<std::string, std::string>& values() const { return values_; }

  std::string experiment() const { return get_string("experiment", ""); }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<std::size_t> get_sizes(const std::string& key,
                                     std::vector<std::size_t> fallback) const;
  std::vector<double> get_doubles(const std::string& key,
                                  std::vector<double> fallback) const;

  /// Sorted key=value lines, excluding the keys that never affect results
  /// (workers, out).
  std::string canonical() const;
  /// Hex SHA-256 of canonical().
  std::string hash() const;

  std::string to_text() const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;

 private:
  std::map<std::string, std::string> values_;
};

struct ResultRecord {
  std::string experiment;
  ExperimentConfig config;
  std::string config_hash;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  std::map<std::string, double> metrics;
  std::vector<std::string> notes;
  Verdict verdict = Verdict::kInconclusive;
  double wall_clock_seconds = 0;

  std::string to_json() const;
  static ResultRecord from_json(std::string_view text);
  std::string to_csv() const;
};

/// Names accepted by run().
const std::vector<std::string>& experiment_names();

/// kUnknownExperiment for unknown names, kInvalidConfig for bad fields.
ResultRecord run(const ExperimentConfig& config);

/// Writes <out>.csv and <out>.json; `out` may carry either extension.
void write_outputs(const ResultRecord& record, const std::filesystem::path& out);

/// Reruns the embedded config of a stored record; kReplayMismatch names the
/// first differing row. `workers` overrides the stored worker count.
ResultRecord replay(const std::filesystem::path& record_path,
                    std::optional<unsigned> workers = std::nullopt);

/// Shortest round-trip text of a double, stable across runs.
std::string format_double(double v);

}  // namespace rsym
