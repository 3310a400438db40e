#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "doalab/array_model.hpp"

namespace doalab {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flat `key = value` text. `#` starts a comment, keys are dotted paths
/// (geometry.M), lists are comma separated. Duplicate keys are rejected.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& in, const std::string& origin = "<input>");
  static KeyValueConfig load(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::string& get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key) const;
  long long get_int(const std::string& key, long long fallback) const;
  std::vector<double> get_doubles(const std::string& key) const;
  std::vector<std::string> get_strings(const std::string& key) const;

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
  std::string origin_;
};

/// Scenario template as written in a config file.
///
/// Keys: geometry.M, geometry.d_over_lambda (0.5), sources.doas_deg,
/// sources.rho (0), one of sources.power / sources.snr_db (a sweep over
/// SNR may omit both),
/// noise.mode = uniform | nonuniform with noise.sigma2 or noise.powers,
/// snapshots.N, seed (0).
struct ScenarioSpec {
  UlaGeometry geometry;
  std::vector<double> doas_deg;
  double rho = 0.0;
  std::optional<double> power;
  std::optional<double> snr_db;
  DiagonalNoiseCovariance noise;
  int num_snapshots = 1;
  std::uint64_t seed = 0;

  /// Resolves the source power (from snr_db when given) and validates.
  ArrayScenario build() const;
};

ScenarioSpec scenario_from_config(const KeyValueConfig& cfg);

}  // namespace doalab
