#include "doalab/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace doalab {

namespace {

std::string trim(const std::string& s) {
  const auto first = std::find_if_not(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
  const auto last = std::find_if_not(s.rbegin(), s.rend(), [](unsigned char c) { return std::isspace(c); }).base();
  return first < last ? std::string(first, last) : std::string();
}

std::vector<std::string> split_list(const std::string& raw) {
  std::string s = trim(raw);
  if (!s.empty() && s.front() == '[' && s.back() == ']') s = s.substr(1, s.size() - 2);
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size()) {
    throw ConfigError("key '" + key + "': '" + text + "' is not a number");
  }
  return v;
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::istream& in, const std::string& origin) {
  KeyValueConfig cfg;
  cfg.origin_ = origin;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
    if (!cfg.values_.emplace(key, value).second) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
    }
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse(in, path);
}

const std::string& KeyValueConfig::get_string(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError(origin_ + ": missing key '" + key + "'");
  return it->second;
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
  return has(key) ? get_string(key) : fallback;
}

double KeyValueConfig::get_double(const std::string& key) const { return to_double(key, get_string(key)); }

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

long long KeyValueConfig::get_int(const std::string& key) const {
  const double v = get_double(key);
  if (v != static_cast<double>(static_cast<long long>(v))) {
    throw ConfigError("key '" + key + "' must be an integer");
  }
  return static_cast<long long>(v);
}

long long KeyValueConfig::get_int(const std::string& key, long long fallback) const {
  return has(key) ? get_int(key) : fallback;
}

std::vector<double> KeyValueConfig::get_doubles(const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : split_list(get_string(key))) out.push_back(to_double(key, item));
  return out;
}

std::vector<std::string> KeyValueConfig::get_strings(const std::string& key) const {
  return split_list(get_string(key));
}

ScenarioSpec scenario_from_config(const KeyValueConfig& cfg) {
  ScenarioSpec spec;
  spec.geometry.num_sensors = static_cast<int>(cfg.get_int("geometry.M"));
  spec.geometry.spacing_over_wavelength = cfg.get_double("geometry.d_over_lambda", 0.5);
  spec.doas_deg = cfg.get_doubles("sources.doas_deg");
  spec.rho = cfg.get_double("sources.rho", 0.0);
  if (cfg.has("sources.power") && cfg.has("sources.snr_db")) {
    throw ConfigError("give only one of sources.power and sources.snr_db");
  }
  if (cfg.has("sources.power")) spec.power = cfg.get_double("sources.power");
  if (cfg.has("sources.snr_db")) spec.snr_db = cfg.get_double("sources.snr_db");

  const std::string mode = cfg.get_string("noise.mode", "uniform");
  try {
    if (mode == "uniform") {
      spec.noise = DiagonalNoiseCovariance::uniform(spec.geometry.num_sensors, cfg.get_double("noise.sigma2", 1.0));
    } else if (mode == "nonuniform") {
      const std::vector<double> p = cfg.get_doubles("noise.powers");
      spec.noise = DiagonalNoiseCovariance(Eigen::Map<const RVector>(p.data(), static_cast<Eigen::Index>(p.size())));
    } else {
      throw ConfigError("noise.mode must be 'uniform' or 'nonuniform', got '" + mode + "'");
    }
  } catch (const DomainError& e) {
    throw ConfigError(std::string("noise: ") + e.what());
  }
  spec.num_snapshots = static_cast<int>(cfg.get_int("snapshots.N"));
  const long long seed = cfg.get_int("seed", 0);
  if (seed < 0) throw ConfigError("seed must be non-negative");
  spec.seed = static_cast<std::uint64_t>(seed);
  return spec;
}

ArrayScenario ScenarioSpec::build() const {
  ArrayScenario sc;
  sc.geometry = geometry;
  sc.noise = noise;
  sc.sources.doas_deg = doas_deg;
  sc.sources.num_snapshots = num_snapshots;
  if (!snr_db && !power) throw ConfigError("one of sources.power and sources.snr_db is required");
  try {
    const double p = snr_db ? source_power_for_snr(*snr_db, noise) : *power;
    sc.sources.source_cov = make_source_cov(static_cast<int>(doas_deg.size()), p, rho);
    sc.validate();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("invalid scenario: ") + e.what());
  }
  return sc;
}

}  // namespace doalab
