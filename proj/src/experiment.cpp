#include "doalab/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "doalab/crb.hpp"
#include "doalab/noise_cov.hpp"
#include "doalab/pipeline.hpp"
#include "doalab/root_music.hpp"

namespace doalab {

namespace {

constexpr double kFailurePenaltyDeg = 90.0;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Per-trial outcome for every method: sorted error vector or failure.
struct TrialOutcome {
  std::vector<std::vector<double>> estimates;
  std::vector<bool> failed;
};

}  // namespace

SweepAxis parse_sweep_axis(const std::string& name) {
  if (name == "snr_db") return SweepAxis::snr_db;
  if (name == "num_snapshots") return SweepAxis::num_snapshots;
  if (name == "delta_theta_deg") return SweepAxis::delta_theta_deg;
  throw ConfigError("unknown sweep axis '" + name + "' (snr_db | num_snapshots | delta_theta_deg)");
}

std::string to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::snr_db: return "snr_db";
    case SweepAxis::num_snapshots: return "num_snapshots";
    case SweepAxis::delta_theta_deg: return "delta_theta_deg";
  }
  return "?";
}

MethodSpec parse_method(const std::string& name) {
  MethodSpec m;
  m.name = name;
  using K = MethodSpec::Kind;
  if (name == "proposed-forward") {
    m.kind = K::proposed_forward;
  } else if (name == "proposed-fba") {
    m.kind = K::proposed_fba;
  } else if (name == "root-music") {
    m.kind = K::root_music;
  } else if (name == "root-music-whitened") {
    m.kind = K::root_music_whitened;
  } else if (name.rfind("gls-forward:", 0) == 0 || name.rfind("gls-fba:", 0) == 0) {
    const auto colon = name.find(':');
    m.kind = name[4] == 'f' && name[5] == 'o' ? K::gls_forward : K::gls_fba;
    try {
      std::size_t used = 0;
      m.card = std::stoi(name.substr(colon + 1), &used);
      if (used != name.size() - colon - 1) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ConfigError("method '" + name + "': cardinality must be an integer");
    }
  } else {
    throw ConfigError("unknown method '" + name + "'");
  }
  return m;
}

ExperimentConfig experiment_from_config(const KeyValueConfig& cfg) {
  ExperimentConfig out;
  out.scenario = scenario_from_config(cfg);
  out.base_seed = out.scenario.seed;
  out.axis = parse_sweep_axis(cfg.get_string("sweep.axis"));
  out.values = cfg.get_doubles("sweep.values");
  for (const auto& name : cfg.get_strings("methods")) out.methods.push_back(parse_method(name));
  if (out.methods.empty()) throw ConfigError("methods must list at least one estimator");
  out.trials = static_cast<int>(cfg.get_int("trials", 200));
  if (out.trials < 1) throw ConfigError("trials must be >= 1");
  out.q_iters = static_cast<int>(cfg.get_int("q_iters", 5));
  if (out.q_iters < 1) throw ConfigError("q_iters must be >= 1");
  out.cb_mode = parse_cb_mode(cfg.get_string("selection.cb", "classic"));
  if (out.axis != SweepAxis::snr_db && !out.scenario.power && !out.scenario.snr_db) {
    throw ConfigError("sources.power or sources.snr_db is required unless SNR is swept");
  }
  return out;
}

ArrayScenario scenario_at(const ScenarioSpec& spec, SweepAxis axis, double value) {
  ScenarioSpec s = spec;
  switch (axis) {
    case SweepAxis::snr_db:
      s.snr_db = value;
      s.power.reset();
      break;
    case SweepAxis::num_snapshots:
      if (value < 1.0 || value != std::floor(value)) throw ConfigError("snapshot counts must be positive integers");
      s.num_snapshots = static_cast<int>(value);
      break;
    case SweepAxis::delta_theta_deg:
      if (s.doas_deg.size() < 2) throw ConfigError("angular-separation sweeps need at least two sources");
      s.doas_deg.back() = s.doas_deg[s.doas_deg.size() - 2] + value;
      break;
  }
  return s.build();
}

std::uint64_t trial_seed(std::uint64_t base_seed, std::uint64_t point, std::uint64_t trial) {
  std::uint64_t h = splitmix64(base_seed);
  h = splitmix64(h ^ (point + 0x51ed270b27ULL));
  return splitmix64(h ^ (trial * 0x2545f4914f6cdd1dULL));
}

std::vector<double> run_method(const MethodSpec& method, const SnapshotMatrix& snapshots, int num_sources,
                               const UlaGeometry& geom, int q_iters, CbMode cb_mode) {
  using K = MethodSpec::Kind;
  std::vector<double> out;
  switch (method.kind) {
    case K::proposed_forward:
      out = estimate_proposed(snapshots, num_sources, geom, SubspaceFlavor::forward, q_iters, cb_mode).doas_deg();
      break;
    case K::proposed_fba:
      out = estimate_proposed(snapshots, num_sources, geom, SubspaceFlavor::fba, q_iters, cb_mode).doas_deg();
      break;
    case K::gls_forward:
    case K::gls_fba: {
      const NoiseCovEstimate noise = estimate_noise_cov(snapshots.scm(), num_sources, q_iters);
      const auto run = method.kind == K::gls_forward ? &estimate_forward : &estimate_fba;
      out = run(snapshots.data(), noise.q_hat, num_sources, method.card, geom).angles_deg;
      break;
    }
    case K::root_music:
      out = root_music(snapshots.scm(), std::nullopt, num_sources, geom).angles_deg;
      break;
    case K::root_music_whitened: {
      const NoiseCovEstimate noise = estimate_noise_cov(snapshots.scm(), num_sources, q_iters);
      out = root_music(snapshots.scm(), noise.q_hat, num_sources, geom).angles_deg;
      break;
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

double rmse_db(const std::vector<std::vector<double>>& estimates, const std::vector<double>& truth) {
  std::vector<double> t = truth;
  std::sort(t.begin(), t.end());
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& row : estimates) {
    if (row.size() != t.size()) throw DomainError("estimate row size differs from the number of sources");
    std::vector<double> e = row;
    std::sort(e.begin(), e.end());
    for (std::size_t l = 0; l < t.size(); ++l) {
      const double d = e[l] - t[l];
      sum += d * d;
      ++count;
    }
  }
  if (count == 0) throw DomainError("no estimates to score");
  if (sum == 0.0) return -std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(std::sqrt(sum / static_cast<double>(count)));
}

RmseReport run_experiment(const ExperimentConfig& cfg) {
  RmseReport report;
  report.axis = cfg.axis;
  const int jobs = std::max(1, cfg.jobs);
  const std::size_t n_methods = cfg.methods.size();

  for (std::size_t pi = 0; pi < cfg.values.size(); ++pi) {
    const ArrayScenario scenario = scenario_at(cfg.scenario, cfg.axis, cfg.values[pi]);
    const int l = scenario.sources.num_sources();
    std::vector<double> truth = scenario.sources.doas_deg;
    std::sort(truth.begin(), truth.end());

    std::vector<TrialOutcome> outcomes(static_cast<std::size_t>(cfg.trials));
    std::atomic<int> next{0};
    auto worker = [&] {
      for (int t = next++; t < cfg.trials; t = next++) {
        TrialOutcome& out = outcomes[static_cast<std::size_t>(t)];
        out.estimates.resize(n_methods);
        out.failed.assign(n_methods, false);
        const SnapshotMatrix snaps = synthesize(scenario, trial_seed(cfg.base_seed, pi, static_cast<std::uint64_t>(t)));
        for (std::size_t k = 0; k < n_methods; ++k) {
          try {
            out.estimates[k] = run_method(cfg.methods[k], snaps, l, scenario.geometry, cfg.q_iters, cfg.cb_mode);
            if (static_cast<int>(out.estimates[k].size()) != l) throw NumericalError("wrong number of estimates");
          } catch (const std::exception&) {
            out.failed[k] = true;
            out.estimates[k] = truth;
            for (double& e : out.estimates[k]) e += kFailurePenaltyDeg;
          }
        }
      }
    };
    if (jobs == 1) {
      worker();
    } else {
      std::vector<std::jthread> pool;
      for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    }

    SweepPoint point;
    point.value = cfg.values[pi];
    const CrbResult crb = numeric_crb(scenario);
    if (!crb.singular) point.crb_db = crb_db(crb);
    for (std::size_t k = 0; k < n_methods; ++k) {
      MethodPoint mp;
      mp.method = cfg.methods[k].name;
      mp.trials = cfg.trials;
      std::vector<std::vector<double>> rows;
      rows.reserve(outcomes.size());
      double sum = 0.0;
      double sum_sq = 0.0;
      std::size_t count = 0;
      for (const TrialOutcome& o : outcomes) {
        rows.push_back(o.estimates[k]);
        if (o.failed[k]) ++mp.failures;
        for (std::size_t s = 0; s < truth.size(); ++s) {
          const double d = o.estimates[k][s] - truth[s];
          sum += d;
          sum_sq += d * d;
          ++count;
        }
      }
      mp.rmse_db = rmse_db(rows, truth);
      mp.mean_error_deg = sum / static_cast<double>(count);
      const double var = sum_sq / static_cast<double>(count) - mp.mean_error_deg * mp.mean_error_deg;
      mp.std_error_deg = std::sqrt(std::max(var, 0.0));
      point.methods.push_back(std::move(mp));
    }
    report.points.push_back(std::move(point));
  }
  return report;
}

}  // namespace doalab
