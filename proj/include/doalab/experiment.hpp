#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "doalab/config.hpp"
#include "doalab/gls_doa.hpp"
#include "doalab/selection.hpp"

namespace doalab {

enum class SweepAxis { snr_db, num_snapshots, delta_theta_deg };

SweepAxis parse_sweep_axis(const std::string& name);
std::string to_string(SweepAxis axis);

/// Estimators the harness can run.
///   proposed-forward, proposed-fba   full three-phase estimator
///   gls-forward:K, gls-fba:K         one GLS run with |I| = K, no selection
///   root-music                       root-MUSIC on the raw sample covariance
///   root-music-whitened              root-MUSIC after whitening with the phase-1 noise estimate
struct MethodSpec {
  enum class Kind { proposed_forward, proposed_fba, gls_forward, gls_fba, root_music, root_music_whitened };
  Kind kind = Kind::proposed_forward;
  int card = 0;
  std::string name;
};

MethodSpec parse_method(const std::string& name);

struct ExperimentConfig {
  ScenarioSpec scenario;
  SweepAxis axis = SweepAxis::snr_db;
  std::vector<double> values;
  std::vector<MethodSpec> methods;
  int trials = 200;
  std::uint64_t base_seed = 0;
  int q_iters = 5;
  CbMode cb_mode = CbMode::classic;
  int jobs = 1;
};

/// Scenario keys plus sweep.axis, sweep.values, methods, trials (200),
/// q_iters (5), selection.cb (classic). The scenario's `seed` is the base seed.
ExperimentConfig experiment_from_config(const KeyValueConfig& cfg);

struct MethodPoint {
  std::string method;
  double rmse_db = 0.0;
  double mean_error_deg = 0.0;
  double std_error_deg = 0.0;
  int trials = 0;
  int failures = 0;
};

struct SweepPoint {
  double value = 0.0;
  std::optional<double> crb_db;  // empty when the Fisher information is singular
  std::vector<MethodPoint> methods;
};

struct RmseReport {
  SweepAxis axis = SweepAxis::snr_db;
  std::vector<SweepPoint> points;
};

/// Scenario at one sweep value: SNR sets the source power, N the snapshot
/// count, delta theta moves the last DOA to doas[L-2] + delta.
ArrayScenario scenario_at(const ScenarioSpec& spec, SweepAxis axis, double value);

/// Stable per-trial seed from (base seed, sweep index, trial index).
std::uint64_t trial_seed(std::uint64_t base_seed, std::uint64_t point, std::uint64_t trial);

/// Runs one estimator on one data set; returns L ascending angles in degrees.
std::vector<double> run_method(const MethodSpec& method, const SnapshotMatrix& snapshots, int num_sources,
                               const UlaGeometry& geom, int q_iters = 5,
                               CbMode cb_mode = CbMode::classic);

/// 10 log10 sqrt(mean squared degree error) over trials and sources. Each row
/// of estimates and the truth are sorted ascending before differencing.
/// Returns -infinity when every estimate is exact.
double rmse_db(const std::vector<std::vector<double>>& estimates, const std::vector<double>& truth);

/// Seeded Monte Carlo sweep. Trials run on cfg.jobs threads; results are
/// reduced in (point, trial) order, so the report does not depend on jobs.
/// A trial whose estimator throws counts as a failure with a 90 deg error
/// on every source.
RmseReport run_experiment(const ExperimentConfig& cfg);

}  // namespace doalab
