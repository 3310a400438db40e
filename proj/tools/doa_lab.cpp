// doa-lab: command-line front end for the estimators and the Monte Carlo harness.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "doalab/config.hpp"
#include "doalab/crb.hpp"
#include "doalab/experiment.hpp"
#include "doalab/noise_cov.hpp"
#include "doalab/pipeline.hpp"
#include "doalab/report.hpp"
#include "doalab/snapshot_io.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

using namespace doalab;

void print_angles(const std::vector<double>& doas) {
  for (double d : doas) std::printf("%.6f\n", d);
}

doalab::MethodSpec resolve_method(const std::string& name, int card, int num_sensors) {
  std::string full = name;
  if ((name == "gls-forward" || name == "gls-fba")) full += ":" + std::to_string(card > 0 ? card : num_sensors);
  MethodSpec m = parse_method(full);
  if (card > 0 && m.card == 0) throw ConfigError("--card only applies to gls-forward and gls-fba");
  return m;
}

int cmd_estimate(const std::string& input, int l, const std::string& method, int card, int q_iters,
                 const std::string& cb) {
  const SnapshotMatrix snaps = read_snapshots(input);
  UlaGeometry geom;
  geom.num_sensors = snaps.num_sensors();
  const MethodSpec m = resolve_method(method, card, geom.num_sensors);
  print_angles(run_method(m, snaps, l, geom, q_iters, parse_cb_mode(cb)));
  return kExitOk;
}

int cmd_q_estimate(const std::string& input, int l, int q_iters) {
  const SnapshotMatrix snaps = read_snapshots(input);
  const NoiseCovEstimate est = estimate_noise_cov(snaps.scm(), l, q_iters);
  // plug-in predictions: sample covariance and the basis at the final estimate
  const NoiseSubspaceBasis basis = ged_noise_subspace(snaps.scm(), est.q_hat, l);
  const RVector var_printed = q_asymptotic_variance(snaps.scm(), basis, snaps.num_snapshots());
  const RVector var_circ = q_asymptotic_variance_circular(snaps.scm(), basis, snaps.num_snapshots());
  std::printf("sensor,sigma2_hat,pred_var,pred_var_circular\n");
  for (int i = 0; i < est.q_hat.size(); ++i) {
    std::printf("%d,%.9g,%.9g,%.9g\n", i + 1, est.q_hat[i], var_printed[i], var_circ[i]);
  }
  if (est.clamped) std::fprintf(stderr, "warning: some noise powers were clamped at the positivity floor\n");
  return kExitOk;
}

int cmd_crb(const std::string& config) {
  const ScenarioSpec spec = scenario_from_config(KeyValueConfig::load(config));
  const ArrayScenario sc = spec.build();
  const CrbResult crb = numeric_crb(sc);
  if (crb.singular) {
    std::fprintf(stderr, "numeric CRB: Fisher information is singular\n");
    return kExitNumerical;
  }
  std::printf("doa_deg,numeric_crb_deg2\n");
  for (std::size_t i = 0; i < sc.sources.doas_deg.size(); ++i) {
    std::printf("%s,%.9g\n", format_number(sc.sources.doas_deg[i]).c_str(),
                crb.variance_deg2[static_cast<Eigen::Index>(i)]);
  }
  std::printf("# numeric CRB %.6f dB (10 log10 sqrt(mean))\n", crb_db(crb));
  return kExitOk;
}

int cmd_sweep(const std::string& config, const std::string& out_dir, int trials, long long seed, int jobs,
              bool plot) {
  ExperimentConfig cfg = experiment_from_config(KeyValueConfig::load(config));
  if (trials > 0) cfg.trials = trials;
  if (seed >= 0) cfg.base_seed = static_cast<std::uint64_t>(seed);
  cfg.jobs = jobs;
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create '" + out_dir + "': " + ec.message());
  const RmseReport report = run_experiment(cfg);
  const std::string csv = (std::filesystem::path(out_dir) / "rmse.csv").string();
  write_csv(csv, report);
  if (plot) write_svg((std::filesystem::path(out_dir) / "rmse.svg").string(), report);
  write_csv(std::cout, report);
  return kExitOk;
}

int cmd_synth(const std::string& config, const std::string& out, bool binary) {
  const ScenarioSpec spec = scenario_from_config(KeyValueConfig::load(config));
  const SnapshotMatrix snaps = synthesize(spec.build(), spec.seed);
  if (binary) {
    write_snapshots_binary(out, snaps.data());
  } else {
    write_snapshots_csv(out, snaps.data());
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"doa-lab: DOA estimation in nonuniform noise"};
  app.require_subcommand(1);

  std::string input, method = "proposed-fba", config, out_dir, cb = "classic";
  int l = 0, card = 0, q_iters = 5, trials = 0, jobs = 1;
  long long seed = -1;
  bool no_plot = false, binary = false;

  auto* est = app.add_subcommand("estimate", "estimate DOAs from a snapshot file");
  est->add_option("--input", input, "snapshot file (CSV or DOASNAP1 binary)")->required();
  est->add_option("--L", l, "number of sources")->required()->check(CLI::PositiveNumber);
  est->add_option("--method", method,
                  "proposed-forward | proposed-fba | gls-forward | gls-fba | root-music | root-music-whitened")
      ->capture_default_str();
  est->add_option("--card", card, "equation count |I| for gls-forward / gls-fba (default M)")
      ->check(CLI::PositiveNumber);
  est->add_option("--q-iters", q_iters, "noise covariance iterations")->capture_default_str()->check(
      CLI::PositiveNumber);
  est->add_option("--cb", cb, "beamformer for the selection threshold: whitened | classic")->capture_default_str();

  auto* sweep = app.add_subcommand("sweep", "run a Monte Carlo RMSE sweep");
  sweep->add_option("--config", config, "experiment config")->required();
  sweep->add_option("--out", out_dir, "output directory")->required();
  sweep->add_option("--trials", trials, "trials per sweep point")->check(CLI::PositiveNumber);
  sweep->add_option("--seed", seed, "base seed")->check(CLI::NonNegativeNumber);
  sweep->add_option("--jobs", jobs, "worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  sweep->add_flag("--no-plot", no_plot, "skip rmse.svg");

  auto* crb = app.add_subcommand("crb", "numeric CRB for a scenario config");
  crb->add_option("--config", config, "scenario config")->required();

  auto* qest = app.add_subcommand("q-estimate", "estimate per-sensor noise powers");
  qest->add_option("--input", input, "snapshot file")->required();
  qest->add_option("--L", l, "number of sources")->required()->check(CLI::PositiveNumber);
  qest->add_option("--q-iters", q_iters, "iterations")->capture_default_str()->check(CLI::PositiveNumber);

  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "write one synthetic snapshot file for a scenario config");
  synth->add_option("--config", config, "scenario config")->required();
  synth->add_option("--out", synth_out, "output file")->required();
  synth->add_flag("--binary", binary, "write DOASNAP1 binary instead of CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*est) return cmd_estimate(input, l, method, card, q_iters, cb);
    if (*sweep) return cmd_sweep(config, out_dir, trials, seed, jobs, !no_plot);
    if (*crb) return cmd_crb(config);
    if (*qest) return cmd_q_estimate(input, l, q_iters);
    if (*synth) return cmd_synth(config, synth_out, binary);
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  }
  return kExitConfig;
}
