#include "doalab/pipeline.hpp"

namespace doalab {

ProposedResult estimate_proposed(const SnapshotMatrix& snapshots, const NoiseCovEstimate& noise, int num_sources,
                                 const UlaGeometry& geom, SubspaceFlavor flavor, CbMode cb_mode) {
  const int m = geom.num_sensors;
  if (num_sources + 1 >= m) throw DomainError("the two candidate runs need L < M - 1");
  ProposedResult out;
  out.noise = noise;
  const auto run = flavor == SubspaceFlavor::fba ? &estimate_fba : &estimate_forward;
  out.run_reduced = run(snapshots.data(), noise.q_hat, num_sources, m - 1, geom);
  out.run_full = run(snapshots.data(), noise.q_hat, num_sources, m, geom);

  std::vector<double> candidates = out.run_reduced.angles_deg;
  candidates.insert(candidates.end(), out.run_full.angles_deg.begin(), out.run_full.angles_deg.end());
  SelectionContext ctx{snapshots.scm(), noise.q_hat, geom, num_sources, 0.1, cb_mode};
  out.selection = select(ctx, candidates);
  return out;
}

ProposedResult estimate_proposed(const SnapshotMatrix& snapshots, int num_sources, const UlaGeometry& geom,
                                 SubspaceFlavor flavor, int q_iters, CbMode cb_mode) {
  return estimate_proposed(snapshots, estimate_noise_cov(snapshots.scm(), num_sources, q_iters), num_sources, geom,
                           flavor, cb_mode);
}

}  // namespace doalab
