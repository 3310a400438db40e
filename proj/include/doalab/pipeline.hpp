#pragma once

#include "doalab/gls_doa.hpp"
#include "doalab/noise_cov.hpp"
#include "doalab/selection.hpp"

namespace doalab {

/// Output of the three-phase estimator: noise estimate, two candidate runs
/// (|I| = M-1 and |I| = M) and the selection trace.
struct ProposedResult {
  NoiseCovEstimate noise;
  DoaCandidates run_reduced;  // |I| = M-1
  DoaCandidates run_full;     // |I| = M
  SelectionTrace selection;

  const std::vector<double>& doas_deg() const { return selection.final; }
};

ProposedResult estimate_proposed(const SnapshotMatrix& snapshots, int num_sources, const UlaGeometry& geom,
                                 SubspaceFlavor flavor, int q_iters = 5, CbMode cb_mode = CbMode::classic);

/// Same, reusing an existing noise estimate.
ProposedResult estimate_proposed(const SnapshotMatrix& snapshots, const NoiseCovEstimate& noise, int num_sources,
                                 const UlaGeometry& geom, SubspaceFlavor flavor, CbMode cb_mode = CbMode::classic);

}  // namespace doalab
