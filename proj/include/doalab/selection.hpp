#pragma once

#include <string>

#include <vector>

#include "doalab/array_model.hpp"

namespace doalab {

/// Spectrum used for the step-1 threshold scan.
enum class CbMode {
  /// a^H Q^-1 R Q^-1 a / (a^H Q^-1 a), i.e. the beamformer on Q^-1/2-whitened data.
  whitened,
  /// a^H R a / M, ignoring the noise estimate. The default: the whitened
  /// spectrum flattens out whenever one estimated noise power is tiny, which
  /// is common at N = 10, and the threshold then drops true candidates.
  classic,
};

/// "whitened" or "classic"; throws ConfigError otherwise.
CbMode parse_cb_mode(const std::string& name);

struct SelectionContext {
  CMatrix scm;
  DiagonalNoiseCovariance q_hat;
  UlaGeometry geom;
  int num_sources = 1;
  double grid_deg = 0.1;
  CbMode cb_mode = CbMode::classic;
};

struct SelectionTrace {
  double threshold_eta = 0.0;
  std::vector<double> survivors;
  double first_doa = 0.0;
  int evaluated_subsets = 0;
  bool rank_deficient = false;
  std::vector<double> final;  // ascending, size L
};

double cb_spectrum(const SelectionContext& ctx, double theta_deg);

/// a^H Q^-1 R Q^-1 a / (a^H Q^-1 a).
double glr_spectrum(const SelectionContext& ctx, double theta_deg);

/// Step 1: eta is the spectrum at the (L+1)-th highest grid peak (the lowest
/// peak if there are fewer); candidates strictly above eta survive. Fewer than
/// L survivors falls back to every candidate.
std::vector<double> step1_threshold(const SelectionContext& ctx, const std::vector<double>& candidates,
                                    double* eta_out = nullptr);

struct FirstPick {
  double first_doa = 0.0;
  std::vector<double> remainder;
};

/// Step 2: GLR argmax among survivors (first index wins ties); the picked
/// entry is removed once from the remainder.
FirstPick step2_glr_pick(const SelectionContext& ctx, const std::vector<double>& survivors);

/// Deterministic ML cost trace[(P_perp - nu nu^H) Q^-1/2 R Q^-1/2] of one subset.
double ml_subset_cost(const SelectionContext& ctx, double first_doa, const std::vector<double>& subset,
                      bool* rank_deficient = nullptr);

struct SubsetSearch {
  std::vector<double> final;
  int evaluated_subsets = 0;
  bool rank_deficient = false;
};

/// Step 3: best (L-1)-subset of the remainder under the ML cost.
SubsetSearch step3_ml_subsets(const SelectionContext& ctx, double first_doa, const std::vector<double>& remainder);

/// Steps 1-3 with the full trace.
SelectionTrace select(const SelectionContext& ctx, const std::vector<double>& candidates);

}  // namespace doalab
