#pragma once

#include <vector>

#include "doalab/array_model.hpp"

namespace doalab {

/// Orthonormal basis of the estimated noise subspace of the pair (R, Q).
struct NoiseSubspaceBasis {
  /// M x (M-L), columns orthonormal.
  CMatrix basis;
  /// The M-L smallest generalized eigenvalues of (R, Q), ascending.
  RVector gen_eigenvalues;
  /// basis^H Q^-1 R basis. Orthonormalizing the generalized eigenvectors
  /// turns the diagonal eigenvalue matrix into this similar matrix, for which
  /// R basis = Q basis coupling holds exactly.
  CMatrix coupling;
};

/// Noise subspace from the generalized eigendecomposition of (scm, q):
/// whiten by Q^-1/2, Hermitian eigendecomposition, map back, thin QR.
NoiseSubspaceBasis ged_noise_subspace(const CMatrix& scm, const DiagonalNoiseCovariance& q, int num_sources);

/// Closed-form LS update: entry m is Re{v_m^H r_m} / tau_m with
/// v_m = [U U^H]_{:,m}, tau_m = [U U^H]_{mm}. Unconstrained; entries may be <= 0.
/// Throws NumericalError when some tau_m < 1e-12.
RVector ls_q_update(const CMatrix& scm, const NoiseSubspaceBasis& basis);

/// LS cost || (R - Q) U ||_F^2 for a diagonal Q given by its powers.
double ls_cost(const CMatrix& scm, const CMatrix& basis, const RVector& q_powers);

struct NoiseCovEstimate {
  DiagonalNoiseCovariance q_hat;
  int iterations_run = 0;
  /// Q^(0), Q^(1), ..., Q^(iterations_run) (diagonals).
  std::vector<RVector> per_iteration_q;
  /// Diagonal of the last weighting matrix W_Q linking Q^(i+1) = W_Q Q^(i).
  RVector weight_matrix_last;
  /// Largest relative mismatch of Q^(i+1) against W_Q^(i) Q^(i) over all iterations.
  double max_link_residual = 0.0;
  /// Some LS power came out non-positive and was clamped.
  bool clamped = false;
};

/// Alternating GED / LS noise covariance estimate starting from diag(scm).
/// Runs exactly max_iter updates; non-positive powers are clamped to
/// 1e-8 trace(scm)/M.
NoiseCovEstimate estimate_noise_cov(const CMatrix& scm, int num_sources, int max_iter = 5);

/// Asymptotic variance of each LS power for a fixed basis, keeping the N v_m^* term:
/// ([R]_mm / (2 N tau_m^2)) Re{v_m^H R (v_m + N v_m^*)}.
RVector q_asymptotic_variance(const CMatrix& true_r, const NoiseSubspaceBasis& basis, int num_snapshots);

/// Asymptotic variance of each LS power for a fixed basis using the
/// circular-Gaussian pseudo-covariance E{dr_m dr_m^T} = r_m r_m^T / N:
/// ([R]_mm v_m^H R v_m + Re{(v_m^H r_m)^2}) / (2 N tau_m^2).
RVector q_asymptotic_variance_circular(const CMatrix& true_r, const NoiseSubspaceBasis& basis, int num_snapshots);

}  // namespace doalab
