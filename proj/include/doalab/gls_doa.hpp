#pragma once

#include <complex>
#include <vector>

#include "doalab/array_model.hpp"

namespace doalab {

enum class SubspaceFlavor { forward, fba };

/// Top-L left singular vectors/values of whitened data (forward or FBA).
struct SignalSubspace {
  CMatrix left_vectors;   // M x L, orthonormal
  RVector singular_values;  // L, descending
  SubspaceFlavor flavor = SubspaceFlavor::forward;
  bool rank_deficient = false;
};

/// Selected DFT-domain equations for one cardinality |I|.
///
/// Rows of the DFT-domain quantities are indexed by the DFT exponent
/// r = 0..M-1, i.e. row r of W_D, W_a and Wbar all use W_M^r = exp(-j 2 pi r / M).
/// The rational expansion's bins k = 1..M therefore map to row k mod M.
struct DftSystem {
  int num_sensors = 0;
  int num_sources = 0;
  /// Selected DFT rows, sorted ascending.
  std::vector<int> index_set;
  CMatrix dft_matrix;  // M x M, W_D
  CMatrix wa;          // M x L, row r = [W^r, W^2r, ..., W^Lr]
  CMatrix wbar;        // M x L, row r = [1, W^r, ..., W^(L-1)r]
  CMatrix null_basis;  // |I| x (|I|-L), B with B^H Z Wbar = 0, B^H B = I

  int cardinality() const { return static_cast<int>(index_set.size()); }
  /// |I| x M 0/1 row picker Z_I.
  RMatrix selection() const;
  /// Z_I applied to a DFT-domain vector or matrix.
  CMatrix select_rows(const CMatrix& m) const;
};

/// Linear system H a = h stacked over the L subspace columns.
struct LinearSystem {
  CMatrix lhs;   // L(|I|-L) x L
  CVector rhs;   // L(|I|-L)
};

struct PolynomialCoefficients {
  /// a_1..a_L of gamma^L + sum_l a_l gamma^(L-l).
  CVector a;
  /// a^(0) (plain LS) followed by every GLS iterate.
  std::vector<CVector> iterate_history;
  bool pinv_fallback = false;
  bool regularized = false;
};

struct DoaCandidates {
  std::vector<double> angles_deg;  // ascending
  std::vector<cplx> roots;         // in the same order as angles_deg
  int run_tag = 0;                 // |I| used
  bool clamped = false;            // a root mapped outside the visible region
};

/// Everything one GLS run produces; used by variance predictors.
struct GlsRun {
  SignalSubspace subspace;
  DftSystem system;
  LinearSystem equations;
  RVector q_half;  // diagonal of Q^1/2 (or Qtilde^1/2 for FBA)
  PolynomialCoefficients coefficients;
  CMatrix weight;  // GLS weight at the final coefficients
  DoaCandidates candidates;
};

/// Xbar = Q^-1/2 X.
CMatrix prewhiten(const CMatrix& x, const DiagonalNoiseCovariance& q_hat);

SignalSubspace signal_subspace(const CMatrix& xbar, int num_sources,
                               SubspaceFlavor flavor = SubspaceFlavor::forward);

/// M-point DFT matrix, entry (r, c) = exp(-j 2 pi r c / M).
CMatrix dft_matrix(int num_sensors);

/// Picks the |I| = card largest-magnitude bins of ubar1 (ties to the lower
/// index) and builds the selection, Vandermonde blocks and null basis.
DftSystem build_dft_system(const UlaGeometry& geom, int num_sources, int card, const CVector& ubar1);

/// H_p = B^H diag(Z ubar_p) Z W_a, h_p = -B^H Z ubar_p, ubar_p = W_D u_tilde_p.
LinearSystem assemble_system(const DftSystem& sys, const CMatrix& u_tilde);

/// C(a) = B^H (I + diag(Z W_a a)) Z W_D diag(q_half).
CMatrix residual_map(const DftSystem& sys, const CVector& a, const RVector& q_half);

/// W = Sigma_s^2 kron (C C^H)^-1. A ridge of 1e-10 trace(CC^H)/dim is added
/// when C C^H is numerically singular; *regularized reports it.
CMatrix gls_weight(const DftSystem& sys, const SignalSubspace& subspace, const CVector& a, const RVector& q_half,
                   bool* regularized = nullptr);

/// a^(0) = H^+ h, then max_iter reweighted GLS solves.
PolynomialCoefficients solve_gls(const LinearSystem& eq, const DftSystem& sys, const SignalSubspace& subspace,
                                 const RVector& q_half, int max_iter = 5);

/// Roots of the monic polynomial gamma^L + a_1 gamma^(L-1) + ... + a_L
/// (companion-matrix eigenvalues).
std::vector<cplx> polynomial_roots(const CVector& a);

/// Inverse of polynomial_roots: monic coefficients a_1..a_L of prod (gamma - root).
CVector coefficients_from_roots(const std::vector<cplx>& roots);

/// theta = arcsin(-arg(gamma) / (2 pi d/lambda)), ascending.
DoaCandidates roots_to_doas(const CVector& a, const UlaGeometry& geom, int run_tag = 0);

/// Full forward-only run on raw snapshots with a given noise estimate.
GlsRun run_forward(const CMatrix& x, const DiagonalNoiseCovariance& q_hat, int num_sources, int card,
                   const UlaGeometry& geom, int max_iter = 5);

DoaCandidates estimate_forward(const CMatrix& x, const DiagonalNoiseCovariance& q_hat, int num_sources, int card,
                               const UlaGeometry& geom);

struct FbaEmbedding {
  CMatrix xbar;  // M x 2N
  DiagonalNoiseCovariance q_tilde;
};

/// Qtilde = Q + J Q J, Xbar_FB = [Qtilde^-1/2 X, J Qtilde^-1/2 X^* J_N].
FbaEmbedding fba_embed(const CMatrix& x, const DiagonalNoiseCovariance& q_hat);

GlsRun run_fba(const CMatrix& x, const DiagonalNoiseCovariance& q_hat, int num_sources, int card,
               const UlaGeometry& geom, int max_iter = 5);

DoaCandidates estimate_fba(const CMatrix& x, const DiagonalNoiseCovariance& q_hat, int num_sources, int card,
                           const UlaGeometry& geom);

/// High-SNR DOA variance (rad^2) for each root of a, in ascending-angle order:
/// 1/2 (1 / (2 pi (d/lambda) cos theta_l))^2 gamma_l^T (H^H W H)^-1 gamma_l^* / |phi_l|^2.
/// For FBA pass the FBA system matrix and weight.
RVector doa_asymptotic_variance(const CVector& a, const CMatrix& weight, const CMatrix& lhs, const UlaGeometry& geom);

}  // namespace doalab
