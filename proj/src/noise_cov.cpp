#include "doalab/noise_cov.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace doalab {

namespace {

constexpr double kMinProjectionDiag = 1e-12;

void check_sizes(const CMatrix& scm, int num_sources) {
  if (scm.rows() != scm.cols()) throw DomainError("covariance must be square");
  if (num_sources < 1 || num_sources >= scm.rows()) throw DomainError("need 1 <= L < M");
}

// Projector diagonal tau_m; throws when the noise subspace misses sensor m.
RVector projector_diagonal(const CMatrix& proj) {
  RVector tau = proj.diagonal().real();
  for (Eigen::Index m = 0; m < tau.size(); ++m) {
    if (tau(m) < kMinProjectionDiag) {
      std::ostringstream os;
      os << "degenerate noise-subspace projection at sensor " << m << " (tau = " << tau(m) << ")";
      throw NumericalError(os.str());
    }
  }
  return tau;
}

}  // namespace

NoiseSubspaceBasis ged_noise_subspace(const CMatrix& scm, const DiagonalNoiseCovariance& q, int num_sources) {
  check_sizes(scm, num_sources);
  const Eigen::Index m = scm.rows();
  if (q.size() != m) throw DomainError("noise covariance size mismatch");
  const Eigen::Index k = m - num_sources;

  const RVector w = q.inv_sqrt_powers();
  CMatrix whitened = w.cast<cplx>().asDiagonal() * scm * w.cast<cplx>().asDiagonal();
  whitened = (0.5 * (whitened + whitened.adjoint())).eval();
  // Eigen sorts ascending; ties keep the solver's (index) order.
  Eigen::SelfAdjointEigenSolver<CMatrix> es(whitened);
  if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");

  const CMatrix gen_vectors = w.cast<cplx>().asDiagonal() * es.eigenvectors().leftCols(k);
  Eigen::HouseholderQR<CMatrix> qr(gen_vectors);
  CMatrix basis = qr.householderQ() * CMatrix::Identity(m, k);

  NoiseSubspaceBasis out;
  out.gen_eigenvalues = es.eigenvalues().head(k);
  out.coupling = basis.adjoint() * q.powers().cwiseInverse().cast<cplx>().asDiagonal() * scm * basis;
  out.basis = std::move(basis);
  return out;
}

RVector ls_q_update(const CMatrix& scm, const NoiseSubspaceBasis& basis) {
  const CMatrix proj = basis.basis * basis.basis.adjoint();
  const RVector tau = projector_diagonal(proj);
  RVector q(scm.rows());
  for (Eigen::Index m = 0; m < scm.rows(); ++m) {
    q(m) = proj.col(m).dot(scm.col(m)).real() / tau(m);
  }
  return q;
}

double ls_cost(const CMatrix& scm, const CMatrix& basis, const RVector& q_powers) {
  CMatrix diff = scm;
  diff.diagonal() -= q_powers.cast<cplx>();
  return (diff * basis).squaredNorm();
}

NoiseCovEstimate estimate_noise_cov(const CMatrix& scm, int num_sources, int max_iter) {
  check_sizes(scm, num_sources);
  if (max_iter < 1) throw DomainError("need at least one noise-covariance iteration");
  const Eigen::Index m = scm.rows();
  const double floor = 1e-8 * scm.trace().real() / static_cast<double>(m);
  if (!(floor > 0.0)) throw DomainError("sample covariance must have a positive trace");

  NoiseCovEstimate est;
  RVector q = scm.diagonal().real();
  if ((q.array() <= 0.0).any()) throw DomainError("sample covariance needs a positive diagonal");
  est.per_iteration_q.push_back(q);

  for (int i = 0; i < max_iter; ++i) {
    const DiagonalNoiseCovariance current(q);
    const NoiseSubspaceBasis sub = ged_noise_subspace(scm, current, num_sources);
    RVector next = ls_q_update(scm, sub);

    const CMatrix proj = sub.basis * sub.basis.adjoint();
    const CMatrix weighted = sub.basis * sub.coupling * sub.basis.adjoint();
    RVector link(m);
    for (Eigen::Index k = 0; k < m; ++k) link(k) = weighted(k, k).real() / proj(k, k).real();
    const RVector predicted = link.cwiseProduct(q);
    const double scale = std::max(next.cwiseAbs().maxCoeff(), floor);
    est.max_link_residual = std::max(est.max_link_residual, (next - predicted).cwiseAbs().maxCoeff() / scale);
    est.weight_matrix_last = link;

    for (Eigen::Index k = 0; k < m; ++k) {
      if (!(next(k) > floor)) {
        next(k) = floor;
        est.clamped = true;
      }
    }
    q = next;
    est.per_iteration_q.push_back(q);
    ++est.iterations_run;
  }
  est.q_hat = DiagonalNoiseCovariance(q);
  return est;
}

RVector q_asymptotic_variance(const CMatrix& true_r, const NoiseSubspaceBasis& basis, int num_snapshots) {
  if (num_snapshots < 1) throw DomainError("N must be positive");
  const CMatrix proj = basis.basis * basis.basis.adjoint();
  const RVector tau = projector_diagonal(proj);
  const double n = num_snapshots;
  RVector var(true_r.rows());
  for (Eigen::Index m = 0; m < true_r.rows(); ++m) {
    const CVector v = proj.col(m);
    const CVector inner = v + n * v.conjugate();
    const double quad = v.dot(true_r * inner).real();
    var(m) = true_r(m, m).real() / (2.0 * n * tau(m) * tau(m)) * quad;
  }
  return var;
}

RVector q_asymptotic_variance_circular(const CMatrix& true_r, const NoiseSubspaceBasis& basis, int num_snapshots) {
  if (num_snapshots < 1) throw DomainError("N must be positive");
  const CMatrix proj = basis.basis * basis.basis.adjoint();
  const RVector tau = projector_diagonal(proj);
  const double n = num_snapshots;
  RVector var(true_r.rows());
  for (Eigen::Index m = 0; m < true_r.rows(); ++m) {
    const CVector v = proj.col(m);
    const double quad = v.dot(true_r * v).real();
    const cplx mean = v.dot(true_r.col(m));
    var(m) = (true_r(m, m).real() * quad + (mean * mean).real()) / (2.0 * n * tau(m) * tau(m));
  }
  return var;
}

}  // namespace doalab
