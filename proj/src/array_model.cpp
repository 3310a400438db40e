#include "doalab/array_model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace doalab {

void UlaGeometry::validate() const {
  if (num_sensors < 2) throw DomainError("ULA needs at least 2 sensors");
  if (!(spacing_over_wavelength > 0.0 && spacing_over_wavelength <= 0.5)) {
    throw DomainError("sensor spacing must satisfy 0 < d/lambda <= 0.5");
  }
}

DiagonalNoiseCovariance::DiagonalNoiseCovariance(RVector powers) : powers_(std::move(powers)) {
  if (powers_.size() == 0) throw DomainError("noise covariance needs at least one sensor");
  for (Eigen::Index m = 0; m < powers_.size(); ++m) {
    if (!(powers_(m) > 0.0) || !std::isfinite(powers_(m))) {
      std::ostringstream os;
      os << "noise power " << m << " is not a positive finite number (" << powers_(m) << ")";
      throw DomainError(os.str());
    }
  }
}

DiagonalNoiseCovariance DiagonalNoiseCovariance::uniform(int num_sensors, double sigma2) {
  return DiagonalNoiseCovariance(RVector::Constant(num_sensors, sigma2));
}

bool DiagonalNoiseCovariance::is_uniform(double rel_tol) const {
  return wnpr() - 1.0 <= rel_tol;
}

double SourceConfig::mean_power() const {
  if (source_cov.rows() == 0) return 0.0;
  return source_cov.diagonal().real().mean();
}

CMatrix make_source_cov(int num_sources, double power, cplx rho) {
  if (num_sources < 1) throw DomainError("need at least one source");
  if (!(power > 0.0)) throw DomainError("source power must be positive");
  if (std::abs(rho) > 1.0 + 1e-12) throw DomainError("|rho| must not exceed 1");
  CMatrix p = CMatrix::Identity(num_sources, num_sources);
  if (num_sources >= 2) {
    const int a = num_sources - 2;
    const int b = num_sources - 1;
    p(a, b) = rho;
    p(b, a) = std::conj(rho);
  }
  return power * p;
}

void ArrayScenario::validate() const {
  geometry.validate();
  const int l = sources.num_sources();
  if (l < 1) throw DomainError("scenario has no sources");
  if (l >= geometry.num_sensors) throw DomainError("number of sources must be below the number of sensors");
  if (sources.num_snapshots < 1) throw DomainError("need at least one snapshot");
  if (sources.source_cov.rows() != l || sources.source_cov.cols() != l) {
    throw DomainError("source covariance must be L x L");
  }
  if (!sources.source_cov.isApprox(sources.source_cov.adjoint(), 1e-10)) {
    throw DomainError("source covariance must be Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(sources.source_cov, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-10 * std::max(1.0, es.eigenvalues().maxCoeff())) {
    throw DomainError("source covariance must be positive semidefinite");
  }
  if (noise.size() != geometry.num_sensors) throw DomainError("noise covariance size must equal M");
  // steering_matrix checks range and distinctness
  (void)steering_matrix(geometry, sources.doas_deg);
}

SnapshotMatrix::SnapshotMatrix(CMatrix data) : data_(std::move(data)) {
  if (data_.cols() == 0) throw DomainError("snapshot matrix has no columns");
  const CMatrix raw = (data_ * data_.adjoint()) / static_cast<double>(data_.cols());
  // the blocked product is not bitwise Hermitian
  scm_ = 0.5 * (raw + raw.adjoint());
}

CVector steering_vector_unchecked(const UlaGeometry& geom, double theta_rad) {
  const double step = -2.0 * kPi * geom.spacing_over_wavelength * std::sin(theta_rad);
  CVector a(geom.num_sensors);
  for (int m = 0; m < geom.num_sensors; ++m) a(m) = std::polar(1.0, step * m);
  return a;
}

CVector steering_vector(const UlaGeometry& geom, double theta_deg) {
  if (!(std::abs(theta_deg) < 90.0)) {
    std::ostringstream os;
    os << "DOA " << theta_deg << " deg outside (-90, 90)";
    throw DomainError(os.str());
  }
  return steering_vector_unchecked(geom, deg2rad(theta_deg));
}

CMatrix steering_matrix(const UlaGeometry& geom, std::span<const double> doas_deg) {
  for (std::size_t i = 0; i < doas_deg.size(); ++i) {
    for (std::size_t j = i + 1; j < doas_deg.size(); ++j) {
      if (doas_deg[i] == doas_deg[j]) throw DomainError("duplicate DOA in steering matrix");
    }
  }
  CMatrix a(geom.num_sensors, static_cast<Eigen::Index>(doas_deg.size()));
  for (std::size_t l = 0; l < doas_deg.size(); ++l) {
    a.col(static_cast<Eigen::Index>(l)) = steering_vector(geom, doas_deg[l]);
  }
  return a;
}

CMatrix analytic_covariance(const ArrayScenario& scenario) {
  const CMatrix a = steering_matrix(scenario.geometry, scenario.sources.doas_deg);
  CMatrix r = a * scenario.sources.source_cov * a.adjoint();
  r.diagonal() += scenario.noise.powers().cast<cplx>();
  return r;
}

CMatrix hermitian_sqrt(const CMatrix& p) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(p);
  const RVector ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

SnapshotMatrix synthesize(const ArrayScenario& scenario, std::uint64_t seed) {
  scenario.validate();
  const int m = scenario.geometry.num_sensors;
  const int l = scenario.sources.num_sources();
  const int n = scenario.sources.num_snapshots;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> unit(0.0, std::sqrt(0.5));
  auto draw = [&](Eigen::Index rows, Eigen::Index cols) {
    CMatrix z(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c) {
      for (Eigen::Index r = 0; r < rows; ++r) {
        const double re = unit(rng);
        const double im = unit(rng);
        z(r, c) = cplx(re, im);
      }
    }
    return z;
  };

  const CMatrix s = hermitian_sqrt(scenario.sources.source_cov) * draw(l, n);
  const CMatrix noise = scenario.noise.sqrt_powers().cast<cplx>().asDiagonal() * draw(m, n);
  const CMatrix a = steering_matrix(scenario.geometry, scenario.sources.doas_deg);
  return SnapshotMatrix(a * s + noise);
}

double snr_db(const ArrayScenario& scenario) {
  const double ps = scenario.sources.mean_power();
  const double inv_mean = scenario.noise.powers().cwiseInverse().mean();
  return 10.0 * std::log10(ps * inv_mean);
}

double source_power_for_snr(double snr_db_value, const DiagonalNoiseCovariance& q) {
  return std::pow(10.0, snr_db_value / 10.0) / q.powers().cwiseInverse().mean();
}

}  // namespace doalab
