#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "doalab/linalg.hpp"

namespace doalab {

/// Uniform linear array: M omni sensors spaced d apart (d given in wavelengths).
struct UlaGeometry {
  int num_sensors = 0;
  double spacing_over_wavelength = 0.5;

  /// Throws DomainError unless M >= 2 and 0 < d/lambda <= 0.5.
  void validate() const;
};

/// Diagonal noise covariance Q = diag(sigma_1^2 ... sigma_M^2), all powers > 0.
class DiagonalNoiseCovariance {
 public:
  DiagonalNoiseCovariance() = default;
  explicit DiagonalNoiseCovariance(RVector powers);

  static DiagonalNoiseCovariance uniform(int num_sensors, double sigma2);

  const RVector& powers() const { return powers_; }
  Eigen::Index size() const { return powers_.size(); }
  double operator[](Eigen::Index m) const { return powers_(m); }

  /// Worst noise power ratio max/min.
  double wnpr() const { return powers_.maxCoeff() / powers_.minCoeff(); }
  bool is_uniform(double rel_tol = 1e-12) const;

  RVector sqrt_powers() const { return powers_.cwiseSqrt(); }
  RVector inv_sqrt_powers() const { return powers_.cwiseSqrt().cwiseInverse(); }
  RMatrix matrix() const { return powers_.asDiagonal(); }

 private:
  RVector powers_;
};

/// Far-field narrowband sources: DOAs in degrees, source covariance P, snapshot count.
struct SourceConfig {
  std::vector<double> doas_deg;
  CMatrix source_cov;
  int num_snapshots = 1;

  int num_sources() const { return static_cast<int>(doas_deg.size()); }
  /// Common source power: mean of diag(P).
  double mean_power() const;
};

/// Source covariance with common power and a single correlation coefficient.
/// L = 2: sigma_s^2 [[1, rho], [rho*, 1]]. L >= 3: identity-powered with rho
/// between the last two sources only. L = 1 ignores rho.
CMatrix make_source_cov(int num_sources, double power, cplx rho = 0.0);

struct ArrayScenario {
  UlaGeometry geometry;
  SourceConfig sources;
  DiagonalNoiseCovariance noise;

  void validate() const;
};

/// M x N observations with their sample covariance R = X X^H / N.
class SnapshotMatrix {
 public:
  SnapshotMatrix() = default;
  explicit SnapshotMatrix(CMatrix data);

  const CMatrix& data() const { return data_; }
  const CMatrix& scm() const { return scm_; }
  int num_sensors() const { return static_cast<int>(data_.rows()); }
  int num_snapshots() const { return static_cast<int>(data_.cols()); }

 private:
  CMatrix data_;
  CMatrix scm_;
};

/// a(theta): entry m is exp(-j 2 pi (d/lambda) sin(theta) m), m = 0..M-1.
CVector steering_vector(const UlaGeometry& geom, double theta_deg);

/// Same as steering_vector without the |theta| < 90 check; used for grid
/// scans that include the endpoints and for finite differences.
CVector steering_vector_unchecked(const UlaGeometry& geom, double theta_rad);

/// A(theta) = [a(theta_1) ... a(theta_L)]; duplicate angles are rejected.
CMatrix steering_matrix(const UlaGeometry& geom, std::span<const double> doas_deg);

/// R = A P A^H + Q.
CMatrix analytic_covariance(const ArrayScenario& scenario);

/// X = A S + N with circular complex Gaussian S ~ CN(0, P), N ~ CN(0, Q).
/// Bit-identical output for identical (scenario, seed).
SnapshotMatrix synthesize(const ArrayScenario& scenario, std::uint64_t seed);

/// SNR = (sigma_s^2 / M) sum_m 1/sigma_m^2, in dB. Reduces to sigma_s^2/sigma^2
/// for uniform noise.
double snr_db(const ArrayScenario& scenario);

/// Common source power giving the requested SNR for the noise powers q.
double source_power_for_snr(double snr_db, const DiagonalNoiseCovariance& q);

/// Hermitian PSD square root (negative eigenvalues from rounding clamped to 0).
CMatrix hermitian_sqrt(const CMatrix& p);

}  // namespace doalab
