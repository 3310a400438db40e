#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doalab/array_model.hpp"

namespace doalab::testing {

inline RVector powers(std::initializer_list<double> v) {
  RVector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

// Noise powers used in the two-source example scenarios.
inline DiagonalNoiseCovariance q_wnpr20() { return DiagonalNoiseCovariance(powers({6, 2, 0.5, 2.5, 3, 1, 5.5, 10})); }
inline DiagonalNoiseCovariance q_example1() {
  return DiagonalNoiseCovariance(powers({10, 1.2, 3.5, 18, 2, 8.5, 24, 6.5}));
}

inline UlaGeometry ula(int m, double d = 0.5) {
  UlaGeometry g;
  g.num_sensors = m;
  g.spacing_over_wavelength = d;
  return g;
}

inline ArrayScenario scenario(int m, std::vector<double> doas, double power, cplx rho, const DiagonalNoiseCovariance& q,
                              int n) {
  ArrayScenario sc;
  sc.geometry = ula(m);
  sc.sources.doas_deg = std::move(doas);
  sc.sources.source_cov = make_source_cov(static_cast<int>(sc.sources.doas_deg.size()), power, rho);
  sc.sources.num_snapshots = n;
  sc.noise = q;
  sc.validate();
  return sc;
}

inline CMatrix random_complex(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, std::sqrt(0.5));
  CMatrix out(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) out(r, c) = cplx(g(rng), g(rng));
  return out;
}

// X = A S with S colored by P^1/2 and no noise.
inline CMatrix noiseless_data(const UlaGeometry& geom, const std::vector<double>& doas, const CMatrix& p, int n,
                              std::mt19937_64& rng) {
  const CMatrix a = steering_matrix(geom, doas);
  return a * hermitian_sqrt(p) * random_complex(static_cast<Eigen::Index>(doas.size()), n, rng);
}

// Distinct angles in [lo, hi] at least `gap` apart.
inline std::vector<double> random_angles(int count, double lo, double hi, double gap, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(lo, hi);
  for (;;) {
    std::vector<double> out(static_cast<std::size_t>(count));
    for (double& v : out) v = u(rng);
    std::sort(out.begin(), out.end());
    bool ok = true;
    for (std::size_t i = 1; i < out.size(); ++i) ok = ok && out[i] - out[i - 1] >= gap;
    if (ok) return out;
  }
}

inline double max_abs_diff(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  if (a.size() != b.size()) return INFINITY;
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

// Orthonormal basis for the orthogonal complement of span(a).
inline CMatrix complement_basis(const CMatrix& a) {
  Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeFullU);
  return svd.matrixU().rightCols(a.rows() - a.cols());
}

}  // namespace doalab::testing
