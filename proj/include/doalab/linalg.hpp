#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace doalab {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

/// Invalid argument outside an operation's mathematical domain
/// (angle out of range, non-positive power, empty null space, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Numerical breakdown the caller can't recover from by changing a flag
/// (degenerate projection, repeated root, ...).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

constexpr double kPi = std::numbers::pi;

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Exchange matrix J_n (ones on the anti-diagonal).
inline RMatrix exchange_matrix(Eigen::Index n) {
  RMatrix j = RMatrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) j(i, n - 1 - i) = 1.0;
  return j;
}

/// Moore-Penrose pseudo-inverse through a complete orthogonal decomposition.
inline CMatrix pseudo_inverse(const CMatrix& m) {
  return Eigen::CompleteOrthogonalDecomposition<CMatrix>(m).pseudoInverse();
}

/// Orthogonal projector onto the complement of span(a).
inline CMatrix orthogonal_complement_projector(const CMatrix& a) {
  const Eigen::Index m = a.rows();
  return CMatrix::Identity(m, m) - a * pseudo_inverse(a);
}

}  // namespace doalab
