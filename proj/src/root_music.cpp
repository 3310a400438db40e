#include "doalab/root_music.hpp"

#include <algorithm>
#include <cmath>

#include "doalab/gls_doa.hpp"

namespace doalab {

CVector root_music_polynomial(const CMatrix& c) {
  const Eigen::Index m = c.rows();
  CVector coeffs = CVector::Zero(2 * m - 1);
  for (Eigen::Index r = 0; r < m; ++r) {
    for (Eigen::Index col = 0; col < m; ++col) coeffs(m - 1 - col + r) += c(r, col);
  }
  return coeffs;
}

RootMusicResult root_music(const CMatrix& scm, const std::optional<DiagonalNoiseCovariance>& q_hat, int num_sources,
                           const UlaGeometry& geom) {
  geom.validate();
  const int m = geom.num_sensors;
  if (scm.rows() != m || scm.cols() != m) throw DomainError("covariance must be M x M");
  if (num_sources < 1 || num_sources >= m) throw DomainError("need 1 <= L < M");

  RVector w = RVector::Ones(m);
  if (q_hat) {
    if (q_hat->size() != m) throw DomainError("noise covariance size mismatch");
    w = q_hat->inv_sqrt_powers();
  }
  CMatrix rw = w.cast<cplx>().asDiagonal() * scm * w.cast<cplx>().asDiagonal();
  rw = (0.5 * (rw + rw.adjoint())).eval();
  Eigen::SelfAdjointEigenSolver<CMatrix> es(rw);
  const CMatrix en = w.cast<cplx>().asDiagonal() * es.eigenvectors().leftCols(m - num_sources);
  const CVector poly = root_music_polynomial(en * en.adjoint());

  // drop vanishing leading coefficients, then make monic
  Eigen::Index lead = 0;
  const double scale = poly.cwiseAbs().maxCoeff();
  while (lead + 1 < poly.size() && std::abs(poly(lead)) <= 1e-14 * scale) ++lead;
  const CVector tail = poly.segment(lead + 1, poly.size() - lead - 1) / poly(lead);

  RootMusicResult out;
  out.roots = polynomial_roots(tail);
  std::vector<cplx> inside;
  std::vector<cplx> outside;
  for (const cplx& z : out.roots) (std::abs(z) <= 1.0 + 1e-12 ? inside : outside).push_back(z);
  std::stable_sort(inside.begin(), inside.end(),
                   [](const cplx& a, const cplx& b) { return 1.0 - std::abs(a) < 1.0 - std::abs(b); });
  std::vector<cplx> chosen(inside.begin(), inside.begin() + std::min<std::size_t>(inside.size(), num_sources));
  if (static_cast<int>(chosen.size()) < num_sources) {
    out.padded = true;
    std::stable_sort(outside.begin(), outside.end(),
                     [](const cplx& a, const cplx& b) { return std::abs(a) > std::abs(b); });
    for (std::size_t i = 0; i < outside.size() && static_cast<int>(chosen.size()) < num_sources; ++i) {
      chosen.push_back(outside[i]);
    }
  }
  for (const cplx& z : chosen) {
    const double s = std::clamp(-std::arg(z) / (2.0 * kPi * geom.spacing_over_wavelength), -1.0, 1.0);
    out.angles_deg.push_back(rad2deg(std::asin(s)));
  }
  std::sort(out.angles_deg.begin(), out.angles_deg.end());
  return out;
}

}  // namespace doalab
