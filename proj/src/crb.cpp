#include "doalab/crb.hpp"

#include <cmath>
#include <limits>

namespace doalab {

CrbResult numeric_crb(const ArrayScenario& scenario) {
  scenario.validate();
  constexpr double kStep = 1e-5;
  const UlaGeometry& geom = scenario.geometry;
  const int m = geom.num_sensors;
  const int l = scenario.sources.num_sources();
  const CVector w = scenario.noise.inv_sqrt_powers().cast<cplx>();

  CMatrix a(m, l);
  CMatrix d(m, l);
  for (int i = 0; i < l; ++i) {
    const double th = deg2rad(scenario.sources.doas_deg[static_cast<std::size_t>(i)]);
    a.col(i) = w.asDiagonal() * steering_vector_unchecked(geom, th);
    d.col(i) = w.asDiagonal() *
               ((steering_vector_unchecked(geom, th + kStep) - steering_vector_unchecked(geom, th - kStep)) /
                (2.0 * kStep));
  }
  const CMatrix perp = orthogonal_complement_projector(a);
  const CMatrix h = d.adjoint() * perp * d;
  const RMatrix fim =
      2.0 * scenario.sources.num_snapshots * h.cwiseProduct(scenario.sources.source_cov.transpose()).real();

  CrbResult out;
  Eigen::SelfAdjointEigenSolver<RMatrix> es(fim, Eigen::EigenvaluesOnly);
  const double emax = es.eigenvalues().cwiseAbs().maxCoeff();
  if (!(es.eigenvalues().minCoeff() > 1e-12 * emax)) {
    out.singular = true;
    out.variance_deg2 = RVector::Constant(l, std::numeric_limits<double>::quiet_NaN());
    return out;
  }
  const RMatrix inv = fim.ldlt().solve(RMatrix::Identity(l, l));
  const double to_deg2 = rad2deg(1.0) * rad2deg(1.0);
  out.variance_deg2 = inv.diagonal() * to_deg2;
  return out;
}

double crb_db(const CrbResult& crb) {
  if (crb.singular) return std::numeric_limits<double>::quiet_NaN();
  return 10.0 * std::log10(std::sqrt(crb.variance_deg2.mean()));
}

}  // namespace doalab
