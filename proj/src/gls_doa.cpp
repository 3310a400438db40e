#include "doalab/gls_doa.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace doalab {

namespace {

// Shared tail of the forward and FBA estimators: everything after whitening.
GlsRun run_whitened(const CMatrix& xbar, const RVector& q_half, int num_sources, int card, const UlaGeometry& geom,
                    SubspaceFlavor flavor, int max_iter) {
  geom.validate();
  if (xbar.rows() != geom.num_sensors) throw DomainError("data rows must equal the number of sensors");
  GlsRun run;
  run.q_half = q_half;
  run.subspace = signal_subspace(xbar, num_sources, flavor);
  const CMatrix u_tilde = q_half.cast<cplx>().asDiagonal() * run.subspace.left_vectors;
  const CVector ubar1 = dft_matrix(geom.num_sensors) * u_tilde.col(0);
  run.system = build_dft_system(geom, num_sources, card, ubar1);
  run.equations = assemble_system(run.system, u_tilde);
  run.coefficients = solve_gls(run.equations, run.system, run.subspace, q_half, max_iter);
  bool reg = false;
  run.weight = gls_weight(run.system, run.subspace, run.coefficients.a, q_half, &reg);
  run.candidates = roots_to_doas(run.coefficients.a, geom, card);
  return run;
}

}  // namespace

CMatrix prewhiten(const CMatrix& x, const DiagonalNoiseCovariance& q_hat) {
  if (q_hat.size() != x.rows()) throw DomainError("noise covariance size must match data rows");
  return q_hat.inv_sqrt_powers().cast<cplx>().asDiagonal() * x;
}

SignalSubspace signal_subspace(const CMatrix& xbar, int num_sources, SubspaceFlavor flavor) {
  if (num_sources < 1 || num_sources > std::min(xbar.rows(), xbar.cols())) {
    throw DomainError("signal subspace dimension must satisfy 1 <= L <= min(M, N)");
  }
  Eigen::BDCSVD<CMatrix> svd(xbar, Eigen::ComputeThinU);
  SignalSubspace s;
  s.flavor = flavor;
  s.left_vectors = svd.matrixU().leftCols(num_sources);
  s.singular_values = svd.singularValues().head(num_sources);
  const double top = svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
  s.rank_deficient = !(s.singular_values(num_sources - 1) > 1e-12 * std::max(top, 1e-300));
  return s;
}

CMatrix dft_matrix(int num_sensors) {
  CMatrix w(num_sensors, num_sensors);
  for (int r = 0; r < num_sensors; ++r) {
    for (int c = 0; c < num_sensors; ++c) {
      const int e = (r * c) % num_sensors;
      w(r, c) = std::polar(1.0, -2.0 * kPi * e / num_sensors);
    }
  }
  return w;
}

RMatrix DftSystem::selection() const {
  RMatrix z = RMatrix::Zero(cardinality(), num_sensors);
  for (int i = 0; i < cardinality(); ++i) z(i, index_set[static_cast<std::size_t>(i)]) = 1.0;
  return z;
}

CMatrix DftSystem::select_rows(const CMatrix& m) const {
  CMatrix out(cardinality(), m.cols());
  for (int i = 0; i < cardinality(); ++i) out.row(i) = m.row(index_set[static_cast<std::size_t>(i)]);
  return out;
}

DftSystem build_dft_system(const UlaGeometry& geom, int num_sources, int card, const CVector& ubar1) {
  const int m = geom.num_sensors;
  if (num_sources < 1) throw DomainError("need at least one source");
  if (card <= num_sources || card > m) {
    std::ostringstream os;
    os << "|I| = " << card << " must satisfy L < |I| <= M (L = " << num_sources << ", M = " << m << ")";
    throw DomainError(os.str());
  }
  if (ubar1.size() != m) throw DomainError("DFT vector length must equal M");

  DftSystem sys;
  sys.num_sensors = m;
  sys.num_sources = num_sources;

  std::vector<int> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return std::abs(ubar1(a)) > std::abs(ubar1(b)); });
  sys.index_set.assign(order.begin(), order.begin() + card);
  std::sort(sys.index_set.begin(), sys.index_set.end());

  sys.dft_matrix = dft_matrix(m);
  sys.wa.resize(m, num_sources);
  sys.wbar.resize(m, num_sources);
  for (int r = 0; r < m; ++r) {
    for (int l = 0; l < num_sources; ++l) {
      sys.wa(r, l) = std::polar(1.0, -2.0 * kPi * (((l + 1) * r) % m) / m);
      sys.wbar(r, l) = std::polar(1.0, -2.0 * kPi * ((l * r) % m) / m);
    }
  }

  const CMatrix zw = sys.select_rows(sys.wbar);
  Eigen::JacobiSVD<CMatrix> svd(zw, Eigen::ComputeFullU);
  sys.null_basis = svd.matrixU().rightCols(card - num_sources);
  return sys;
}

LinearSystem assemble_system(const DftSystem& sys, const CMatrix& u_tilde) {
  const int l = sys.num_sources;
  const int rows = sys.cardinality() - l;
  if (u_tilde.rows() != sys.num_sensors || u_tilde.cols() != l) throw DomainError("u_tilde must be M x L");
  const CMatrix ubar = sys.dft_matrix * u_tilde;
  const CMatrix zwa = sys.select_rows(sys.wa);
  const CMatrix bh = sys.null_basis.adjoint();

  LinearSystem eq;
  eq.lhs.resize(static_cast<Eigen::Index>(l) * rows, l);
  eq.rhs.resize(static_cast<Eigen::Index>(l) * rows);
  for (int p = 0; p < l; ++p) {
    const CVector zu = sys.select_rows(ubar.col(p));
    eq.lhs.middleRows(static_cast<Eigen::Index>(p) * rows, rows) = bh * zu.asDiagonal() * zwa;
    eq.rhs.segment(static_cast<Eigen::Index>(p) * rows, rows) = -(bh * zu);
  }
  return eq;
}

CMatrix residual_map(const DftSystem& sys, const CVector& a, const RVector& q_half) {
  if (a.size() != sys.num_sources) throw DomainError("coefficient vector must have length L");
  if (q_half.size() != sys.num_sensors) throw DomainError("Q^1/2 diagonal must have length M");
  const CVector mix = CVector::Ones(sys.cardinality()) + sys.select_rows(sys.wa) * a;
  const CMatrix zwd = sys.select_rows(sys.dft_matrix) * q_half.cast<cplx>().asDiagonal();
  return sys.null_basis.adjoint() * mix.asDiagonal() * zwd;
}

CMatrix gls_weight(const DftSystem& sys, const SignalSubspace& subspace, const CVector& a, const RVector& q_half,
                   bool* regularized) {
  const CMatrix c = residual_map(sys, a, q_half);
  CMatrix cc = c * c.adjoint();
  const Eigen::Index dim = cc.rows();
  bool reg = false;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(cc, Eigen::EigenvaluesOnly);
  const double emax = es.eigenvalues().maxCoeff();
  if (!(es.eigenvalues().minCoeff() > 1e-12 * emax) || !(emax > 0.0)) {
    const double ridge = std::max(1e-10 * cc.trace().real() / static_cast<double>(dim), 1e-300);
    cc.diagonal().array() += ridge;
    reg = true;
  }
  if (regularized) *regularized = reg;
  CMatrix inv = cc.llt().solve(CMatrix::Identity(dim, dim));
  inv = (0.5 * (inv + inv.adjoint())).eval();

  const int l = sys.num_sources;
  CMatrix w = CMatrix::Zero(l * dim, l * dim);
  for (int p = 0; p < l; ++p) {
    const double s2 = subspace.singular_values(p) * subspace.singular_values(p);
    w.block(p * dim, p * dim, dim, dim) = s2 * inv;
  }
  return w;
}

PolynomialCoefficients solve_gls(const LinearSystem& eq, const DftSystem& sys, const SignalSubspace& subspace,
                                 const RVector& q_half, int max_iter) {
  PolynomialCoefficients out;
  Eigen::CompleteOrthogonalDecomposition<CMatrix> cod(eq.lhs);
  if (cod.rank() < eq.lhs.cols()) out.pinv_fallback = true;
  CVector a = cod.solve(eq.rhs);
  out.iterate_history.push_back(a);

  for (int i = 0; i < max_iter; ++i) {
    bool reg = false;
    const CMatrix w = gls_weight(sys, subspace, a, q_half, &reg);
    out.regularized = out.regularized || reg;
    const CMatrix normal = eq.lhs.adjoint() * w * eq.lhs;
    const CVector moment = eq.lhs.adjoint() * (w * eq.rhs);
    Eigen::LDLT<CMatrix> ldlt(normal);
    const bool ok = ldlt.info() == Eigen::Success && ldlt.isPositive() &&
                    ldlt.vectorD().real().minCoeff() > 1e-14 * ldlt.vectorD().real().cwiseAbs().maxCoeff();
    if (ok) {
      a = ldlt.solve(moment);
    } else {
      out.pinv_fallback = true;
      a = pseudo_inverse(normal) * moment;
    }
    out.iterate_history.push_back(a);
  }
  out.a = a;
  return out;
}

std::vector<cplx> polynomial_roots(const CVector& a) {
  const Eigen::Index l = a.size();
  if (l == 0) return {};
  if (l == 1) return {-a(0)};
  CMatrix companion = CMatrix::Zero(l, l);
  companion.row(0) = -a.transpose();
  for (Eigen::Index i = 1; i < l; ++i) companion(i, i - 1) = 1.0;
  Eigen::ComplexEigenSolver<CMatrix> es(companion, false);
  if (es.info() != Eigen::Success) throw NumericalError("companion eigenvalue solve failed");
  std::vector<cplx> roots(static_cast<std::size_t>(l));
  for (Eigen::Index i = 0; i < l; ++i) roots[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
  return roots;
}

CVector coefficients_from_roots(const std::vector<cplx>& roots) {
  // poly holds coefficients of the monic product, highest power first.
  std::vector<cplx> poly{1.0};
  for (const cplx& r : roots) {
    std::vector<cplx> next(poly.size() + 1, 0.0);
    for (std::size_t i = 0; i < poly.size(); ++i) {
      next[i] += poly[i];
      next[i + 1] -= r * poly[i];
    }
    poly = std::move(next);
  }
  CVector a(static_cast<Eigen::Index>(roots.size()));
  for (std::size_t i = 1; i < poly.size(); ++i) a(static_cast<Eigen::Index>(i - 1)) = poly[i];
  return a;
}

DoaCandidates roots_to_doas(const CVector& a, const UlaGeometry& geom, int run_tag) {
  const std::vector<cplx> roots = polynomial_roots(a);
  DoaCandidates out;
  out.run_tag = run_tag;
  std::vector<std::pair<double, cplx>> pairs;
  for (const cplx& g : roots) {
    double s = -std::arg(g) / (2.0 * kPi * geom.spacing_over_wavelength);
    if (std::abs(s) > 1.0) {
      s = std::copysign(1.0, s);
      out.clamped = true;
    }
    pairs.emplace_back(rad2deg(std::asin(s)), g);
  }
  std::stable_sort(pairs.begin(), pairs.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
  for (const auto& [angle, root] : pairs) {
    out.angles_deg.push_back(angle);
    out.roots.push_back(root);
  }
  return out;
}

GlsRun run_forward(const CMatrix& x, const DiagonalNoiseCovariance& q_hat, int num_sources, int card,
                   const UlaGeometry& geom, int max_iter) {
  return run_whitened(prewhiten(x, q_hat), q_hat.sqrt_powers(), num_sources, card, geom, SubspaceFlavor::forward,
                      max_iter);
}

DoaCandidates estimate_forward(const CMatrix& x, const DiagonalNoiseCovariance& q_hat, int num_sources, int card,
                               const UlaGeometry& geom) {
  return run_forward(x, q_hat, num_sources, card, geom).candidates;
}

FbaEmbedding fba_embed(const CMatrix& x, const DiagonalNoiseCovariance& q_hat) {
  const Eigen::Index m = x.rows();
  const Eigen::Index n = x.cols();
  if (q_hat.size() != m) throw DomainError("noise covariance size must match data rows");
  const RVector q = q_hat.powers();
  RVector q_tilde = q + q.reverse();
  FbaEmbedding out{CMatrix(m, 2 * n), DiagonalNoiseCovariance(q_tilde)};
  const CMatrix forward = out.q_tilde.inv_sqrt_powers().cast<cplx>().asDiagonal() * x;
  out.xbar.leftCols(n) = forward;
  out.xbar.rightCols(n) = forward.conjugate().colwise().reverse().rowwise().reverse();
  return out;
}

GlsRun run_fba(const CMatrix& x, const DiagonalNoiseCovariance& q_hat, int num_sources, int card,
               const UlaGeometry& geom, int max_iter) {
  const FbaEmbedding fb = fba_embed(x, q_hat);
  return run_whitened(fb.xbar, fb.q_tilde.sqrt_powers(), num_sources, card, geom, SubspaceFlavor::fba, max_iter);
}

DoaCandidates estimate_fba(const CMatrix& x, const DiagonalNoiseCovariance& q_hat, int num_sources, int card,
                           const UlaGeometry& geom) {
  return run_fba(x, q_hat, num_sources, card, geom).candidates;
}

RVector doa_asymptotic_variance(const CVector& a, const CMatrix& weight, const CMatrix& lhs, const UlaGeometry& geom) {
  const Eigen::Index l = a.size();
  if (lhs.cols() != l || weight.rows() != lhs.rows()) throw DomainError("inconsistent H / W / a dimensions");
  const CMatrix normal = lhs.adjoint() * weight * lhs;
  const CMatrix cov = pseudo_inverse(normal);
  const std::vector<cplx> roots = polynomial_roots(a);

  std::vector<std::pair<double, double>> rows;  // (angle, variance)
  for (const cplx& g : roots) {
    CVector gv(l);
    for (Eigen::Index i = 0; i < l; ++i) gv(i) = std::pow(g, static_cast<double>(l - 1 - i));
    cplx phi = static_cast<double>(l) * std::pow(g, static_cast<double>(l - 1));
    for (Eigen::Index i = 0; i + 1 < l; ++i) {
      phi += static_cast<double>(l - 1 - i) * a(i) * std::pow(g, static_cast<double>(l - 2 - i));
    }
    if (std::abs(phi) < 1e-10) throw NumericalError("repeated polynomial root; DOA variance undefined");
    const double quad = (gv.transpose() * cov * gv.conjugate())(0, 0).real();
    double s = -std::arg(g) / (2.0 * kPi * geom.spacing_over_wavelength);
    s = std::clamp(s, -1.0, 1.0);
    const double theta = std::asin(s);
    const double scale = 1.0 / (2.0 * kPi * geom.spacing_over_wavelength * std::cos(theta));
    rows.emplace_back(rad2deg(theta), 0.5 * scale * scale * quad / std::norm(phi));
  }
  std::stable_sort(rows.begin(), rows.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
  RVector var(l);
  for (Eigen::Index i = 0; i < l; ++i) var(i) = rows[static_cast<std::size_t>(i)].second;
  return var;
}

}  // namespace doalab
