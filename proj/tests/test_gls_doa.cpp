#include <doctest.h>

#include <cmath>

#include "doalab/gls_doa.hpp"
#include "support.hpp"

using namespace doalab;
using namespace doalab::testing;

namespace {

double phase_step(double theta_deg, double d = 0.5) { return -2.0 * M_PI * d * std::sin(theta_deg * M_PI / 180.0); }

CVector exact_coefficients(const std::vector<double>& doas, double d = 0.5) {
  std::vector<cplx> roots;
  for (double th : doas) roots.push_back(std::polar(1.0, phase_step(th, d)));
  return coefficients_from_roots(roots);
}

// Smallest cosine of the principal angles between two column spaces.
double min_principal_cosine(const CMatrix& a, const CMatrix& b) {
  const CMatrix qa = Eigen::HouseholderQR<CMatrix>(a).householderQ() * CMatrix::Identity(a.rows(), a.cols());
  const CMatrix qb = Eigen::HouseholderQR<CMatrix>(b).householderQ() * CMatrix::Identity(b.rows(), b.cols());
  Eigen::JacobiSVD<CMatrix> svd(qa.adjoint() * qb);
  return svd.singularValues().minCoeff();
}

}  // namespace

TEST_CASE("prewhitening scales rows") {
  std::mt19937_64 rng(2);
  const CMatrix x = random_complex(8, 12, rng);
  CHECK((prewhiten(x, DiagonalNoiseCovariance::uniform(8, 1.0)) - x).norm() == 0.0);

  CMatrix twos = random_complex(3, 5, rng);
  twos.row(0).setConstant(2.0);
  const CMatrix w = prewhiten(twos, DiagonalNoiseCovariance(powers({4, 1, 1})));
  CHECK((w.row(0).array() - cplx(1.0, 0.0)).abs().maxCoeff() < 1e-15);

  const auto q = q_wnpr20();
  const CMatrix ones = CMatrix::Ones(8, 2);
  const CMatrix wq = prewhiten(ones, q);
  for (int m = 0; m < 8; ++m) CHECK(wq(m, 1).real() == doctest::Approx(1.0 / std::sqrt(q[m])));
}

TEST_CASE("signal subspace") {
  std::mt19937_64 rng(4);
  SUBCASE("rank one") {
    const CVector a = steering_vector(ula(6), 12.0);
    const CMatrix x = a * random_complex(1, 20, rng);
    const SignalSubspace s = signal_subspace(x, 1);
    const cplx overlap = a.normalized().dot(s.left_vectors.col(0));
    CHECK(std::abs(std::abs(overlap) - 1.0) < 1e-12);
  }
  SUBCASE("noiseless whitened data spans the whitened manifold") {
    const auto q = q_wnpr20();
    const std::vector<double> th{-20, 3, 40};
    const CMatrix x = noiseless_data(ula(8), th, make_source_cov(3, 1.0, 0.5), 30, rng);
    const SignalSubspace s = signal_subspace(prewhiten(x, q), 3);
    const CMatrix qa = q.inv_sqrt_powers().cast<cplx>().asDiagonal() * steering_matrix(ula(8), th);
    CHECK(min_principal_cosine(s.left_vectors, qa) >= 1 - 1e-10);
    CHECK((s.left_vectors.adjoint() * s.left_vectors - CMatrix::Identity(3, 3)).norm() < 1e-10);
    CHECK(s.singular_values(0) >= s.singular_values(1));
    CHECK(s.singular_values(1) >= s.singular_values(2));
    CHECK_FALSE(s.rank_deficient);
  }
  SUBCASE("zero padding leaves singular values unchanged") {
    const CMatrix x = random_complex(6, 9, rng);
    CMatrix padded = CMatrix::Zero(6, 14);
    padded.leftCols(9) = x;
    CHECK((signal_subspace(x, 4).singular_values - signal_subspace(padded, 4).singular_values).norm() < 1e-12);
  }
  SUBCASE("rank deficiency is flagged") {
    const CMatrix x = steering_vector(ula(6), 5.0) * random_complex(1, 10, rng);
    CHECK(signal_subspace(x, 2).rank_deficient);
  }
}

TEST_CASE("DFT system construction") {
  std::mt19937_64 rng(8);
  SUBCASE("full selection") {
    const DftSystem sys = build_dft_system(ula(8), 2, 8, random_complex(8, 1, rng));
    const RMatrix z = sys.selection();
    CHECK((z - RMatrix::Identity(8, 8)).norm() == 0.0);
    CHECK(sys.null_basis.cols() == 6);
  }
  SUBCASE("dimension count") {
    const DftSystem sys = build_dft_system(ula(8), 2, 7, random_complex(8, 1, rng));
    CHECK(sys.null_basis.rows() == 7);
    CHECK(sys.null_basis.cols() == 5);
  }
  SUBCASE("largest bins are selected") {
    CVector u(5);
    u << 3.0, 0.1, 5.0, 0.2, 4.0;
    const DftSystem sys = build_dft_system(ula(5), 1, 3, u);
    CHECK(sys.index_set == std::vector<int>{0, 2, 4});
  }
  SUBCASE("ties go to the lower index") {
    const DftSystem sys = build_dft_system(ula(6), 1, 3, CVector::Ones(6));
    CHECK(sys.index_set == std::vector<int>{0, 1, 2});
  }
  SUBCASE("null basis invariants for random sizes") {
    for (int rep = 0; rep < 100; ++rep) {
      const int m = 3 + rep % 10;
      const int l = 1 + rep % (m - 1);
      const int card = l + 1 + (rep / 3) % (m - l);
      const DftSystem sys = build_dft_system(ula(m), l, card, random_complex(m, 1, rng));
      const CMatrix zw = sys.select_rows(sys.wbar);
      CHECK((sys.null_basis.adjoint() * zw).norm() < 1e-12);
      CHECK((sys.null_basis.adjoint() * sys.null_basis - CMatrix::Identity(card - l, card - l)).norm() < 1e-10);
      const RMatrix z = sys.selection();
      CHECK((z.rowwise().sum().array() == 1.0).all());
    }
  }
  SUBCASE("cardinality must exceed L") {
    CHECK_THROWS_AS(build_dft_system(ula(8), 2, 2, CVector::Ones(8)), DomainError);
    CHECK_THROWS_AS(build_dft_system(ula(8), 2, 9, CVector::Ones(8)), DomainError);
  }
}

TEST_CASE("system identity H a* = h on exact subspaces") {
  std::mt19937_64 rng(1234);
  double worst = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const int m = 5 + rep % 8;
    const int l = 1 + rep % std::min(4, m - 2);
    const int card = l + 1 + rep % (m - l);
    const auto th = random_angles(l, -75, 75, 2.0, rng);
    const CMatrix u_tilde = steering_matrix(ula(m), th) * random_complex(l, l, rng);
    const CVector ubar1 = dft_matrix(m) * u_tilde.col(0);
    const DftSystem sys = build_dft_system(ula(m), l, card, ubar1);
    const LinearSystem eq = assemble_system(sys, u_tilde);
    const CVector a = exact_coefficients(th);
    worst = std::max(worst, (eq.lhs * a - eq.rhs).norm() / std::max(1.0, eq.rhs.norm()));
  }
  CHECK(worst < 1e-9);

  SUBCASE("single broadside source") {
    const CMatrix u = CMatrix::Ones(6, 1) * cplx(0.3, -0.8);
    const DftSystem sys = build_dft_system(ula(6), 1, 6, dft_matrix(6) * u);
    const LinearSystem eq = assemble_system(sys, u);
    CVector a(1);
    a(0) = -1.0;
    CHECK((eq.lhs * a - eq.rhs).norm() < 1e-12);
  }
}

TEST_CASE("residual identity H a - h = stacked C(a) u_p") {
  std::mt19937_64 rng(55);
  const auto q = q_example1();
  const CMatrix u = random_complex(8, 2, rng);  // whitened subspace stand-in
  const CMatrix u_tilde = q.sqrt_powers().cast<cplx>().asDiagonal() * u;
  const DftSystem sys = build_dft_system(ula(8), 2, 7, dft_matrix(8) * u_tilde.col(0));
  const LinearSystem eq = assemble_system(sys, u_tilde);
  const CVector a = random_complex(2, 1, rng);
  const CMatrix c = residual_map(sys, a, q.sqrt_powers());
  CVector stacked(eq.rhs.size());
  for (int p = 0; p < 2; ++p) stacked.segment(p * 5, 5) = c * u.col(p);
  CHECK((eq.lhs * a - eq.rhs - stacked).norm() < 1e-10 * std::max(1.0, stacked.norm()));
}

TEST_CASE("GLS weight") {
  std::mt19937_64 rng(6);
  const auto q = q_wnpr20();
  const CMatrix x = noiseless_data(ula(8), {33, 36}, make_source_cov(2, 1.0), 10, rng) + random_complex(8, 10, rng);
  const SignalSubspace s = signal_subspace(prewhiten(x, q), 2);
  const CMatrix u_tilde = q.sqrt_powers().cast<cplx>().asDiagonal() * s.left_vectors;
  const DftSystem sys = build_dft_system(ula(8), 2, 7, dft_matrix(8) * u_tilde.col(0));
  const CVector a = exact_coefficients({33, 36});

  const CMatrix w = gls_weight(sys, s, a, q.sqrt_powers());
  CHECK((w - w.adjoint()).norm() < 1e-10 * w.norm());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(w);
  CHECK(es.eigenvalues().minCoeff() > -1e-10 * es.eigenvalues().maxCoeff());

  const CMatrix c = residual_map(sys, a, q.sqrt_powers());
  const CMatrix inv = (c * c.adjoint()).inverse();
  for (int p = 0; p < 2; ++p) {
    const double s2 = s.singular_values(p) * s.singular_values(p);
    CHECK((w.block(p * 5, p * 5, 5, 5) - s2 * inv).norm() < 1e-9 * (s2 * inv).norm());
  }
  CHECK(w.block(0, 5, 5, 5).norm() == 0.0);

  bool reg = true;
  const CMatrix w0 = gls_weight(sys, s, CVector::Zero(2), q.sqrt_powers(), &reg);
  CHECK_FALSE(reg);
  CHECK(w0.allFinite());
}

TEST_CASE("GLS solve") {
  std::mt19937_64 rng(10);
  const auto q = q_example1();
  const std::vector<double> th{-2, 7};
  SUBCASE("noiseless data gives exact coefficients at every iterate") {
    const CMatrix x = noiseless_data(ula(8), th, make_source_cov(2, 1.0), 40, rng);
    const GlsRun run = run_forward(x, q, 2, 8, ula(8));
    const CVector a = exact_coefficients(th);
    CHECK(run.coefficients.iterate_history.size() == 6);
    for (const CVector& it : run.coefficients.iterate_history) CHECK((it - a).norm() < 1e-8);
  }
  SUBCASE("iteration zero is ordinary least squares") {
    const CMatrix x = noiseless_data(ula(8), th, make_source_cov(2, 1.0), 40, rng) + random_complex(8, 40, rng);
    const GlsRun run = run_forward(x, q, 2, 7, ula(8), 0);
    const CMatrix& h = run.equations.lhs;
    const CVector ls = (h.adjoint() * h).ldlt().solve(h.adjoint() * run.equations.rhs);
    CHECK((run.coefficients.a - ls).norm() < 1e-10 * ls.norm());
  }
  SUBCASE("final iterate satisfies the weighted normal equations") {
    const CMatrix x = noiseless_data(ula(8), th, make_source_cov(2, 3.0), 40, rng) + random_complex(8, 40, rng);
    const GlsRun run = run_forward(x, q, 2, 7, ula(8));
    const auto& hist = run.coefficients.iterate_history;
    const CMatrix w = gls_weight(run.system, run.subspace, hist[hist.size() - 2], run.q_half);
    const CMatrix& h = run.equations.lhs;
    const CVector grad = h.adjoint() * w * (h * run.coefficients.a - run.equations.rhs);
    CHECK(grad.norm() < 1e-8 * (h.adjoint() * w * run.equations.rhs).norm());
  }
  SUBCASE("equation residual shrinks with SNR") {
    const CVector a = exact_coefficients(th);
    double prev = INFINITY;
    for (double snr : {0.0, 10.0, 20.0, 30.0}) {
      double acc = 0.0;
      for (int t = 0; t < 20; ++t) {
        auto sc = scenario(8, th, source_power_for_snr(snr, q), 0.0, q, 40);
        const SnapshotMatrix xs = synthesize(sc, 700 + t);
        const GlsRun run = run_forward(xs.data(), q, 2, 8, ula(8));
        acc += (run.equations.lhs * a - run.equations.rhs).norm();
      }
      CHECK(acc > 0.0);
      CHECK(acc < prev);
      prev = acc;
    }
  }
}

TEST_CASE("roots and angles") {
  SUBCASE("L = 1 root at one") {
    CVector a(1);
    a(0) = -1.0;
    const DoaCandidates c = roots_to_doas(a, ula(4));
    CHECK(std::abs(c.angles_deg[0]) < 1e-12);
  }
  SUBCASE("30 degrees") {
    const DoaCandidates c = roots_to_doas(exact_coefficients({30.0}), ula(4));
    CHECK(std::abs(c.angles_deg[0] - 30.0) < 1e-10);
  }
  SUBCASE("random three-source round trip") {
    std::mt19937_64 rng(31);
    for (int rep = 0; rep < 50; ++rep) {
      const auto th = random_angles(3, -80, 80, 1.0, rng);
      const DoaCandidates c = roots_to_doas(exact_coefficients(th), ula(8));
      CHECK(max_abs_diff(c.angles_deg, th) < 1e-8);
      CHECK_FALSE(c.clamped);
    }
  }
  SUBCASE("coefficients to roots to coefficients") {
    std::mt19937_64 rng(32);
    for (int rep = 0; rep < 50; ++rep) {
      const CVector a = random_complex(1 + rep % 5, 1, rng);
      const CVector back = coefficients_from_roots(polynomial_roots(a));
      CHECK((back - a).norm() < 1e-10 * std::max(1.0, a.norm()));
    }
  }
  SUBCASE("roots are not projected onto the unit circle") {
    const DoaCandidates c = roots_to_doas(coefficients_from_roots({std::polar(0.5, phase_step(20.0))}), ula(4));
    CHECK(std::abs(c.angles_deg[0] - 20.0) < 1e-10);
    CHECK(std::abs(std::abs(c.roots[0]) - 0.5) < 1e-12);
  }
  SUBCASE("invisible root is clamped and flagged") {
    const DoaCandidates c = roots_to_doas(coefficients_from_roots({std::polar(1.0, 0.9 * M_PI)}), ula(4, 0.25));
    CHECK(c.clamped);
    CHECK(c.angles_deg[0] == doctest::Approx(-90.0));
  }
}

TEST_CASE("noiseless exactness across sizes") {
  std::mt19937_64 rng(77);
  for (int m = 4; m <= 12; m += 2) {
    for (int l = 1; l <= std::min(3, m - 2); ++l) {
      for (int card = l + 1; card <= m; ++card) {
        for (double rho : {0.0, 0.9}) {
          const auto th = random_angles(l, -70, 70, 2.0, rng);
          RVector qp(m);
          std::uniform_real_distribution<double> u(0.2, 8.0);
          for (int i = 0; i < m; ++i) qp(i) = u(rng);
          const DiagonalNoiseCovariance q(qp);
          const CMatrix x = noiseless_data(ula(m), th, make_source_cov(l, 1.0, rho), 3 * m, rng);
          CHECK(max_abs_diff(estimate_forward(x, q, l, card, ula(m)).angles_deg, th) < 1e-6);
          CHECK(max_abs_diff(estimate_fba(x, q, l, card, ula(m)).angles_deg, th) < 1e-6);
        }
      }
    }
  }
}

TEST_CASE("whitening with a scaled identity changes nothing") {
  std::mt19937_64 rng(5);
  const auto sc = scenario(8, {-10, 25}, 2.0, 0.0, DiagonalNoiseCovariance::uniform(8, 1.0), 30);
  const SnapshotMatrix x = synthesize(sc, 3);
  const auto ref = estimate_forward(x.data(), DiagonalNoiseCovariance::uniform(8, 1.0), 2, 8, ula(8));
  const auto scaled = estimate_forward(x.data(), DiagonalNoiseCovariance::uniform(8, 6.5), 2, 8, ula(8));
  CHECK(max_abs_diff(ref.angles_deg, scaled.angles_deg) < 1e-9);
}

TEST_CASE("forward-backward embedding") {
  std::mt19937_64 rng(13);
  SUBCASE("tilde Q arithmetic") {
    const FbaEmbedding fb = fba_embed(random_complex(8, 4, rng), q_wnpr20());
    const RVector expect = powers({16, 7.5, 1.5, 5.5, 5.5, 1.5, 7.5, 16});
    CHECK((fb.q_tilde.powers() - expect).norm() < 1e-12);
    CHECK(fb.xbar.cols() == 8);
  }
  SUBCASE("uniform noise doubles") {
    const FbaEmbedding fb = fba_embed(random_complex(5, 4, rng), DiagonalNoiseCovariance::uniform(5, 1.5));
    CHECK((fb.q_tilde.powers().array() - 3.0).abs().maxCoeff() < 1e-15);
  }
  SUBCASE("tilde Q is palindromic and the covariance centro-Hermitian") {
    for (int rep = 0; rep < 20; ++rep) {
      const int m = 3 + rep % 8;
      RVector qp(m);
      std::uniform_real_distribution<double> u(0.1, 9.0);
      for (int i = 0; i < m; ++i) qp(i) = u(rng);
      const FbaEmbedding fb = fba_embed(random_complex(m, 7, rng), DiagonalNoiseCovariance(qp));
      CHECK((fb.q_tilde.powers() - fb.q_tilde.powers().reverse()).norm() == 0.0);
      const CMatrix r = fb.xbar * fb.xbar.adjoint() / 14.0;
      const CMatrix j = exchange_matrix(m).cast<cplx>();
      CHECK((r - j * r.conjugate() * j).norm() < 1e-12 * r.norm());
    }
  }
  SUBCASE("the backward half is J conj(X) J_N") {
    const CMatrix x = random_complex(4, 3, rng);
    const FbaEmbedding fb = fba_embed(x, DiagonalNoiseCovariance::uniform(4, 0.5));
    const CMatrix f = x / std::sqrt(1.0);
    const CMatrix expect = exchange_matrix(4).cast<cplx>() * f.conjugate() * exchange_matrix(3).cast<cplx>();
    CHECK((fb.xbar.rightCols(3) - expect).norm() < 1e-14);
  }
}

TEST_CASE("coherent pair: forward-backward averaging restores rank") {
  std::mt19937_64 rng(21);
  const std::vector<double> th{-8, 14};
  const auto q = q_example1();
  const CMatrix x = noiseless_data(ula(8), th, make_source_cov(2, 1.0, 1.0), 20, rng);
  CHECK(signal_subspace(prewhiten(x, q), 2).rank_deficient);
  const GlsRun fb = run_fba(x, q, 2, 8, ula(8));
  CHECK_FALSE(fb.subspace.rank_deficient);
  CHECK(max_abs_diff(fb.candidates.angles_deg, th) < 1e-6);

  // P tilde = (P + D P* D^H) / 2 is rank 2 for these angles
  const CMatrix a = steering_matrix(ula(8), th);
  CMatrix d = CMatrix::Zero(2, 2);
  for (int l = 0; l < 2; ++l) d(l, l) = std::conj(a(7, l));  // J a* = a * conj(phase^(M-1))
  const CMatrix p = make_source_cov(2, 1.0, 1.0);
  const CMatrix pt = 0.5 * (p + d * p.conjugate() * d.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(pt);
  CHECK(es.eigenvalues()(0) > 1e-3);
}

TEST_CASE("forward and FBA agree at high SNR for uncorrelated sources") {
  const auto q = q_example1();
  auto sc = scenario(8, {-2, 7}, source_power_for_snr(30.0, q), 0.0, q, 40);
  double sf = 0, sb = 0;
  for (int t = 0; t < 200; ++t) {
    const SnapshotMatrix x = synthesize(sc, 4000 + t);
    const auto f = estimate_forward(x.data(), q, 2, 8, sc.geometry).angles_deg;
    const auto b = estimate_fba(x.data(), q, 2, 8, sc.geometry).angles_deg;
    for (int l = 0; l < 2; ++l) {
      sf += std::pow(f[l] - sc.sources.doas_deg[l], 2);
      sb += std::pow(b[l] - sc.sources.doas_deg[l], 2);
    }
  }
  const double ratio = std::sqrt(sf / sb);
  CHECK(ratio > 0.7);
  CHECK(ratio < 1.4);
}

TEST_CASE("first-order perturbation of the signal subspace") {
  std::mt19937_64 rng(99);
  const auto q = q_example1();
  const CMatrix x0 = prewhiten(noiseless_data(ula(8), {-2, 7}, make_source_cov(2, 1.0), 40, rng), q);
  Eigen::JacobiSVD<CMatrix> svd(x0, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const CMatrix u = svd.matrixU().leftCols(2);
  const CMatrix v = svd.matrixV().leftCols(2);
  const RVector sig = svd.singularValues().head(2);
  const double scale = sig(1) / std::sqrt(40.0) * 1e-2;  // about 40 dB below the weaker source
  const CMatrix nbar = scale * random_complex(8, 40, rng);
  const CMatrix perp = CMatrix::Identity(8, 8) - u * u.adjoint();
  const CMatrix predicted = perp * nbar * v * sig.cwiseInverse().cast<cplx>().asDiagonal();
  const SignalSubspace s = signal_subspace(x0 + nbar, 2);
  CMatrix du = s.left_vectors;
  for (int p = 0; p < 2; ++p) {
    const cplx ph = u.col(p).dot(du.col(p));
    du.col(p) *= std::conj(ph) / std::abs(ph);
  }
  du -= u;
  CHECK((perp * du - predicted).norm() < 0.05 * predicted.norm());
}

TEST_CASE("DOA variance predictor") {
  std::mt19937_64 rng(3);
  const CMatrix h = random_complex(10, 1, rng);
  const CMatrix w = CMatrix::Identity(10, 10);
  SUBCASE("cosine factor") {
    const RVector v0 = doa_asymptotic_variance(exact_coefficients({0.0}), w, h, ula(8));
    const RVector v60 = doa_asymptotic_variance(exact_coefficients({60.0}), w, h, ula(8));
    CHECK(v60(0) / v0(0) == doctest::Approx(4.0).epsilon(1e-9));
  }
  SUBCASE("inverse scaling with the weight") {
    const CVector a = exact_coefficients({-5.0, 20.0});
    const CMatrix h2 = random_complex(10, 2, rng);
    const RVector v1 = doa_asymptotic_variance(a, w, h2, ula(8));
    const RVector v100 = doa_asymptotic_variance(a, 100.0 * w, h2, ula(8));
    CHECK((v1 - 100.0 * v100).norm() < 1e-10 * v1.norm());
  }
  SUBCASE("repeated root is rejected") {
    const CVector a = coefficients_from_roots({cplx(1, 0), cplx(1, 0)});
    CHECK_THROWS_AS(doa_asymptotic_variance(a, w, random_complex(10, 2, rng), ula(8)), NumericalError);
  }
}
