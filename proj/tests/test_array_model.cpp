#include <doctest.h>

#include <cmath>
#include <complex>

#include "doalab/array_model.hpp"
#include "support.hpp"

using namespace doalab;
using namespace doalab::testing;

TEST_CASE("steering vector at broadside is all ones") {
  const CVector a = steering_vector(ula(4), 0.0);
  for (int m = 0; m < 4; ++m) CHECK(std::abs(a(m) - cplx(1, 0)) < 1e-15);
}

TEST_CASE("steering vector at 30 deg steps by -pi/2") {
  const CVector a = steering_vector(ula(4), 30.0);
  const cplx expect[] = {{1, 0}, {0, -1}, {-1, 0}, {0, 1}};
  for (int m = 0; m < 4; ++m) CHECK(std::abs(a(m) - expect[m]) < 1e-12);
}

TEST_CASE("steering vector matches per-entry complex exponentials") {
  const double th = 7.0 * M_PI / 180.0;
  const CVector a = steering_vector(ula(8), 7.0);
  for (int m = 0; m < 8; ++m) {
    const cplx ref = std::polar(1.0, -M_PI * std::sin(th) * m);
    CHECK(std::abs(a(m) - ref) < 1e-13);
  }
}

TEST_CASE("steering entries have unit modulus over the visible range") {
  for (double th = -89.5; th < 90.0; th += 0.5) {
    const CVector a = steering_vector(ula(11, 0.37), th);
    CHECK((a.cwiseAbs().array() - 1.0).abs().maxCoeff() < 1e-13);
  }
}

TEST_CASE("steering vector rejects angles outside (-90, 90)") {
  CHECK_THROWS_AS(steering_vector(ula(4), 90.0), DomainError);
  CHECK_THROWS_AS(steering_vector(ula(4), -95.0), DomainError);
}

TEST_CASE("geometry validation") {
  CHECK_THROWS_AS(ula(1).validate(), DomainError);
  CHECK_THROWS_AS(ula(4, 0.6).validate(), DomainError);
  CHECK_THROWS_AS(ula(4, 0.0).validate(), DomainError);
  CHECK_NOTHROW(ula(2, 0.5).validate());
}

TEST_CASE("steering matrix") {
  SUBCASE("single broadside column") {
    const std::vector<double> th{0.0};
    const CMatrix a = steering_matrix(ula(5), th);
    CHECK(a.cols() == 1);
    CHECK((a - CMatrix::Ones(5, 1)).norm() < 1e-15);
  }
  SUBCASE("two close sources are full rank") {
    const std::vector<double> th{-2.0, 7.0};
    const CMatrix a = steering_matrix(ula(8), th);
    CHECK(a.rows() == 8);
    Eigen::JacobiSVD<CMatrix> svd(a);
    CHECK(svd.singularValues()(1) > 1e-3);
  }
  SUBCASE("duplicate angles") {
    const std::vector<double> th{10.0, 10.0};
    CHECK_THROWS_AS(steering_matrix(ula(8), th), DomainError);
  }
  SUBCASE("smallest singular value positive for random distinct angles") {
    std::mt19937_64 rng(3);
    for (int rep = 0; rep < 50; ++rep) {
      const auto th = random_angles(3, -80, 80, 0.5, rng);
      Eigen::JacobiSVD<CMatrix> svd(steering_matrix(ula(6), th));
      CHECK(svd.singularValues()(2) > 0.0);
    }
  }
}

TEST_CASE("source covariance structure") {
  const CMatrix p2 = make_source_cov(2, 3.0, 0.9);
  CHECK(std::abs(p2(0, 0) - 3.0) < 1e-15);
  CHECK(std::abs(p2(0, 1) - 2.7) < 1e-15);
  CHECK(std::abs(p2(1, 0) - 2.7) < 1e-15);

  const CMatrix p3 = make_source_cov(3, 1.0, cplx(0.0, 0.95));
  CHECK(std::abs(p3(0, 1)) == 0.0);
  CHECK(std::abs(p3(0, 2)) == 0.0);
  CHECK(std::abs(p3(1, 2) - cplx(0.0, 0.95)) < 1e-15);
  CHECK(std::abs(p3(2, 1) - cplx(0.0, -0.95)) < 1e-15);

  CHECK_THROWS_AS(make_source_cov(2, 1.0, 1.2), DomainError);
}

TEST_CASE("noise covariance") {
  const auto q = q_wnpr20();
  CHECK(q.wnpr() == doctest::Approx(20.0));
  CHECK_FALSE(q.is_uniform());
  CHECK(DiagonalNoiseCovariance::uniform(4, 2.0).is_uniform());
  CHECK_THROWS_AS(DiagonalNoiseCovariance(powers({1, 0, 2})), DomainError);
}

TEST_CASE("synthesize is deterministic per seed") {
  const auto sc = scenario(8, {33, 36}, 1.0, 0.0, q_wnpr20(), 10);
  const SnapshotMatrix x1 = synthesize(sc, 42);
  const SnapshotMatrix x2 = synthesize(sc, 42);
  const SnapshotMatrix x3 = synthesize(sc, 43);
  CHECK(x1.num_sensors() == 8);
  CHECK(x1.num_snapshots() == 10);
  CHECK(x1.data() == x2.data());
  CHECK(x1.data() != x3.data());
}

TEST_CASE("sample covariance is X X^H / N and Hermitian PSD") {
  const auto sc = scenario(6, {-20, 15}, 2.0, 0.5, DiagonalNoiseCovariance(powers({1, 2, 3, 1, 2, 3})), 25);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const SnapshotMatrix x = synthesize(sc, seed);
    const CMatrix ref = x.data() * x.data().adjoint() / 25.0;
    CHECK((x.scm() - ref).norm() < 1e-12 * ref.norm());
    CHECK((x.scm() - x.scm().adjoint()).norm() == 0.0);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(x.scm());
    CHECK(es.eigenvalues().minCoeff() > -1e-12 * es.eigenvalues().maxCoeff());
  }
}

TEST_CASE("sample covariance converges to A P A^H + Q") {
  const auto sc = scenario(5, {-10, 25}, 3.0, 0.6, DiagonalNoiseCovariance(powers({1, 0.5, 2, 4, 1.5})), 100000);
  const CMatrix r = analytic_covariance(sc);
  const SnapshotMatrix x = synthesize(sc, 7);
  CHECK((x.scm() - r).norm() / r.norm() < 0.02);
}

TEST_CASE("tiny noise and P = I: sample covariance approaches A A^H") {
  auto sc = scenario(6, {-30, 5, 40}, 1.0, 0.0, DiagonalNoiseCovariance::uniform(6, 1e-9), 10000);
  const CMatrix a = steering_matrix(sc.geometry, sc.sources.doas_deg);
  const CMatrix aah = a * a.adjoint();
  const SnapshotMatrix x = synthesize(sc, 11);
  CHECK((x.scm() - aah).norm() / aah.norm() < 0.05);
}

TEST_CASE("SNR definition") {
  auto sc = scenario(8, {0.0}, 1.0, 0.0, DiagonalNoiseCovariance::uniform(8, 1.0), 10);
  CHECK(std::abs(snr_db(sc)) < 1e-12);
  sc.sources.source_cov = make_source_cov(1, 10.0);
  CHECK(snr_db(sc) == doctest::Approx(10.0));

  sc.noise = q_wnpr20();
  sc.sources.source_cov = make_source_cov(1, 1.0);
  double inv = 0.0;
  for (double s : {6.0, 2.0, 0.5, 2.5, 3.0, 1.0, 5.5, 10.0}) inv += 1.0 / s;
  CHECK(snr_db(sc) == doctest::Approx(10.0 * std::log10(inv / 8.0)));

  const double p = source_power_for_snr(15.0, q_wnpr20());
  sc.sources.source_cov = make_source_cov(1, p);
  CHECK(snr_db(sc) == doctest::Approx(15.0));
}

TEST_CASE("scenario validation") {
  auto sc = scenario(4, {10, 20}, 1.0, 0.0, DiagonalNoiseCovariance::uniform(4, 1.0), 5);
  sc.sources.doas_deg = {10, 20, 30, 40};
  sc.sources.source_cov = make_source_cov(4, 1.0);
  CHECK_THROWS_AS(sc.validate(), DomainError);  // L must be below M
}
