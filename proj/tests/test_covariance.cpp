#include <doctest.h>

#include <cmath>

#include "smelab/covariance.hpp"
#include "smelab/quadratic.hpp"
#include "smelab/sensing.hpp"

using namespace smelab;

namespace {

double factor_error(const CovFactor<double>& f) {
  return (f.s * f.s.transpose() - f.q).norm() / std::max(1.0, f.q.norm());
}

}  // namespace

TEST_CASE("psd_sqrt examples") {
  const auto id = psd_sqrt(MatrixXd::Identity(4, 4));
  CHECK((id.s - MatrixXd::Identity(4, 4)).norm() < 1e-14);

  MatrixXd d = MatrixXd::Zero(2, 2);
  d.diagonal() << 4.0, 9.0;
  const auto fd = psd_sqrt(d);
  CHECK(fd.s(0, 0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(fd.s(1, 1) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(std::abs(fd.s(0, 1)) < 1e-14);

  VectorXd v(3);
  v << 1.0, -2.0, 0.5;
  const auto r1 = psd_sqrt(MatrixXd(v * v.transpose()));
  CHECK((r1.s - v * v.transpose() / v.norm()).norm() < 1e-12);
  CHECK(factor_error(r1) < 1e-13);
}

TEST_CASE("psd_sqrt rejects asymmetric and indefinite input") {
  MatrixXd a = MatrixXd::Identity(3, 3);
  a(0, 1) = 0.5;
  CHECK_THROWS_AS(psd_sqrt(a), NumericalError);

  MatrixXd neg = MatrixXd::Identity(3, 3);
  neg(2, 2) = -0.1;
  CHECK_THROWS_AS(psd_sqrt(neg), NumericalError);

  MatrixXd tiny = MatrixXd::Identity(3, 3);
  tiny(2, 2) = -1e-14;
  const auto f = psd_sqrt(tiny);
  CHECK(f.clipped_mass == doctest::Approx(1e-14));
  CHECK(f.s(2, 2) == 0.0);

  CHECK_THROWS_AS(psd_sqrt(MatrixXd::Zero(2, 3)), DimensionError);
}

TEST_CASE("psd_sqrt factor identity on the quadratic covariances") {
  for (int d : {1, 5, 10, 20, 30}) {
    const QuadraticProblem<double> p(d);
    CHECK(factor_error(psd_sqrt(p.sigma())) <= 1e-10);
    CHECK(factor_error(p.sigma_factor()) <= 1e-10);
  }
}

TEST_CASE("psd_sqrt factor identity on sensing covariances") {
  for (int k : {2, 4, 6}) {
    const auto p = make_analytic_sensing_problem(k, 10, 0.1);
    RngStream rng(3, std::uint64_t(k));
    VectorXd phi(p.dim());
    for (Eigen::Index i = 0; i < phi.size(); ++i) phi(i) = 0.1 * rng.normal();
    CHECK(factor_error(psd_sqrt(p.noise_covariance(phi))) <= 1e-10);
  }
}

TEST_CASE("psd_sqrt agrees with a pivoted LDLT factor up to rotation") {
  const QuadraticProblem<double> p(8);
  const auto f = psd_sqrt(p.sigma());
  Eigen::LDLT<MatrixXd> ldlt(p.sigma());
  const MatrixXd l = ldlt.transpositionsP().transpose() * MatrixXd(ldlt.matrixL()) *
                     ldlt.vectorD().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  CHECK((l * l.transpose() - f.s * f.s.transpose()).norm() < 1e-12 * p.sigma().norm());
}

TEST_CASE("large factor identity") {
  RngStream rng(17, 0);
  const int d = 400;
  MatrixXd a(d, 50);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = rng.normal();
  const MatrixXd q = a * a.transpose();
  CHECK(factor_error(psd_sqrt(q)) < 1e-10);
}

TEST_CASE("draw_noise statistics") {
  RngStream zero_rng(1, 1);
  for (int i = 0; i < 10; ++i) CHECK(draw_noise(psd_sqrt(MatrixXd::Zero(3, 3)), zero_rng).norm() == 0.0);

  MatrixXd q(2, 2);
  q << 2.0, 0.6, 0.6, 0.5;
  const auto f = psd_sqrt(q);
  RngStream rng(9, 0);
  const int n = 200000;
  VectorXd mean = VectorXd::Zero(2);
  MatrixXd second = MatrixXd::Zero(2, 2);
  for (int i = 0; i < n; ++i) {
    const VectorXd x = draw_noise(f, rng);
    mean += x;
    second += x * x.transpose();
  }
  mean /= n;
  second /= n;
  for (int i = 0; i < 2; ++i) {
    CHECK(std::abs(mean(i)) < 5 * std::sqrt(q(i, i) / n));
    for (int j = 0; j < 2; ++j) {
      const double se = std::sqrt((q(i, i) * q(j, j) + q(i, j) * q(i, j)) / n);
      CHECK(std::abs(second(i, j) - q(i, j)) < 5 * se);
    }
  }
}
