#include "levy/cf.hpp"
#include "levy/samplers.hpp"

#include <doctest.h>

#include <cmath>

using namespace levy;
using namespace levy::cf;

TEST_CASE("antisymmetric decomposition reconstructs the matrix") {
  randkit::RngStream s(1, 0);
  for (int d : {2, 3, 4, 5, 6}) {
    const Eigen::VectorXd flat = randkit::gauss(s, area_dim(d), 1.0);
    const Eigen::MatrixXd lambda = antisym_from_flat(flat, d);
    const AntisymDecomposition dec = antisym_decompose(lambda);
    CHECK((dec.R * dec.R.transpose() - Eigen::MatrixXd::Identity(d, d)).norm() < 1e-12);
    CHECK((dec.R.transpose() * dec.canonical() * dec.R - lambda).norm() < 1e-10);
    CHECK(dec.d0 == d % 2);
    for (Eigen::Index k = 0; k < dec.eta.size(); ++k) CHECK(dec.eta(k) > 0.0);
    for (Eigen::Index k = 1; k < dec.eta.size(); ++k) CHECK(dec.eta(k - 1) >= dec.eta(k));
  }
  const AntisymDecomposition zero = antisym_decompose(Eigen::MatrixXd::Zero(3, 3));
  CHECK(zero.d0 == 3);
}

TEST_CASE("joint cf reduces to the gaussian and to sech") {
  randkit::RngStream s(2, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::VectorXd mu = randkit::gauss(s, 4, 1.0);
    CHECK(std::abs(joint_cf(0.7, mu, Eigen::VectorXd::Zero(6)) - std::exp(-0.35 * mu.squaredNorm())) < 1e-12);
  }
  for (double lam = -6.0; lam <= 6.0; lam += 0.5) {
    const Eigen::VectorXd l = Eigen::VectorXd::Constant(1, lam);
    CHECK(std::abs(joint_cf(1.0, Eigen::VectorXd::Zero(2), l) - 1.0 / std::cosh(lam / 2.0)) < 1e-12);
    // Brownian scaling: A_t has the law of t A_1.
    CHECK(std::abs(joint_cf(2.0, Eigen::VectorXd::Zero(2), l) - 1.0 / std::cosh(lam)) < 1e-12);
  }
}

TEST_CASE("joint cf is real, bounded and rotation invariant in mu") {
  randkit::RngStream s(3, 0);
  const Eigen::VectorXd lam = randkit::gauss(s, 3, 1.0);
  const Eigen::VectorXd mu = randkit::gauss(s, 3, 1.0);
  const double v = joint_cf(1.0, mu, lam);
  CHECK(v > 0.0);
  CHECK(v <= 1.0);
  // Sign flip of mu leaves the value unchanged.
  CHECK(std::abs(joint_cf(1.0, -mu, lam) - v) < 1e-14);
}

TEST_CASE("empirical cf of a reference batch tracks the analytic cf") {
  const LevyBatch b = reference_batch(randkit::RngStream(4, 0), 1 << 16, 3, 1.0, 5);
  const Eigen::MatrixXd x = b.joint();
  randkit::RngStream fs(4, 1);
  const Frequencies f = random_frequencies(fs, 10, 6);
  const Eigen::VectorXcd emp = empirical_cf(x, f);
  for (Eigen::Index k = 0; k < f.rows(); ++k) {
    const double exact = joint_cf(1.0, f.row(k).head(3).transpose(), f.row(k).tail(3).transpose());
    CHECK(std::abs(emp(k) - exact) < 5.0 / std::sqrt(65536.0));
  }
}

TEST_CASE("distances vanish on identical samples and grow with shifts") {
  randkit::RngStream s(5, 0);
  Eigen::MatrixXd x(2000, 3);
  randkit::fill_gauss(s, x, 1.0);
  const Frequencies f = random_frequencies(s, 32, 3);
  CHECK(cfd(x, x, f) == 0.0);
  CHECK(cfd(x, x, f, CfNorm::L2) == 0.0);
  const Eigen::MatrixXd y = x.array() + 1.0;
  CHECK(cfd(x, y, f) > 0.1);
  const UnitaryFrequencies u = random_unitary_frequencies(s, 8, 3, 3);
  CHECK(u.dim() == 3);
  CHECK(ucfd(x, x, u) < 1e-12);
  CHECK(ucfd(x, y, u) > 0.05);
}

TEST_CASE("anti-hermitian exponential is unitary and matches the series") {
  randkit::RngStream s(6, 0);
  Eigen::MatrixXcd m(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m(i, j) = {0.3 * s.normal(), 0.3 * s.normal()};
  m = (m - m.adjoint()).eval() / 2.0;
  const Eigen::MatrixXcd e = expm_anti_hermitian(m);
  CHECK((e * e.adjoint() - Eigen::MatrixXcd::Identity(3, 3)).norm() < 1e-12);
  Eigen::MatrixXcd series = Eigen::MatrixXcd::Identity(3, 3), term = series;
  for (int k = 1; k < 30; ++k) {
    term = (term * m / static_cast<double>(k)).eval();
    series += term;
  }
  CHECK((e - series).norm() < 1e-12);
}

TEST_CASE("unbiased distance is centred for independent samples from one law") {
  randkit::RngStream s(7, 0);
  const Frequencies f = random_frequencies(s, 16, 2);
  double biased = 0.0, unbiased = 0.0;
  const int reps = 200;
  for (int r = 0; r < reps; ++r) {
    Eigen::MatrixXd x(200, 2), y(100, 2);
    randkit::fill_gauss(s, x, 1.0);
    randkit::fill_gauss(s, y, 1.0);
    biased += std::pow(cfd(x, y, f, CfNorm::L2), 2) / reps;
    unbiased += cfd(x, y, f, CfNorm::Unbiased) / reps;
  }
  // The plain squared distance carries a floor of order 1/200 + 1/100.
  CHECK(biased > 0.005);
  CHECK(std::abs(unbiased) < 0.001);
  CHECK(parse_norm("unbiased") == CfNorm::Unbiased);
  CHECK_THROWS(parse_norm("l3"));
}
