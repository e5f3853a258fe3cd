#include "levy/chen.hpp"
#include "levy/stats.hpp"

#include <doctest.h>

#include <cmath>

using namespace levy;

namespace {

Eigen::VectorXd random_vec(randkit::RngStream& s, int n) { return randkit::gauss(s, n, 1.0); }

}  // namespace

TEST_CASE("chen relation adds the bilinear correction") {
  Eigen::Vector2d w1(1.0, 0.0), w2(0.0, 1.0);
  Eigen::VectorXd a1 = Eigen::VectorXd::Zero(1), a2 = Eigen::VectorXd::Zero(1);
  const auto [w, a] = chen_relation(w1, a1, w2, a2);
  CHECK(w.isApprox(Eigen::Vector2d(1.0, 1.0)));
  CHECK(a(0) == doctest::Approx(0.5));
}

TEST_CASE("chen relation is associative") {
  randkit::RngStream s(1, 0);
  for (int d : {2, 3, 5}) {
    const int na = area_dim(d);
    const Eigen::VectorXd w1 = random_vec(s, d), w2 = random_vec(s, d), w3 = random_vec(s, d);
    const Eigen::VectorXd a1 = random_vec(s, na), a2 = random_vec(s, na), a3 = random_vec(s, na);
    const auto [wl, al] = chen_relation(w1, a1, w2, a2);
    const auto [wl3, al3] = chen_relation(wl, al, w3, a3);
    const auto [wr, ar] = chen_relation(w2, a2, w3, a3);
    const auto [w1r, a1r] = chen_relation(w1, a1, wr, ar);
    CHECK((wl3 - w1r).norm() < 1e-13);
    CHECK((al3 - a1r).norm() < 1e-13);
  }
}

TEST_CASE("chen tree matches sequential concatenation") {
  randkit::RngStream s(2, 0);
  const int d = 3, na = area_dim(d), n = 8;
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> w(n, d), a(n, na);
  for (int r = 0; r < n; ++r) {
    w.row(r) = random_vec(s, d).transpose();
    a.row(r) = random_vec(s, na).transpose();
  }
  Eigen::VectorXd ws = w.row(0).transpose(), as = a.row(0).transpose();
  for (int r = 1; r < n; ++r) std::tie(ws, as) = chen_relation(ws, as, w.row(r).transpose(), a.row(r).transpose());
  detail::chen_tree(w.data(), a.data(), n, d);
  CHECK((w.row(0).transpose() - ws).norm() < 1e-13);
  CHECK((a.row(0).transpose() - as).norm() < 1e-13);
}

TEST_CASE("chen combine halves the batch and keeps the time scale") {
  const LevyBatch b = reference_batch(randkit::RngStream(3, 0), 1000, 3, 0.5, 2);
  const LevyBatch c = chen_combine(b);
  CHECK(c.size() == 500);
  CHECK(c.dt == 0.5);
  const Eigen::VectorXd w1 = b.w.row(0).transpose() / std::sqrt(2.0);
  const Eigen::VectorXd w2 = b.w.row(500).transpose() / std::sqrt(2.0);
  const auto [w, a] = chen_relation(w1, b.a.row(0).transpose() / 2.0, w2, b.a.row(500).transpose() / 2.0);
  CHECK((c.w.row(0).transpose() - w).norm() < 1e-14);
  CHECK((c.a.row(0).transpose() - a).norm() < 1e-14);
}

TEST_CASE("chen combine of davie areas moves the fourth moment toward the exact value") {
  // Gaussian areas have E A^4 = 3/16 at unit time; the exact law has 5/16.
  SamplerSpec davie;
  davie.kind = SamplerKind::Davie;
  LevyBatch b = sample_joint(davie, randkit::RngStream(4, 0), 1 << 18, 2, 1.0);
  const double before = b.a.col(0).array().pow(4).mean();
  for (int i = 0; i < 4; ++i) b = chen_combine(b);
  const double after = b.a.col(0).array().pow(4).mean();
  CHECK(std::abs(before - 3.0 / 16.0) < 0.01);
  CHECK(std::abs(after - 5.0 / 16.0) < std::abs(before - 5.0 / 16.0));
  CHECK(std::abs(stats::sample_variance(b.a.col(0)) - 0.25) < 0.02);
}

TEST_CASE("chen refine keeps the area variance") {
  SamplerSpec foster;
  foster.kind = SamplerKind::Foster;
  const randkit::RngStream s(5, 0);
  for (int depth : {0, 3}) {
    const LevyBatch r = chen_refine(s, 100000, 3, 2.0, depth, foster);
    CHECK(r.size() == 100000);
    CHECK(std::abs(stats::sample_variance(r.w.col(1)) / 2.0 - 1.0) < 0.02);
    CHECK(std::abs(stats::sample_variance(r.a.col(2)) / 1.0 - 1.0) < 0.02);
  }
}
