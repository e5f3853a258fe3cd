#include "levy/chen.hpp"
#include "levy/mlmc.hpp"
#include "levy/parallel.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace levy;
using namespace levy::mlmc;

namespace {

SamplerSpec foster() {
  SamplerSpec s;
  s.kind = SamplerKind::Foster;
  return s;
}

MlmcConfig small_config(Scheme scheme, std::optional<SamplerSpec> area) {
  MlmcConfig c;
  c.scheme = scheme;
  c.area = std::move(area);
  c.levels = 3;
  c.n0 = 1 << 14;
  c.seed = 5;
  c.reference_price = 7.963582811697879;
  return c;
}

}  // namespace

TEST_CASE("scheme names round trip") {
  for (auto s : {Scheme::Milstein, Scheme::Antithetic, Scheme::Strang})
    CHECK(parse_scheme(to_string(s)) == s);
  CHECK_THROWS(parse_scheme("euler"));
}

TEST_CASE("coarsening sums increments and chen-combines areas") {
  randkit::RngStream s(1, 0);
  Eigen::MatrixXd w(6, 2);
  randkit::fill_gauss(s, w, 1.0);
  const Eigen::VectorXd area = randkit::gauss(s, 6, 1.0);
  Eigen::MatrixXd wc;
  Eigen::VectorXd ac;
  mlmc::detail::coarsen(w, area, wc, ac);
  REQUIRE(wc.rows() == 3);
  for (int k = 0; k < 3; ++k) {
    CHECK((wc.row(k) - w.row(2 * k) - w.row(2 * k + 1)).norm() < 1e-15);
    const auto [wr, ar] = chen_relation(w.row(2 * k).transpose(), area.segment(2 * k, 1),
                                        w.row(2 * k + 1).transpose(), area.segment(2 * k + 1, 1));
    CHECK(ac(k) == doctest::Approx(ar(0)).epsilon(1e-15));
  }
  Eigen::VectorXd none;
  mlmc::detail::coarsen(w, Eigen::VectorXd(), wc, none);
  CHECK(none.size() == 0);
}

TEST_CASE("antithetic swap is an involution that keeps coarse sums") {
  randkit::RngStream s(2, 0);
  Eigen::MatrixXd w(8, 2);
  randkit::fill_gauss(s, w, 1.0);
  const Eigen::MatrixXd sw = mlmc::detail::antithetic_swap(w);
  CHECK(sw.row(0) == w.row(1));
  CHECK(sw.row(1) == w.row(0));
  CHECK(mlmc::detail::antithetic_swap(sw) == w);
  Eigen::MatrixXd c1, c2;
  Eigen::VectorXd a1, a2;
  mlmc::detail::coarsen(w, Eigen::VectorXd(), c1, a1);
  mlmc::detail::coarsen(sw, Eigen::VectorXd(), c2, a2);
  CHECK((c1 - c2).norm() < 1e-15);
}

TEST_CASE("level 0 telescoping equals single-step monte carlo") {
  for (Scheme scheme : {Scheme::Milstein, Scheme::Strang}) {
    MlmcConfig c = small_config(scheme, scheme == Scheme::Strang ? std::optional(foster()) : std::nullopt);
    c.levels = 0;
    const MlmcReport r = levy::mlmc::mlmc(c);
    MonteCarloConfig m;
    m.scheme = scheme;
    m.area = c.area;
    m.steps = 1;
    m.paths = c.n0;
    m.seed = c.seed;
    const MonteCarloResult mc = monte_carlo(m);
    CHECK(r.estimate() == doctest::Approx(mc.mean).epsilon(1e-12));
  }
}

TEST_CASE("mlmc is deterministic and thread-count independent") {
  const MlmcConfig c = small_config(Scheme::Strang, foster());
  set_thread_count(1);
  const MlmcReport a = levy::mlmc::mlmc(c);
  set_thread_count(3);
  const MlmcReport b = levy::mlmc::mlmc(c);
  set_thread_count(0);
  CHECK(a.csv() == b.csv());
  CHECK(a.json() == b.json());
}

TEST_CASE("mlmc report invariants") {
  for (Scheme scheme : {Scheme::Milstein, Scheme::Antithetic, Scheme::Strang}) {
    const MlmcReport r = levy::mlmc::mlmc(small_config(scheme, scheme == Scheme::Strang ? std::optional(foster()) : std::nullopt));
    REQUIRE(r.levels.size() == 4);
    double cum = 0.0;
    for (const MlmcLevel& l : r.levels) {
      cum += l.mean;
      CHECK(l.cumulative == doctest::Approx(cum).epsilon(1e-12));
      CHECK(l.error == doctest::Approx(l.cumulative - 7.963582811697879).epsilon(1e-12));
      CHECK(l.n == (Eigen::Index{1} << 14) >> l.level);
      CHECK(l.variance >= 0.0);
      CHECK(l.h == doctest::Approx(1.0 / (1 << l.level)));
    }
    // Coupled differences have much smaller variance than the payoff itself.
    CHECK(r.levels[3].variance < 0.1 * r.levels[0].variance);
    CHECK(std::isfinite(r.estimate()));
    CHECK(r.levels.back().cumulative_se > 0.0);
  }
}

TEST_CASE("rate fits use only significant levels") {
  const std::vector<double> h{1.0, 0.5, 0.25, 0.125, 0.0625};
  const std::vector<double> err{0.5, 0.25, 0.0625, 0.015625, 1e-6};
  const std::vector<double> se{0.001, 0.001, 0.001, 0.001, 0.001};
  const RateFit f = fit_weak_rate(h, err, se, 2);
  CHECK(f.points == 2);
  CHECK(f.slope == doctest::Approx(2.0));
  // Two points leave no residuals; the spread comes from the measured errors.
  const double s2 = 0.001 / (0.0625 * std::numbers::ln2), s3 = 0.001 / (0.015625 * std::numbers::ln2);
  CHECK(f.slope_se == doctest::Approx(std::hypot(s2, s3) / std::abs(std::log2(h[3] / h[2]))));
}

TEST_CASE("plain monte carlo converges to the quadrature price") {
  MonteCarloConfig m;
  m.scheme = Scheme::Strang;
  m.area = foster();
  m.steps = 16;
  m.paths = 1 << 17;
  m.seed = 3;
  const MonteCarloResult r = monte_carlo(m);
  CHECK(std::abs(r.mean - 7.963582811697879) < 4.0 * r.se + 0.01);
  CHECK(r.paths == m.paths);
}
