#include "levy/train.hpp"

#include <doctest.h>

#include <cmath>

using namespace levy;
using namespace levy::train;

namespace {

struct GradCase {
  TrainConfig cfg;
  pairnet::GeneratorModel model;
  cf::Frequencies freqs;
  Eigen::MatrixXd w;
  pairnet::GeneratorDraw draw;
};

GradCase make_case(cf::CfNorm norm, bool stop_grad, bool split = false) {
  GradCase c;
  c.cfg.split_batch = split;
  c.cfg.d = 2;
  c.cfg.batch = 64;
  c.cfg.hidden = {4, 4};
  c.cfg.noise_dim = 2;
  c.cfg.norm = norm;
  c.cfg.stop_grad_chen = stop_grad;
  randkit::RngStream s(11, 0);
  c.model = pairnet::GeneratorModel::init(2, 2, c.cfg.hidden, 0.01, s);
  c.freqs = cf::random_frequencies(s, 8, 3);
  c.w.resize(64, 2);
  randkit::fill_gauss(s, c.w, 1.0);
  c.draw = pairnet::draw_inputs(s, 64, 2, 2);
  return c;
}

// Largest component error relative to the gradient norm.
double fd_error(const GradCase& c) {
  const LossResult lr = loss_and_grad(c.model, c.freqs, c.w, c.draw, c.cfg);
  const double eps = 1e-6;
  Eigen::VectorXd flat = flatten(c.model.layers);
  Eigen::VectorXd fd(flat.size());
  pairnet::GeneratorModel m = c.model;
  for (Eigen::Index k = 0; k < flat.size(); ++k) {
    Eigen::VectorXd p = flat;
    p(k) += eps;
    unflatten(p, m.layers);
    const double up = loss_value(m, c.freqs, c.w, c.draw, c.cfg);
    p(k) -= 2 * eps;
    unflatten(p, m.layers);
    const double dn = loss_value(m, c.freqs, c.w, c.draw, c.cfg);
    fd(k) = (up - dn) / (2 * eps);
  }
  double err = (fd - lr.grad_params).norm() / fd.norm();
  Eigen::MatrixXd fdf(c.freqs.rows(), c.freqs.cols());
  for (Eigen::Index i = 0; i < c.freqs.rows(); ++i)
    for (Eigen::Index j = 0; j < c.freqs.cols(); ++j) {
      cf::Frequencies f = c.freqs;
      f(i, j) += eps;
      const double up = loss_value(c.model, f, c.w, c.draw, c.cfg);
      f(i, j) -= 2 * eps;
      fdf(i, j) = (up - loss_value(c.model, f, c.w, c.draw, c.cfg)) / (2 * eps);
    }
  err = std::max(err, (fdf - lr.grad_freqs).norm() / fdf.norm());
  return err;
}

}  // namespace

TEST_CASE("loss gradients match central differences") {
  for (auto norm : {cf::CfNorm::L1, cf::CfNorm::L2, cf::CfNorm::Unbiased})
    for (bool split : {false, true}) {
      CAPTURE(split);
      CHECK(fd_error(make_case(norm, false, split)) < 1e-4);
    }
}

TEST_CASE("stopping the chen branch drops its gradient contribution") {
  const GradCase full = make_case(cf::CfNorm::L1, false), stop = make_case(cf::CfNorm::L1, true);
  const LossResult a = loss_and_grad(full.model, full.freqs, full.w, full.draw, full.cfg);
  const LossResult b = loss_and_grad(stop.model, stop.freqs, stop.w, stop.draw, stop.cfg);
  CHECK(a.loss == b.loss);
  CHECK(a.grad_freqs == b.grad_freqs);
  CHECK((a.grad_params - b.grad_params).norm() > 1e-6);
}

TEST_CASE("loss value agrees with loss_and_grad") {
  const GradCase c = make_case(cf::CfNorm::L1, false);
  CHECK(loss_value(c.model, c.freqs, c.w, c.draw, c.cfg) ==
        doctest::Approx(loss_and_grad(c.model, c.freqs, c.w, c.draw, c.cfg).loss));
}

TEST_CASE("adam first step moves by the learning rate") {
  Eigen::VectorXd p(2), g(2);
  p << 1.0, -1.0;
  g << 2.0, -0.5;
  AdamState st;
  adam_step(p, g, st, 0.1);
  CHECK(p(0) == doctest::Approx(0.9));
  CHECK(p(1) == doctest::Approx(-0.9));
  Eigen::VectorXd q = Eigen::VectorXd::Ones(1);
  AdamState st2;
  adam_step(q, Eigen::VectorXd::Constant(1, 3.0), st2, 0.1, 0.9, 0.999, 1e-8, 1.0);
  CHECK(q(0) == doctest::Approx(1.1));
  CHECK(st2.t == 1);
}

TEST_CASE("adam minimises a quadratic") {
  Eigen::VectorXd p = Eigen::VectorXd::Constant(3, 5.0);
  AdamState st;
  for (int i = 0; i < 2000; ++i) adam_step(p, 2.0 * p, st, 0.05);
  CHECK(p.norm() < 1e-2);
}

TEST_CASE("flatten round trip") {
  randkit::RngStream s(1, 0);
  pairnet::GeneratorModel m = pairnet::GeneratorModel::init(3, 2, {4, 3}, 0.01, s);
  const Eigen::VectorXd flat = flatten(m.layers);
  CHECK(flat.size() == m.parameter_count());
  pairnet::GeneratorModel z = pairnet::GeneratorModel::zeros(3, 2, {4, 3}, 0.01);
  unflatten(flat, z.layers);
  CHECK(flatten(z.layers) == flat);
}

TEST_CASE("learning-rate schedule runs from 1 to the final factor") {
  TrainConfig cfg;
  cfg.steps = 101;
  cfg.lr_final_factor = 0.1;
  CHECK(cfg.lr_scale(0) == doctest::Approx(1.0));
  CHECK(cfg.lr_scale(50) == doctest::Approx(0.55));
  CHECK(cfg.lr_scale(100) == doctest::Approx(0.1));
  cfg.lr_final_factor = 0.0;
  CHECK_THROWS(cfg.validate());
}

TEST_CASE("short training run is deterministic and tracks the best evaluation") {
  TrainConfig cfg;
  cfg.d = 2;
  cfg.batch = 128;
  cfg.hidden = {4};
  cfg.noise_dim = 1;
  cfg.frequencies = 8;
  cfg.steps = 6;
  cfg.eval_every = 2;
  int calls = 0;
  const Evaluator ev = [&](const pairnet::GeneratorModel& m) {
    ++calls;
    return flatten(m.layers).norm();
  };
  const TrainResult a = levy::train::train(cfg, ev);
  const TrainResult b = levy::train::train(cfg);
  CHECK(calls >= 3);
  CHECK(a.report.loss_curve.size() == 6);
  CHECK(a.report.loss_curve == b.report.loss_curve);
  CHECK(a.report.best_step >= 0);
  double best = 1e300;
  for (const auto& e : a.report.evaluations) best = std::min(best, e.w2);
  CHECK(a.report.best_w2 == best);
}

TEST_CASE("training starts from a supplied model of matching shape") {
  TrainConfig cfg;
  cfg.d = 2;
  cfg.batch = 64;
  cfg.hidden = {4};
  cfg.noise_dim = 1;
  cfg.frequencies = 4;
  cfg.steps = 0;
  randkit::RngStream s(31, 0);
  const pairnet::GeneratorModel start = pairnet::GeneratorModel::init(2, 1, {4}, 0.2, s);
  const TrainResult r = levy::train::train(cfg, {}, "", {}, &start);
  CHECK(flatten(r.model.layers) == flatten(start.layers));
  CHECK(r.model.slope == 0.2);

  cfg.steps = 2;
  const TrainResult moved = levy::train::train(cfg, {}, "", {}, &start);
  CHECK(flatten(moved.model.layers) != flatten(start.layers));

  const pairnet::GeneratorModel wider = pairnet::GeneratorModel::init(2, 1, {5}, 0.2, s);
  CHECK_THROWS_AS(levy::train::train(cfg, {}, "", {}, &wider), std::invalid_argument);
}
