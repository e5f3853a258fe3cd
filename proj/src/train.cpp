#include "levy/train.hpp"

#include "levy/chen.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>

namespace levy::train {

void TrainConfig::validate() const {
  if (d < 2) throw std::invalid_argument("train: d must be >= 2");
  if (batch < 4 || batch % 2 != 0) throw std::invalid_argument("train: batch must be even, >= 4");
  if (!(lr_g > 0) || !(lr_d > 0)) throw std::invalid_argument("train: learning rates must be > 0");
  if (frequencies < 1) throw std::invalid_argument("train: need at least one frequency");
  if (iter_d < 0 || steps < 0) throw std::invalid_argument("train: negative step counts");
  if (!(h_variance > 0)) throw std::invalid_argument("train: h variance must be > 0");
  if (!(lr_final_factor > 0) || lr_final_factor > 1)
    throw std::invalid_argument("train: lr_final_factor must be in (0, 1]");
}

double TrainConfig::lr_scale(int step) const {
  if (steps <= 1) return 1.0;
  const double progress = static_cast<double>(step) / static_cast<double>(steps - 1);
  return lr_final_factor +
         (1.0 - lr_final_factor) * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grads, AdamState& state, double lr,
               double beta1, double beta2, double eps, double direction) {
  if (grads.size() != params.size()) throw std::invalid_argument("adam_step: size mismatch");
  if (state.m.size() != params.size()) {
    state.m = Eigen::VectorXd::Zero(params.size());
    state.v = Eigen::VectorXd::Zero(params.size());
    state.t = 0;
  }
  ++state.t;
  state.m = beta1 * state.m + (1.0 - beta1) * grads;
  state.v = beta2 * state.v + (1.0 - beta2) * grads.cwiseAbs2();
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));
  params.array() += direction * lr * (state.m.array() / c1) /
                    ((state.v.array() / c2).sqrt() + eps);
}

Eigen::VectorXd flatten(const std::vector<pairnet::Layer>& layers) {
  Eigen::Index n = 0;
  for (const auto& l : layers) n += l.weight.size() + l.bias.size();
  Eigen::VectorXd out(n);
  Eigen::Index pos = 0;
  for (const auto& l : layers) {
    out.segment(pos, l.weight.size()) = Eigen::Map<const Eigen::VectorXd>(l.weight.data(), l.weight.size());
    pos += l.weight.size();
    out.segment(pos, l.bias.size()) = l.bias;
    pos += l.bias.size();
  }
  return out;
}

void unflatten(const Eigen::VectorXd& flat, std::vector<pairnet::Layer>& layers) {
  Eigen::Index pos = 0;
  for (auto& l : layers) {
    if (pos + l.weight.size() + l.bias.size() > flat.size())
      throw std::invalid_argument("unflatten: parameter vector too short");
    Eigen::Map<Eigen::VectorXd>(l.weight.data(), l.weight.size()) = flat.segment(pos, l.weight.size());
    pos += l.weight.size();
    l.bias = flat.segment(pos, l.bias.size());
    pos += l.bias.size();
  }
  if (pos != flat.size()) throw std::invalid_argument("unflatten: parameter vector too long");
}

namespace {

struct CfGrad {
  double loss = 0.0;
  Eigen::MatrixXd grad_x, grad_y, grad_freqs;
};

// Distance between empirical CFs of x and y at the frequency rows, with
// gradients in both samples and the frequencies.
CfGrad cf_distance_grad(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                        const cf::Frequencies& freqs, cf::CfNorm norm) {
  const Eigen::Index m = freqs.rows();
  const double nx = static_cast<double>(x.rows()), ny = static_cast<double>(y.rows());
  const Eigen::MatrixXd px = x * freqs.transpose(), py = y * freqs.transpose();
  const Eigen::ArrayXXd cx = px.array().cos(), sx = px.array().sin();
  const Eigen::ArrayXXd cy = py.array().cos(), sy = py.array().sin();
  const Eigen::ArrayXd dre = cx.colwise().sum().transpose() / nx - cy.colwise().sum().transpose() / ny;
  const Eigen::ArrayXd dim = sx.colwise().sum().transpose() / nx - sy.colwise().sum().transpose() / ny;
  const Eigen::ArrayXd modulus = (dre.square() + dim.square()).sqrt();

  CfGrad out;
  // d loss / d (sum cos, sum sin) per frequency, for each sample.
  Eigen::ArrayXd ax_re(m), ax_im(m), ay_re(m), ay_im(m);
  const double md = static_cast<double>(m);
  if (norm == cf::CfNorm::L1) {
    out.loss = modulus.mean();
    const Eigen::ArrayXd safe = modulus.max(1e-300);
    ax_re = dre / safe / md / nx;
    ax_im = dim / safe / md / nx;
    ay_re = -dre / safe / md / ny;
    ay_im = -dim / safe / md / ny;
  } else if (norm == cf::CfNorm::L2) {
    out.loss = std::sqrt(modulus.square().mean());
    const double scale = out.loss > 0 ? 1.0 / (out.loss * md) : 0.0;
    ax_re = dre * scale / nx;
    ax_im = dim * scale / nx;
    ay_re = -dre * scale / ny;
    ay_im = -dim * scale / ny;
  } else {
    // Per frequency: (|Sx|^2 - nx) / (nx (nx - 1)) + (|Sy|^2 - ny) / (ny (ny - 1))
    // - 2 Re(Sx conj Sy) / (nx ny), with S the sums of exp(i p).
    if (nx < 2 || ny < 2) throw std::invalid_argument("loss: unbiased distance needs >= 2 rows");
    const Eigen::ArrayXd rx = cx.colwise().sum().transpose(), ix = sx.colwise().sum().transpose();
    const Eigen::ArrayXd ry = cy.colwise().sum().transpose(), iy = sy.colwise().sum().transpose();
    const double kx = 1.0 / (nx * (nx - 1.0)), ky = 1.0 / (ny * (ny - 1.0)), kxy = 1.0 / (nx * ny);
    const Eigen::ArrayXd per = ((rx.square() + ix.square()) - nx) * kx +
                               ((ry.square() + iy.square()) - ny) * ky -
                               2.0 * (rx * ry + ix * iy) * kxy;
    out.loss = per.mean();
    ax_re = 2.0 * (rx * kx - ry * kxy) / md;
    ax_im = 2.0 * (ix * kx - iy * kxy) / md;
    ay_re = 2.0 * (ry * ky - rx * kxy) / md;
    ay_im = 2.0 * (iy * ky - ix * kxy) / md;
  }
  // d cos(p)/dp = -sin(p), d sin(p)/dp = cos(p).
  const Eigen::MatrixXd gpx =
      ((-sx).rowwise() * ax_re.transpose() + cx.rowwise() * ax_im.transpose()).matrix();
  const Eigen::MatrixXd gpy =
      ((-sy).rowwise() * ay_re.transpose() + cy.rowwise() * ay_im.transpose()).matrix();
  out.grad_x = gpx * freqs;
  out.grad_y = gpy * freqs;
  out.grad_freqs = gpx.transpose() * x + gpy.transpose() * y;
  return out;
}

struct Forward {
  Eigen::MatrixXd x, y;
  pairnet::ForwardCache cache;
  Eigen::MatrixXd sign;  // d a / d b per entry
  Eigen::Index direct_rows = 0;  // x is rows [0, direct_rows)
  Eigen::Index chen_begin = 0;   // y combines rows [chen_begin, n)
};

Forward forward(const pairnet::GeneratorModel& model, const Eigen::MatrixXd& w,
                const pairnet::GeneratorDraw& draw, const TrainConfig& cfg) {
  const int d = static_cast<int>(w.cols());
  const Eigen::Index n = w.rows();
  if (n % 2 != 0) throw std::invalid_argument("loss: batch must be even");
  Forward f;
  const Eigen::MatrixXd area = pairnet::generate_from(model, w, draw, cfg.flip, &f.cache);
  f.sign.resize(n, area_dim(d));
  f.sign.setOnes();
  if (cfg.flip) {
    int p = 0;
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j, ++p)
        f.sign.col(p) = draw.xi0.array() * draw.xi.col(i).array() * draw.xi.col(j).array();
  }
  LevyBatch b;
  b.d = d;
  b.w = w;
  b.a = area;
  if (cfg.split_batch) {
    if (n % 4 != 0) throw std::invalid_argument("loss: split batch must be a multiple of 4");
    f.direct_rows = n / 2;
    f.chen_begin = n / 2;
  } else {
    f.direct_rows = n;
    f.chen_begin = 0;
  }
  LevyBatch chen_input = b;
  chen_input.w = w.bottomRows(n - f.chen_begin);
  chen_input.a = area.bottomRows(n - f.chen_begin);
  f.x = b.joint().topRows(f.direct_rows);
  f.y = chen_combine(chen_input).joint();
  return f;
}

}  // namespace

LossResult loss_and_grad(const pairnet::GeneratorModel& model, const cf::Frequencies& freqs,
                         const Eigen::MatrixXd& w, const pairnet::GeneratorDraw& draw,
                         const TrainConfig& cfg) {
  const int d = static_cast<int>(w.cols());
  const Eigen::Index n = w.rows();
  Forward f = forward(model, w, draw, cfg);
  const CfGrad g = cf_distance_grad(f.x, f.y, freqs, cfg.norm);

  // Area gradient: direct branch plus the Chen branch, where each output area
  // is half the sum of its two inputs (the bilinear term involves w only).
  Eigen::MatrixXd grad_area = Eigen::MatrixXd::Zero(n, area_dim(d));
  grad_area.topRows(f.direct_rows) = g.grad_x.rightCols(area_dim(d));
  if (!cfg.stop_grad_chen) {
    const Eigen::MatrixXd gy = g.grad_y.rightCols(area_dim(d));
    const Eigen::Index half = gy.rows();
    grad_area.middleRows(f.chen_begin, half) += 0.5 * gy;
    grad_area.middleRows(f.chen_begin + half, half) += 0.5 * gy;
  }
  const Eigen::MatrixXd grad_b = grad_area.cwiseProduct(f.sign);
  const Eigen::VectorXd grad_out = Eigen::Map<const Eigen::VectorXd>(grad_b.data(), grad_b.size());
  LossResult out;
  out.loss = g.loss;
  out.grad_params = flatten(pairnet::mlp_backward(model, f.cache, grad_out));
  out.grad_freqs = g.grad_freqs;
  return out;
}

double loss_value(const pairnet::GeneratorModel& model, const cf::Frequencies& freqs,
                  const Eigen::MatrixXd& w, const pairnet::GeneratorDraw& draw,
                  const TrainConfig& cfg) {
  const Forward f = forward(model, w, draw, cfg);
  return cf_distance_grad(f.x, f.y, freqs, cfg.norm).loss;
}

LossResult loss(const pairnet::GeneratorModel& model, const cf::Frequencies& freqs,
                randkit::RngStream& stream, const TrainConfig& cfg) {
  Eigen::MatrixXd w(cfg.batch, cfg.d);
  randkit::fill_gauss(stream, w, 1.0);
  const auto draw = pairnet::draw_inputs(stream, cfg.batch, cfg.d, model.noise_dim, cfg.h_variance);
  return loss_and_grad(model, freqs, w, draw, cfg);
}

TrainResult train(const TrainConfig& cfg, const Evaluator& evaluator,
                  const std::string& checkpoint_path,
                  const std::function<void(int, double)>& progress,
                  const pairnet::GeneratorModel* initial) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  randkit::RngStream init(cfg.seed, 1);
  TrainResult result{pairnet::GeneratorModel::init(cfg.d, cfg.noise_dim, cfg.hidden, cfg.slope, init),
                     {}};
  if (initial) {
    if (initial->noise_dim != cfg.noise_dim || initial->widths() != result.model.widths())
      throw std::invalid_argument("initial model does not match the configured architecture");
    result.model.layers = initial->layers;
    result.model.slope = initial->slope;
  }
  pairnet::GeneratorModel& model = result.model;
  cf::Frequencies freqs =
      cf::random_frequencies(init, cfg.frequencies, cfg.d + area_dim(cfg.d), cfg.frequency_scale);

  Eigen::VectorXd params = flatten(model.layers);
  Eigen::VectorXd fparams = Eigen::Map<const Eigen::VectorXd>(freqs.data(), freqs.size());
  AdamState gen_state, disc_state;
  randkit::RngStream data(cfg.seed, 2);
  pairnet::GeneratorModel best = model;
  double best_score = std::numeric_limits<double>::infinity();

  auto evaluate = [&](int step) {
    if (!evaluator) return;
    const double score = evaluator(model);
    result.report.evaluations.push_back({step, score});
    if (score < best_score) {
      best_score = score;
      best = model;
      result.report.best_w2 = score;
      result.report.best_step = step;
      if (!checkpoint_path.empty()) pairnet::save(best, checkpoint_path);
    }
  };

  for (int step = 0; step < cfg.steps; ++step) {
    for (int k = 0; k < cfg.iter_d; ++k) {
      const LossResult lr = loss(model, freqs, data, cfg);
      if (!std::isfinite(lr.loss)) throw std::runtime_error("training diverged: non-finite loss");
      adam_step(fparams, Eigen::Map<const Eigen::VectorXd>(lr.grad_freqs.data(), lr.grad_freqs.size()),
                disc_state, cfg.lr_d * cfg.lr_scale(step), cfg.beta1, cfg.beta2, cfg.adam_eps, +1.0);
      freqs = Eigen::Map<const Eigen::MatrixXd>(fparams.data(), freqs.rows(), freqs.cols());
    }
    const LossResult lr = loss(model, freqs, data, cfg);
    if (!std::isfinite(lr.loss) || !lr.grad_params.allFinite())
      throw std::runtime_error("training diverged: non-finite loss or gradient");
    adam_step(params, lr.grad_params, gen_state, cfg.lr_g * cfg.lr_scale(step), cfg.beta1, cfg.beta2, cfg.adam_eps, -1.0);
    unflatten(params, model.layers);
    result.report.loss_curve.push_back(lr.loss);
    if (progress) progress(step, lr.loss);
    if (cfg.eval_every > 0 && (step + 1) % cfg.eval_every == 0) evaluate(step + 1);
  }
  if (evaluator && (cfg.eval_every <= 0 || cfg.steps % cfg.eval_every != 0)) evaluate(cfg.steps);
  if (evaluator) model = best;
  result.report.checkpoint = checkpoint_path;
  result.report.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!evaluator && !checkpoint_path.empty()) pairnet::save(model, checkpoint_path);
  return result;
}

std::string TrainReport::loss_csv() const {
  std::ostringstream os;
  os << std::setprecision(10) << "step,loss\n";
  for (std::size_t i = 0; i < loss_curve.size(); ++i) os << i << ',' << loss_curve[i] << '\n';
  return os.str();
}

std::string TrainReport::json() const {
  nlohmann::json j;
  j["best_w2"] = best_w2;
  j["best_step"] = best_step;
  j["checkpoint"] = checkpoint;
  j["final_loss"] = loss_curve.empty() ? 0.0 : loss_curve.back();
  auto& ev = j["evaluations"] = nlohmann::json::array();
  for (const auto& e : evaluations) ev.push_back({{"step", e.step}, {"w2", e.w2}});
  return j.dump(2);
}

}  // namespace levy::train
