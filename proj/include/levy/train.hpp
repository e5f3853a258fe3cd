#pragma once

// Data-free adversarial training: the generator minimises, and a set of
// learnable frequencies maximises, the characteristic-function distance
// between a generated batch and its own Chen-combined halves. Nothing here
// consumes reference samples; evaluation is injected by the caller.

#include "levy/cf.hpp"
#include "levy/pairnet.hpp"

#include <functional>
#include <string>
#include <vector>

namespace levy::train {

struct TrainConfig {
  int d = 4;
  int batch = 4096;  // 2B; must be even
  int iter_d = 1;
  double lr_g = 1e-3;
  double lr_d = 5e-3;
  /// Both rates follow a cosine from lr to lr * lr_final_factor over `steps`.
  double lr_final_factor = 0.1;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  int frequencies = 64;
  double frequency_scale = 1.0;
  int noise_dim = 4;
  std::vector<int> hidden{16, 16, 16};
  double slope = 0.01;
  int steps = 20000;
  std::uint64_t seed = 1;
  int eval_every = 500;
  double h_variance = randkit::kSpaceTimeVariance;
  cf::CfNorm norm = cf::CfNorm::L1;
  bool stop_grad_chen = false;
  /// Direct branch uses the first half of the batch and the Chen branch
  /// combines the second half, so the two empirical CFs are independent.
  bool split_batch = false;
  bool flip = true;

  void validate() const;
  /// Multiplier on both learning rates at generator step `step`.
  double lr_scale(int step) const;
};

/// Adam moments for one flat parameter vector.
struct AdamState {
  Eigen::VectorXd m, v;
  long t = 0;
};

/// One Adam update. direction = -1 descends, +1 ascends.
void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grads, AdamState& state, double lr,
               double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8,
               double direction = -1.0);

Eigen::VectorXd flatten(const std::vector<pairnet::Layer>& layers);
void unflatten(const Eigen::VectorXd& flat, std::vector<pairnet::Layer>& layers);

struct LossResult {
  double loss = 0.0;
  Eigen::VectorXd grad_params;  // flattened like the model's layers
  Eigen::MatrixXd grad_freqs;   // same shape as the frequencies
};

/// Loss and gradients for explicit inputs. w is the unit-time increment
/// batch (2B x d); draw holds every random input of the generator.
LossResult loss_and_grad(const pairnet::GeneratorModel& model, const cf::Frequencies& freqs,
                         const Eigen::MatrixXd& w, const pairnet::GeneratorDraw& draw,
                         const TrainConfig& cfg);

/// Loss value only, for finite-difference checks.
double loss_value(const pairnet::GeneratorModel& model, const cf::Frequencies& freqs,
                  const Eigen::MatrixXd& w, const pairnet::GeneratorDraw& draw,
                  const TrainConfig& cfg);

/// Draws w and the generator inputs from `stream`, then evaluates the loss.
LossResult loss(const pairnet::GeneratorModel& model, const cf::Frequencies& freqs,
                randkit::RngStream& stream, const TrainConfig& cfg);

struct EvalPoint {
  int step = 0;
  double w2 = 0.0;
};

struct TrainReport {
  std::vector<double> loss_curve;  // generator-step losses
  std::vector<EvalPoint> evaluations;
  double best_w2 = 0.0;
  int best_step = -1;
  double seconds = 0.0;
  std::string checkpoint;

  std::string loss_csv() const;
  std::string json() const;
};

/// Held-out quality score of a model (lower is better), e.g. marginal W2.
using Evaluator = std::function<double(const pairnet::GeneratorModel&)>;

struct TrainResult {
  pairnet::GeneratorModel model;  // best by evaluator, else final
  TrainReport report;
};

/// Alternating min-max loop. When `checkpoint_path` is non-empty the best
/// model is saved there each time it improves. A non-null `initial` model
/// replaces the random initialisation and must match the configured shape.
TrainResult train(const TrainConfig& cfg, const Evaluator& evaluator = {},
                  const std::string& checkpoint_path = "",
                  const std::function<void(int, double)>& progress = {},
                  const pairnet::GeneratorModel* initial = nullptr);

}  // namespace levy::train
