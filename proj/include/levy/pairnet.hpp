#pragma once

// Pair-net generator: one small MLP shared across all coordinate pairs, whose
// output for pair (i, j) sees only the per-coordinate inputs of i and j,
// followed by random sign flips of the bridge components.

#include "levy/core.hpp"
#include "levy/rng.hpp"

#include <string>
#include <vector>

namespace levy::pairnet {

struct Layer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct GeneratorModel {
  int d = 4;  // dimension trained at; inference works for any d >= 2
  int noise_dim = 4;
  double slope = 0.01;
  std::vector<Layer> layers;

  int input_width() const { return 2 * (1 + noise_dim); }
  std::vector<int> widths() const;
  Eigen::Index parameter_count() const;
  bool all_finite() const;

  /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights and biases, deterministic
  /// in the stream. Keeps the initial output well below unit scale.
  static GeneratorModel init(int d, int noise_dim, const std::vector<int>& hidden, double slope,
                             randkit::RngStream& stream);
  /// Same architecture, every weight and bias zero.
  static GeneratorModel zeros(int d, int noise_dim, const std::vector<int>& hidden,
                              double slope);
};

inline double leaky_relu(double x, double slope) { return x > 0.0 ? x : slope * x; }

/// Intermediate values kept for the backward pass. pre[l] is the affine output
/// of layer l, post[l] its activation (post.back() is the network output).
struct ForwardCache {
  Eigen::MatrixXd input;
  std::vector<Eigen::MatrixXd> pre;
  std::vector<Eigen::MatrixXd> post;
};

/// Rows are samples. Hidden layers use LeakyReLU, the last layer is linear.
Eigen::VectorXd mlp_forward(const GeneratorModel& model, const Eigen::MatrixXd& input,
                            ForwardCache* cache = nullptr);

/// Parameter gradients given d(loss)/d(output) per row; optional input gradient.
std::vector<Layer> mlp_backward(const GeneratorModel& model, const ForwardCache& cache,
                                const Eigen::VectorXd& grad_output,
                                Eigen::MatrixXd* grad_input = nullptr);

/// Stacked pair inputs: row p*n + s holds [h_i, z_i, h_j, z_j] for pair p =
/// (i, j) and sample s. z is n x (d * noise_dim), coordinate-major.
Eigen::MatrixXd pair_inputs(const Eigen::MatrixXd& h, const Eigen::MatrixXd& z, int noise_dim);

/// Space-space area proposal per pair, n x d(d-1)/2.
Eigen::MatrixXd pairnet_b(const GeneratorModel& model, const Eigen::MatrixXd& h,
                          const Eigen::MatrixXd& z, ForwardCache* cache = nullptr);

/// Entry (i, j) = xi0 * (xi_i h_i w_j - w_i xi_j h_j + xi_i xi_j b_ij), per row.
Eigen::MatrixXd bridge_flip(const Eigen::MatrixXd& w, const Eigen::MatrixXd& h,
                            const Eigen::MatrixXd& b, const Eigen::VectorXd& xi0,
                            const Eigen::MatrixXd& xi);

/// Random inputs consumed by one generator call at unit time scale.
struct GeneratorDraw {
  Eigen::MatrixXd h;    // n x d, N(0, 1/12)
  Eigen::MatrixXd z;    // n x (d * noise_dim), N(0, 1)
  Eigen::VectorXd xi0;  // n, +-1
  Eigen::MatrixXd xi;   // n x d, +-1
};

GeneratorDraw draw_inputs(randkit::RngStream& stream, Eigen::Index n, int d, int noise_dim,
                          double h_variance = randkit::kSpaceTimeVariance);

struct GenerateOptions {
  bool flip = true;  // false: plain expansion h w - w h + b, no sign flips
  double h_variance = randkit::kSpaceTimeVariance;
  Eigen::Index block = 4096;  // rows per derived substream
};

/// Areas for the given increments at time scale dt: rows are processed in
/// fixed blocks, block k drawing from stream.substream(k).
LevyBatch generate(const GeneratorModel& model, const randkit::RngStream& stream,
                   const Eigen::MatrixXd& w, double dt, const GenerateOptions& opts = {});

/// Unit-scale areas from explicit draws (no randomness consumed).
Eigen::MatrixXd generate_from(const GeneratorModel& model, const Eigen::MatrixXd& w_unit,
                              const GeneratorDraw& draw, bool flip = true,
                              ForwardCache* cache = nullptr);

/// All 2^(d+1) sign patterns for each row of (w, h, b): output row
/// s * 2^(d+1) + m uses pattern m (bit 0 is xi0, bit k+1 is xi_k; set bit = -1).
Eigen::MatrixXd sign_exhaustive_areas(const Eigen::MatrixXd& w, const Eigen::MatrixXd& h,
                                      const Eigen::MatrixXd& b);

void save(const GeneratorModel& model, const std::string& path);
GeneratorModel load(const std::string& path);
/// Plain-text mirror for inspection.
std::string to_json(const GeneratorModel& model);

}  // namespace levy::pairnet
