#pragma once

// Distributional quality metrics for Lévy-area batches. Table-style metrics
// act on the area columns only, normalised to unit time (areas divided by dt).

#include "levy/core.hpp"
#include "levy/rng.hpp"
#include "levy/samplers.hpp"

#include <functional>
#include <string>
#include <vector>

namespace levy::metrics {

/// Mean over columns of the 1D W2 distance between empirical marginals. The
/// larger sample is truncated to the smaller one's leading rows.
double marginal_w2(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y);
double marginal_w2(const LevyBatch& x, const LevyBatch& y);

/// Unit-time fourth moment E[A_a A_b A_c A_d] of exact Lévy area, any d.
/// Area indices follow the flattened upper-triangle order.
double exact_area_moment4(int d, int a, int b, int c, int e);

/// Fourth cross-moment targets for all index multisets a <= b <= c <= e.
struct Moment4Index {
  int a, b, c, e;
};
std::vector<Moment4Index> moment4_indices(int n_area);

/// Empirical unit-time fourth cross moments, in moment4_indices order.
Eigen::VectorXd empirical_moments4(const Eigen::MatrixXd& area_unit);

/// Max over index tuples of |empirical - exact| fourth cross moment.
double fourth_moment_metric(const LevyBatch& batch);

enum class KernelType { Gaussian, Polynomial };

struct KernelSpec {
  KernelType type = KernelType::Gaussian;
  double bandwidth = 0.0;  // Gaussian; <= 0 selects the median heuristic
  int degree = 3;          // Polynomial: (x.y / dim + offset)^degree
  double offset = 1.0;
  int random_features = 1024;     // Gaussian, beyond exact_limit rows
  Eigen::Index exact_limit = 4096;
  std::uint64_t feature_seed = 0x5eedf00d;
};

KernelType parse_kernel(const std::string& name);

struct MmdResult {
  double value = 0.0;  // unbiased squared MMD; may be slightly negative
  double se = 0.0;     // bootstrap standard error (0 if no resamples)
  double null_lo = 0.0, null_hi = 0.0;  // relabeling null band (0 if disabled)
  double bandwidth = 0.0;
  bool exact = true;  // false when random Fourier features were used
};

struct MmdOptions {
  int bootstrap = 20;
  int permutations = 0;
  std::uint64_t seed = 1;
};

/// Squared MMD between the rows of x and y. Exact O(n^2) U-statistic for small
/// inputs; an exact finite feature map for the polynomial kernel; a random
/// Fourier feature kernel (whose expectation is the Gaussian kernel) otherwise.
MmdResult mmd(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const KernelSpec& kernel,
              const MmdOptions& opts = {});

/// Median pairwise distance of the pooled leading rows (at most 1000 each).
double median_bandwidth(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y);

/// Kernel value used by the exact estimator.
double kernel_value(const KernelSpec& kernel, const Eigen::Ref<const Eigen::RowVectorXd>& x,
                    const Eigen::Ref<const Eigen::RowVectorXd>& y);

struct MetricWithSe {
  double value = 0.0;
  double se = 0.0;
};

/// Marginal W2 with a paired bootstrap (rows resampled with replacement).
MetricWithSe marginal_w2_bootstrap(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                                   int resamples, std::uint64_t seed);
/// Fourth-moment metric with a Poisson bootstrap.
MetricWithSe fourth_moment_bootstrap(const LevyBatch& batch, int resamples, std::uint64_t seed);

struct EvalRow {
  std::string sampler;
  int d = 0;
  Eigen::Index n = 0;
  int reference_depth = 0;
  MetricWithSe w2;
  double w2_floor = 0.0;  // same statistic between two halves of the reference, per sqrt(2)
  MetricWithSe fourth;
  MmdResult mmd_gaussian;
  MmdResult mmd_polynomial;
  double seconds_per_2p20 = 0.0;  // area generation only; not part of primary output
};

struct EvalConfig {
  std::vector<SamplerSpec> samplers;
  std::vector<int> dims{4};
  Eigen::Index n = Eigen::Index{1} << 20;
  int reference_depth = 10;
  std::uint64_t seed = 2024;
  int bootstrap = 20;
};

/// Runs every metric for every sampler against a reference-oracle batch per d.
/// `reference_provider` may supply cached reference batches.
using ReferenceProvider = std::function<LevyBatch(int d, Eigen::Index n, int depth)>;
std::vector<EvalRow> evaluate(const EvalConfig& cfg, const ReferenceProvider& reference = {});

std::string eval_csv(const std::vector<EvalRow>& rows);
std::string eval_json(const std::vector<EvalRow>& rows);

}  // namespace levy::metrics
