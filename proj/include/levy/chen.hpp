#pragma once

#include "levy/core.hpp"
#include "levy/rng.hpp"
#include "levy/samplers.hpp"

#include <string>
#include <utility>
#include <vector>

namespace levy {

/// Concatenates (w1, a1) over [s, u] with (w2, a2) over [u, t]. No rescaling.
std::pair<Eigen::VectorXd, Eigen::VectorXd> chen_relation(const Eigen::VectorXd& w1,
                                                          const Eigen::VectorXd& a1,
                                                          const Eigen::VectorXd& w2,
                                                          const Eigen::VectorXd& a2);

/// Row-wise chen_relation over matching batches of increments and areas.
void chen_relation_rows(const Eigen::MatrixXd& w1, const Eigen::MatrixXd& a1,
                        const Eigen::MatrixXd& w2, const Eigen::MatrixXd& a2,
                        Eigen::MatrixXd& w_out, Eigen::MatrixXd& a_out);

/// Pairs row k with row k + n/2, rescales each half to half the time scale
/// (w / sqrt 2, a / 2) and concatenates. Output has n/2 rows at the same dt.
LevyBatch chen_combine(const LevyBatch& batch);

/// Per-output-row dyadic tree of 2^depth independent base samples at time
/// step dt / 2^depth. Row r draws from stream.substream(r).
LevyBatch chen_refine(const randkit::RngStream& stream, Eigen::Index n_out, int d, double dt,
                      int depth, const SamplerSpec& base);

struct ChenStudyConfig {
  int d = 4;
  int start_log2 = 20;
  /// Unit-time variance of the Gaussian starting areas.
  double start_variance = 1.0;
  int reference_depth = 10;
  std::uint64_t seed = 606;
  /// A level enters the fit while its W2 is at least this multiple of the
  /// two-sample floor at that size.
  double floor_factor = 3.0;
  int min_rows = 2;  // stop once fewer rows remain
};

struct ChenStudyLevel {
  int level = 0;
  Eigen::Index n = 0;
  double w2 = 0.0;
  double floor = 0.0;
  bool fitted = false;
};

struct ChenStudyReport {
  std::vector<ChenStudyLevel> levels;
  double fitted_slope = 0.0;  // d log2(W2) / d level
  double slope_se = 0.0;
  int fitted_points = 0;

  std::string csv() const;
  std::string json() const;
};

/// Iterated halving from Gaussian starting areas, scored by marginal W2
/// against a reference-oracle batch of the starting size.
ChenStudyReport chen_study(const ChenStudyConfig& cfg, const LevyBatch* reference = nullptr);

}  // namespace levy
