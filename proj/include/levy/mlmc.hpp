#pragma once

// Multilevel Monte Carlo for the log-Heston call. Level l uses 2^l steps of
// size T / 2^l and n0 / 2^l paths; the coarse path of each level consumes
// pairwise-summed increments and Chen-combined fine areas.

#include "levy/heston.hpp"
#include "levy/samplers.hpp"

#include <optional>
#include <string>
#include <vector>

namespace levy::mlmc {

enum class Scheme { Milstein, Antithetic, Strang };

Scheme parse_scheme(const std::string& name);
std::string to_string(Scheme scheme);

struct MlmcConfig {
  Scheme scheme = Scheme::Strang;
  /// Fake-area sampler for Strang; empty means zero area on both levels.
  std::optional<SamplerSpec> area;
  heston::HestonParams params;
  int levels = 7;  // finest level L
  Eigen::Index n0 = Eigen::Index{1} << 22;
  std::uint64_t seed = 1;
  std::uint64_t stream_id = 0;
  Eigen::Index block_paths = 1024;
  /// Oracle price for error columns; computed by quadrature when empty.
  std::optional<double> reference_price;
  /// Rate fits skip levels below this and levels with var_se / var above
  /// max_relative_se.
  int fit_from_level = 2;
  double max_relative_se = 0.25;

  std::string area_name() const;
  void validate() const;
};

struct MlmcLevel {
  int level = 0;
  double h = 0.0;
  Eigen::Index n = 0;
  double mean = 0.0;       // E[phi_l - phi_{l-1}]
  double variance = 0.0;   // Var[phi_l - phi_{l-1}]
  double variance_se = 0.0;
  double fine_mean = 0.0;
  double fine_variance = 0.0;
  double cumulative = 0.0;  // telescoped estimate through this level
  double cumulative_se = 0.0;
  double error = 0.0;       // cumulative - reference price
};

struct MlmcReport {
  std::string scheme;
  std::string area;
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
  double reference_price = 0.0;
  std::vector<MlmcLevel> levels;
  double variance_slope = 0.0;  // Var ~ h^slope
  double variance_slope_se = 0.0;
  int variance_points = 0;
  double weak_slope = 0.0;  // |error| ~ h^slope
  double weak_slope_se = 0.0;
  int weak_points = 0;
  /// Marginal W2 between unit-time sampler output and its Chen-combine;
  /// negative when there is no area sampler.
  double chen_gap = -1.0;

  double estimate() const { return levels.empty() ? 0.0 : levels.back().cumulative; }
  std::string csv() const;
  std::string json() const;
};

MlmcReport mlmc(const MlmcConfig& cfg);

/// Fits log|error| against log h over levels >= from_level whose |error|
/// exceeds `sigmas` standard errors. Returns slope, se and point count.
struct RateFit {
  double slope = 0.0;
  double slope_se = 0.0;
  int points = 0;
};
RateFit fit_weak_rate(const std::vector<double>& h, const std::vector<double>& error,
                      const std::vector<double>& error_se, int from_level, double sigmas = 3.0);
RateFit fit_variance_rate(const std::vector<MlmcLevel>& levels, int from_level,
                          double max_relative_se);

struct WeakStudyConfig {
  MlmcConfig base;
  int repetitions = 10;
  double significance_sigmas = 3.0;
};

struct WeakStudyLevel {
  int level = 0;
  double h = 0.0;
  double estimate = 0.0;  // mean over repetitions of the cumulative estimate
  double estimate_se = 0.0;
  double error = 0.0;
  double mean_variance = 0.0;  // mean level variance over repetitions
};

struct WeakStudyReport {
  std::string scheme;
  std::string area;
  double reference_price = 0.0;
  std::vector<WeakStudyLevel> levels;
  RateFit weak;
  std::vector<double> variance_slopes;  // one per repetition
  double variance_slope_mean = 0.0;
  double variance_slope_se = 0.0;
  double chen_gap = -1.0;

  std::string csv() const;
  std::string json() const;
};

/// Repetition r runs mlmc with stream_id = base.stream_id + r.
WeakStudyReport weak_error_study(const WeakStudyConfig& cfg);

struct MonteCarloConfig {
  Scheme scheme = Scheme::Strang;  // Antithetic averages each path with its swapped twin
  std::optional<SamplerSpec> area;
  heston::HestonParams params;
  Eigen::Index steps = 32;
  Eigen::Index paths = Eigen::Index{1} << 20;
  std::uint64_t seed = 1;
  std::uint64_t stream_id = 0;
  Eigen::Index block_paths = 1024;
};

struct MonteCarloResult {
  double mean = 0.0;
  double se = 0.0;
  Eigen::Index paths = 0;
  Eigen::Index steps = 0;
};

/// Single-level Monte Carlo price with `steps` equal steps per path.
MonteCarloResult monte_carlo(const MonteCarloConfig& cfg);

namespace detail {

/// Fine rows 2k and 2k+1 become coarse row k: increments summed, areas
/// Chen-combined. Rows of w are (dw1, dw2); `area` may be empty for zero area.
void coarsen(const Eigen::MatrixXd& w, const Eigen::VectorXd& area, Eigen::MatrixXd& w_coarse,
             Eigen::VectorXd& area_coarse);

/// Fine path with each consecutive pair of increments swapped.
Eigen::MatrixXd antithetic_swap(const Eigen::MatrixXd& w);

}  // namespace detail

}  // namespace levy::mlmc
