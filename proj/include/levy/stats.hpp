#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <vector>

namespace levy::stats {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;  // zero when fewer than three points
  int points = 0;
};

/// Ordinary least squares y = intercept + slope * x. Needs >= 2 points.
LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

/// Sample mean and its standard error.
MeanSe mean_se(const Eigen::Ref<const Eigen::VectorXd>& x);

/// Unbiased sample variance.
double sample_variance(const Eigen::Ref<const Eigen::VectorXd>& x);

/// Two-sided Kolmogorov-Smirnov statistic of a sample against a CDF.
template <typename Cdf>
double ks_statistic(Eigen::VectorXd sample, Cdf&& cdf) {
  std::sort(sample.data(), sample.data() + sample.size());
  const double n = static_cast<double>(sample.size());
  double dmax = 0.0;
  for (Eigen::Index i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample(i));
    dmax = std::max({dmax, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return dmax;
}

/// Two-sample Kolmogorov-Smirnov statistic.
double ks_two_sample(Eigen::VectorXd a, Eigen::VectorXd b);

/// Asymptotic KS p-value for statistic `dstat` at effective size n_eff.
double ks_pvalue(double dstat, double n_eff);

}  // namespace levy::stats
