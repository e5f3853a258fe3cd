#include "levy/mlmc.hpp"

#include "levy/chen.hpp"
#include "levy/metrics.hpp"
#include "levy/parallel.hpp"
#include "levy/stats.hpp"

#include <json.hpp>

#include <cmath>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace levy::mlmc {

namespace {

constexpr Eigen::Index kChenGapRows = Eigen::Index{1} << 16;

struct Sums {
  double d1 = 0, d2 = 0, d3 = 0, d4 = 0;  // raw power sums of the level difference
  double f1 = 0, f2 = 0;                  // fine payoff
  void add(double diff, double fine) {
    const double sq = diff * diff;
    d1 += diff;
    d2 += sq;
    d3 += sq * diff;
    d4 += sq * sq;
    f1 += fine;
    f2 += fine * fine;
  }
  void merge(const Sums& o) {
    d1 += o.d1;
    d2 += o.d2;
    d3 += o.d3;
    d4 += o.d4;
    f1 += o.f1;
    f2 += o.f2;
  }
};

double checked(double value) {
  if (!std::isfinite(value)) throw std::runtime_error("mlmc: non-finite payoff");
  return value;
}

double terminal_milstein(const heston::HestonParams& p, const Eigen::MatrixXd& w, Eigen::Index begin,
                         Eigen::Index steps, double h) {
  heston::State s{p.U0, p.V0};
  for (Eigen::Index k = begin; k < begin + steps; ++k)
    s = heston::milstein_step(p, s, w(k, 0), w(k, 1), h);
  return checked(heston::payoff(p, s.u));
}

double terminal_strang(const heston::HestonParams& p, const Eigen::MatrixXd& w,
                       const Eigen::VectorXd& area, Eigen::Index begin, Eigen::Index steps,
                       double h) {
  heston::State s{p.U0, p.V0};
  const bool has_area = area.size() > 0;
  for (Eigen::Index k = begin; k < begin + steps; ++k)
    s = heston::strang_step(p, s, w(k, 0), w(k, 1), has_area ? area(k) : 0.0, h);
  return checked(heston::payoff(p, s.u));
}

double chen_gap(const SamplerSpec& spec, const randkit::RngStream& stream) {
  const LevyBatch big = sample_joint(spec, stream.substream(0), 2 * kChenGapRows, 2, 1.0);
  const LevyBatch fresh = sample_joint(spec, stream.substream(1), kChenGapRows, 2, 1.0);
  return metrics::marginal_w2(fresh, chen_combine(big));
}

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

}  // namespace

Scheme parse_scheme(const std::string& name) {
  if (name == "milstein") return Scheme::Milstein;
  if (name == "antithetic") return Scheme::Antithetic;
  if (name == "strang") return Scheme::Strang;
  throw std::invalid_argument("unknown scheme: " + name);
}

std::string to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::Milstein: return "milstein";
    case Scheme::Antithetic: return "antithetic";
    case Scheme::Strang: return "strang";
  }
  return "unknown";
}

std::string MlmcConfig::area_name() const { return area ? levy::to_string(area->kind) : "none"; }

void MlmcConfig::validate() const {
  params.validate();
  if (levels < 0 || levels > 30) throw std::invalid_argument("mlmc: levels must be in [0, 30]");
  if (n0 < 1 || (n0 >> levels) < 1)
    throw std::invalid_argument("mlmc: n0 too small for the requested number of levels");
  if (block_paths < 1) throw std::invalid_argument("mlmc: block_paths must be positive");
  if (area && scheme != Scheme::Strang)
    throw std::invalid_argument("mlmc: area samplers apply to the strang scheme only");
  if (area && area->kind == SamplerKind::PairNet && !area->model)
    throw std::invalid_argument("mlmc: pairnet area needs a model");
}

namespace detail {

void coarsen(const Eigen::MatrixXd& w, const Eigen::VectorXd& area, Eigen::MatrixXd& w_coarse,
             Eigen::VectorXd& area_coarse) {
  if (w.rows() % 2 != 0) throw std::invalid_argument("coarsen: odd fine-step count");
  const Eigen::Index n = w.rows() / 2;
  w_coarse.resize(n, w.cols());
  const bool has_area = area.size() > 0;
  area_coarse.resize(has_area ? n : 0);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index a = 2 * k, b = 2 * k + 1;
    w_coarse.row(k) = w.row(a) + w.row(b);
    if (has_area)
      area_coarse(k) = area(a) + area(b) + 0.5 * (w(a, 0) * w(b, 1) - w(a, 1) * w(b, 0));
  }
}

Eigen::MatrixXd antithetic_swap(const Eigen::MatrixXd& w) {
  if (w.rows() % 2 != 0) throw std::invalid_argument("antithetic_swap: odd fine-step count");
  Eigen::MatrixXd out(w.rows(), w.cols());
  for (Eigen::Index k = 0; k < w.rows(); k += 2) {
    out.row(k) = w.row(k + 1);
    out.row(k + 1) = w.row(k);
  }
  return out;
}

}  // namespace detail

RateFit fit_weak_rate(const std::vector<double>& h, const std::vector<double>& error,
                      const std::vector<double>& error_se, int from_level, double sigmas) {
  std::vector<double> x, y, y_se;
  for (std::size_t l = static_cast<std::size_t>(std::max(from_level, 0)); l < h.size(); ++l) {
    if (std::abs(error[l]) > sigmas * error_se[l] && error[l] != 0.0) {
      x.push_back(std::log2(h[l]));
      y.push_back(std::log2(std::abs(error[l])));
      y_se.push_back(error_se[l] / (std::abs(error[l]) * std::numbers::ln2));
    }
  }
  RateFit out;
  out.points = static_cast<int>(x.size());
  if (x.size() >= 2) {
    const stats::LinearFit f = stats::fit_line(x, y);
    out.slope = f.slope;
    // Residual scatter is undefined for two points, so also propagate the
    // measured errors through the log and keep the larger spread.
    double mx = 0.0;
    for (double v : x) mx += v;
    mx /= static_cast<double>(x.size());
    double sxx = 0.0, var = 0.0;
    for (double v : x) sxx += (v - mx) * (v - mx);
    for (std::size_t i = 0; i < x.size(); ++i)
      var += (x[i] - mx) * (x[i] - mx) * y_se[i] * y_se[i];
    out.slope_se = std::max(f.slope_se, std::sqrt(var) / sxx);
  }
  return out;
}

RateFit fit_variance_rate(const std::vector<MlmcLevel>& levels, int from_level,
                          double max_relative_se) {
  std::vector<double> x, y;
  for (const MlmcLevel& lv : levels) {
    if (lv.level < from_level || !(lv.variance > 0.0)) continue;
    if (lv.variance_se / lv.variance > max_relative_se) continue;
    x.push_back(std::log2(lv.h));
    y.push_back(std::log2(lv.variance));
  }
  RateFit out;
  out.points = static_cast<int>(x.size());
  if (x.size() >= 2) {
    const stats::LinearFit f = stats::fit_line(x, y);
    out.slope = f.slope;
    out.slope_se = f.slope_se;
  }
  return out;
}

MlmcReport mlmc(const MlmcConfig& cfg) {
  cfg.validate();
  const heston::HestonParams& p = cfg.params;
  const randkit::RngStream root(cfg.seed, cfg.stream_id);

  MlmcReport report;
  report.scheme = to_string(cfg.scheme);
  report.area = cfg.area_name();
  report.seed = cfg.seed;
  report.stream_id = cfg.stream_id;
  report.reference_price =
      cfg.reference_price ? *cfg.reference_price : heston::heston_price(p).price;

  double cumulative = 0.0, cumulative_var = 0.0;
  for (int level = 0; level <= cfg.levels; ++level) {
    const Eigen::Index steps = Eigen::Index{1} << level;
    const Eigen::Index paths = cfg.n0 >> level;
    const double h = p.T / static_cast<double>(steps);
    const randkit::RngStream level_stream = root.substream(static_cast<std::uint64_t>(level));
    const Eigen::Index n_blocks = (paths + cfg.block_paths - 1) / cfg.block_paths;
    std::vector<Sums> block_sums(static_cast<std::size_t>(n_blocks));

    parallel_blocks(paths, cfg.block_paths, [&](std::int64_t block, std::int64_t begin,
                                                std::int64_t end) {
      const randkit::RngStream bs = level_stream.substream(static_cast<std::uint64_t>(block));
      const Eigen::Index count = end - begin;
      Eigen::MatrixXd w(count * steps, 2);
      randkit::RngStream ws = bs.substream(0);
      randkit::fill_gauss(ws, w, h);
      Eigen::VectorXd area;
      if (cfg.area) area = sample_area(*cfg.area, bs.substream(1), w, h).a.col(0);

      Eigen::MatrixXd w_coarse, w_anti;
      Eigen::VectorXd area_coarse;
      if (level > 0) {
        detail::coarsen(w, area, w_coarse, area_coarse);
        if (cfg.scheme == Scheme::Antithetic) w_anti = detail::antithetic_swap(w);
      }
      Sums& sums = block_sums[static_cast<std::size_t>(block)];
      for (Eigen::Index i = 0; i < count; ++i) {
        const Eigen::Index fb = i * steps, cb = i * steps / 2;
        double fine = 0.0, diff = 0.0;
        switch (cfg.scheme) {
          case Scheme::Milstein:
            fine = terminal_milstein(p, w, fb, steps, h);
            diff = level > 0 ? fine - terminal_milstein(p, w_coarse, cb, steps / 2, 2 * h) : fine;
            break;
          case Scheme::Antithetic:
            fine = terminal_milstein(p, w, fb, steps, h);
            diff = level > 0 ? 0.5 * (fine + terminal_milstein(p, w_anti, fb, steps, h)) -
                                   terminal_milstein(p, w_coarse, cb, steps / 2, 2 * h)
                             : fine;
            break;
          case Scheme::Strang:
            fine = terminal_strang(p, w, area, fb, steps, h);
            diff = level > 0
                       ? fine - terminal_strang(p, w_coarse, area_coarse, cb, steps / 2, 2 * h)
                       : fine;
            break;
        }
        sums.add(diff, fine);
      }
    });

    Sums total;
    for (const Sums& s : block_sums) total.merge(s);
    const double n = static_cast<double>(paths);
    MlmcLevel lv;
    lv.level = level;
    lv.h = h;
    lv.n = paths;
    lv.mean = total.d1 / n;
    const double mu = lv.mean;
    const double raw2 = total.d2 / n, raw3 = total.d3 / n, raw4 = total.d4 / n;
    const double central2 = std::max(raw2 - mu * mu, 0.0);
    const double central4 = raw4 - 4 * mu * raw3 + 6 * mu * mu * raw2 - 3 * mu * mu * mu * mu;
    lv.variance = paths > 1 ? central2 * n / (n - 1) : 0.0;
    lv.variance_se = std::sqrt(std::max(central4 - central2 * central2, 0.0) / n);
    lv.fine_mean = total.f1 / n;
    lv.fine_variance =
        paths > 1 ? std::max(total.f2 / n - lv.fine_mean * lv.fine_mean, 0.0) * n / (n - 1) : 0.0;
    cumulative += lv.mean;
    cumulative_var += lv.variance / n;
    lv.cumulative = cumulative;
    lv.cumulative_se = std::sqrt(cumulative_var);
    lv.error = cumulative - report.reference_price;
    report.levels.push_back(lv);
  }

  const RateFit vfit = fit_variance_rate(report.levels, cfg.fit_from_level, cfg.max_relative_se);
  report.variance_slope = vfit.slope;
  report.variance_slope_se = vfit.slope_se;
  report.variance_points = vfit.points;
  std::vector<double> hs, errs, ses;
  for (const MlmcLevel& lv : report.levels) {
    hs.push_back(lv.h);
    errs.push_back(lv.error);
    ses.push_back(lv.cumulative_se);
  }
  const RateFit wfit = fit_weak_rate(hs, errs, ses, cfg.fit_from_level);
  report.weak_slope = wfit.slope;
  report.weak_slope_se = wfit.slope_se;
  report.weak_points = wfit.points;
  if (cfg.area) report.chen_gap = chen_gap(*cfg.area, root.substream(~std::uint64_t{0}));
  return report;
}

MonteCarloResult monte_carlo(const MonteCarloConfig& cfg) {
  cfg.params.validate();
  if (cfg.steps < 1 || cfg.paths < 2 || cfg.block_paths < 1)
    throw std::invalid_argument("monte_carlo: steps >= 1, paths >= 2 and block_paths >= 1 required");
  if (cfg.area && cfg.scheme != Scheme::Strang)
    throw std::invalid_argument("monte_carlo: area samplers apply to the strang scheme only");
  if (cfg.scheme == Scheme::Antithetic && cfg.steps % 2 != 0)
    throw std::invalid_argument("monte_carlo: antithetic pairing needs an even step count");
  const heston::HestonParams& p = cfg.params;
  const double h = p.T / static_cast<double>(cfg.steps);
  // Same stream layout as MLMC level 0, so one step reproduces that level.
  const randkit::RngStream root = randkit::RngStream(cfg.seed, cfg.stream_id).substream(0);
  const Eigen::Index n_blocks = (cfg.paths + cfg.block_paths - 1) / cfg.block_paths;
  std::vector<Sums> block_sums(static_cast<std::size_t>(n_blocks));
  parallel_blocks(cfg.paths, cfg.block_paths, [&](std::int64_t block, std::int64_t begin,
                                                  std::int64_t end) {
    const randkit::RngStream bs = root.substream(static_cast<std::uint64_t>(block));
    const Eigen::Index count = end - begin;
    Eigen::MatrixXd w(count * cfg.steps, 2);
    randkit::RngStream ws = bs.substream(0);
    randkit::fill_gauss(ws, w, h);
    Eigen::VectorXd area;
    if (cfg.area) area = sample_area(*cfg.area, bs.substream(1), w, h).a.col(0);
    Eigen::MatrixXd w_anti;
    if (cfg.scheme == Scheme::Antithetic) w_anti = detail::antithetic_swap(w);
    Sums& sums = block_sums[static_cast<std::size_t>(block)];
    for (Eigen::Index i = 0; i < count; ++i) {
      const Eigen::Index fb = i * cfg.steps;
      double value = 0.0;
      switch (cfg.scheme) {
        case Scheme::Milstein: value = terminal_milstein(p, w, fb, cfg.steps, h); break;
        case Scheme::Antithetic:
          value = 0.5 * (terminal_milstein(p, w, fb, cfg.steps, h) +
                         terminal_milstein(p, w_anti, fb, cfg.steps, h));
          break;
        case Scheme::Strang: value = terminal_strang(p, w, area, fb, cfg.steps, h); break;
      }
      sums.add(value, value);
    }
  });
  Sums total;
  for (const Sums& s : block_sums) total.merge(s);
  const double n = static_cast<double>(cfg.paths);
  MonteCarloResult out;
  out.paths = cfg.paths;
  out.steps = cfg.steps;
  out.mean = total.d1 / n;
  const double var = std::max(total.d2 / n - out.mean * out.mean, 0.0) * n / (n - 1);
  out.se = std::sqrt(var / n);
  return out;
}

std::string MlmcReport::csv() const {
  std::ostringstream os;
  os << "level,h,n,mean,variance,variance_se,fine_mean,fine_variance,cumulative,cumulative_se,"
        "error\n";
  for (const MlmcLevel& lv : levels)
    os << lv.level << ',' << fmt(lv.h) << ',' << lv.n << ',' << fmt(lv.mean) << ','
       << fmt(lv.variance) << ',' << fmt(lv.variance_se) << ',' << fmt(lv.fine_mean) << ','
       << fmt(lv.fine_variance) << ',' << fmt(lv.cumulative) << ',' << fmt(lv.cumulative_se)
       << ',' << fmt(lv.error) << '\n';
  return os.str();
}

std::string MlmcReport::json() const {
  nlohmann::ordered_json j;
  j["scheme"] = scheme;
  j["area"] = area;
  j["seed"] = seed;
  j["stream_id"] = stream_id;
  j["reference_price"] = reference_price;
  j["estimate"] = estimate();
  j["variance_slope"] = variance_slope;
  j["variance_slope_se"] = variance_slope_se;
  j["variance_points"] = variance_points;
  j["weak_slope"] = weak_slope;
  j["weak_slope_se"] = weak_slope_se;
  j["weak_points"] = weak_points;
  j["chen_gap"] = chen_gap;
  auto& arr = j["levels"] = nlohmann::ordered_json::array();
  for (const MlmcLevel& lv : levels)
    arr.push_back({{"level", lv.level}, {"h", lv.h}, {"n", lv.n}, {"mean", lv.mean},
                   {"variance", lv.variance}, {"variance_se", lv.variance_se},
                   {"fine_mean", lv.fine_mean}, {"fine_variance", lv.fine_variance},
                   {"cumulative", lv.cumulative}, {"cumulative_se", lv.cumulative_se},
                   {"error", lv.error}});
  return j.dump(2);
}

WeakStudyReport weak_error_study(const WeakStudyConfig& cfg) {
  if (cfg.repetitions < 2) throw std::invalid_argument("weak_error_study: need >= 2 repetitions");
  WeakStudyReport out;
  std::vector<MlmcReport> runs;
  for (int r = 0; r < cfg.repetitions; ++r) {
    MlmcConfig c = cfg.base;
    c.stream_id = cfg.base.stream_id + static_cast<std::uint64_t>(r);
    if (r > 0) c.reference_price = runs.front().reference_price;
    runs.push_back(mlmc(c));
    out.variance_slopes.push_back(runs.back().variance_slope);
  }
  out.scheme = runs.front().scheme;
  out.area = runs.front().area;
  out.reference_price = runs.front().reference_price;
  out.chen_gap = runs.front().chen_gap;
  const auto n_levels = runs.front().levels.size();
  const double reps = static_cast<double>(cfg.repetitions);
  std::vector<double> hs, errs, ses;
  for (std::size_t l = 0; l < n_levels; ++l) {
    Eigen::VectorXd est(cfg.repetitions);
    double var_sum = 0.0;
    for (int r = 0; r < cfg.repetitions; ++r) {
      est(r) = runs[static_cast<std::size_t>(r)].levels[l].cumulative;
      var_sum += runs[static_cast<std::size_t>(r)].levels[l].variance;
    }
    const stats::MeanSe ms = stats::mean_se(est);
    WeakStudyLevel wl;
    wl.level = static_cast<int>(l);
    wl.h = runs.front().levels[l].h;
    wl.estimate = ms.mean;
    wl.estimate_se = ms.se;
    wl.error = ms.mean - out.reference_price;
    wl.mean_variance = var_sum / reps;
    out.levels.push_back(wl);
    hs.push_back(wl.h);
    errs.push_back(wl.error);
    ses.push_back(wl.estimate_se);
  }
  out.weak = fit_weak_rate(hs, errs, ses, cfg.base.fit_from_level, cfg.significance_sigmas);
  const stats::MeanSe vs = stats::mean_se(
      Eigen::Map<const Eigen::VectorXd>(out.variance_slopes.data(), cfg.repetitions));
  out.variance_slope_mean = vs.mean;
  out.variance_slope_se = vs.se;
  return out;
}

std::string WeakStudyReport::csv() const {
  std::ostringstream os;
  os << "level,h,estimate,estimate_se,error,mean_variance\n";
  for (const WeakStudyLevel& lv : levels)
    os << lv.level << ',' << fmt(lv.h) << ',' << fmt(lv.estimate) << ',' << fmt(lv.estimate_se)
       << ',' << fmt(lv.error) << ',' << fmt(lv.mean_variance) << '\n';
  return os.str();
}

std::string WeakStudyReport::json() const {
  nlohmann::ordered_json j;
  j["scheme"] = scheme;
  j["area"] = area;
  j["reference_price"] = reference_price;
  j["weak_slope"] = weak.slope;
  j["weak_slope_se"] = weak.slope_se;
  j["weak_points"] = weak.points;
  j["variance_slopes"] = variance_slopes;
  j["variance_slope_mean"] = variance_slope_mean;
  j["variance_slope_se"] = variance_slope_se;
  j["chen_gap"] = chen_gap;
  auto& arr = j["levels"] = nlohmann::ordered_json::array();
  for (const WeakStudyLevel& lv : levels)
    arr.push_back({{"level", lv.level}, {"h", lv.h}, {"estimate", lv.estimate},
                   {"estimate_se", lv.estimate_se}, {"error", lv.error},
                   {"mean_variance", lv.mean_variance}});
  return j.dump(2);
}

}  // namespace levy::mlmc
