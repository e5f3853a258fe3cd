#include "levy/chen.hpp"

#include "levy/metrics.hpp"
#include "levy/parallel.hpp"
#include "levy/stats.hpp"

#include <json.hpp>

#include <cmath>
#include <iomanip>
#include <sstream>

namespace levy {

std::pair<Eigen::VectorXd, Eigen::VectorXd> chen_relation(const Eigen::VectorXd& w1,
                                                          const Eigen::VectorXd& a1,
                                                          const Eigen::VectorXd& w2,
                                                          const Eigen::VectorXd& a2) {
  const int d = static_cast<int>(w1.size());
  if (w2.size() != d || a1.size() != area_dim(d) || a2.size() != area_dim(d))
    throw std::invalid_argument("chen_relation: dimension mismatch");
  Eigen::VectorXd a = a1 + a2;
  int p = 0;
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j, ++p) a(p) += 0.5 * (w1(i) * w2(j) - w2(i) * w1(j));
  return {w1 + w2, a};
}

void chen_relation_rows(const Eigen::MatrixXd& w1, const Eigen::MatrixXd& a1,
                        const Eigen::MatrixXd& w2, const Eigen::MatrixXd& a2,
                        Eigen::MatrixXd& w_out, Eigen::MatrixXd& a_out) {
  const int d = static_cast<int>(w1.cols());
  if (w2.cols() != d || a1.cols() != area_dim(d) || a2.cols() != area_dim(d) ||
      w1.rows() != w2.rows() || a1.rows() != w1.rows() || a2.rows() != w1.rows())
    throw std::invalid_argument("chen_relation_rows: shape mismatch");
  a_out = a1 + a2;
  int p = 0;
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j, ++p)
      a_out.col(p).array() +=
          0.5 * (w1.col(i).array() * w2.col(j).array() - w2.col(i).array() * w1.col(j).array());
  w_out = w1 + w2;
}

LevyBatch chen_combine(const LevyBatch& batch) {
  batch.validate();
  const Eigen::Index n = batch.size();
  if (n % 2 != 0) throw std::invalid_argument("chen_combine needs an even batch size");
  const Eigen::Index half = n / 2;
  const double ws = 1.0 / std::sqrt(2.0);
  LevyBatch out = batch;
  out.sampler = batch.sampler + "+chen";
  chen_relation_rows(ws * batch.w.topRows(half), 0.5 * batch.a.topRows(half),
                     ws * batch.w.bottomRows(half), 0.5 * batch.a.bottomRows(half), out.w, out.a);
  return out;
}

LevyBatch chen_refine(const randkit::RngStream& stream, Eigen::Index n_out, int d, double dt,
                      int depth, const SamplerSpec& base) {
  if (depth < 0 || depth > 24) throw std::invalid_argument("chen_refine depth must be in [0, 24]");
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (d < 1) throw std::invalid_argument("d must be >= 1");
  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const int na = area_dim(d);
  const int n_fine = 1 << depth;
  const double delta = dt / n_fine;
  const bool row_kernel = base.kind != SamplerKind::PairNet && base.kind != SamplerKind::Reference;
  RowMat w_out(n_out, d), a_out(n_out, na);
  parallel_blocks(n_out, 256, [&](std::int64_t, std::int64_t begin, std::int64_t end) {
    RowMat w_fine(n_fine, d), a_fine(n_fine, na);
    for (std::int64_t r = begin; r < end; ++r) {
      auto s = stream.substream(static_cast<std::uint64_t>(r));
      const double sd = std::sqrt(delta);
      for (int m = 0; m < n_fine; ++m)
        for (int j = 0; j < d; ++j) w_fine(m, j) = sd * s.normal();
      if (row_kernel) {
        for (int m = 0; m < n_fine; ++m)
          detail::base_row(base.kind, s, w_fine.row(m).data(), d, delta, a_fine.row(m).data());
      } else {
        a_fine = sample_area(base, s, Eigen::MatrixXd(w_fine), delta).a;
      }
      detail::chen_tree(w_fine.data(), a_fine.data(), n_fine, d);
      w_out.row(r) = w_fine.row(0);
      a_out.row(r) = a_fine.row(0);
    }
  });
  LevyBatch out;
  out.d = d;
  out.dt = dt;
  out.w = w_out;
  out.a = a_out;
  out.sampler = to_string(base.kind) + "+refine";
  out.seed = stream.seed();
  out.depth = depth;
  return out;
}

ChenStudyReport chen_study(const ChenStudyConfig& cfg, const LevyBatch* reference) {
  if (cfg.start_log2 < 2 || cfg.start_log2 > 28)
    throw std::invalid_argument("start_log2 must be in [2, 28]");
  if (!(cfg.start_variance > 0)) throw std::invalid_argument("start_variance must be positive");
  const Eigen::Index n0 = Eigen::Index{1} << cfg.start_log2;
  LevyBatch ref_owned;
  if (!reference) {
    ref_owned = reference_batch(randkit::RngStream(cfg.seed, 1), n0, cfg.d, 1.0,
                                cfg.reference_depth);
    reference = &ref_owned;
  }
  if (reference->d != cfg.d || reference->size() < n0)
    throw std::invalid_argument("reference batch too small or of the wrong dimension");
  const Eigen::MatrixXd ref_area = reference->a / reference->dt;

  LevyBatch x;
  x.d = cfg.d;
  x.dt = 1.0;
  x.sampler = "gaussian";
  x.w.resize(n0, cfg.d);
  x.a.resize(n0, area_dim(cfg.d));
  {
    randkit::RngStream s(cfg.seed, 2);
    randkit::fill_gauss(s, x.w, 1.0);
    randkit::fill_gauss(s, x.a, cfg.start_variance);
  }

  ChenStudyReport report;
  for (int level = 0; x.size() >= std::max(cfg.min_rows, 2); ++level) {
    ChenStudyLevel lv;
    lv.level = level;
    lv.n = x.size();
    lv.w2 = metrics::marginal_w2(x.a, ref_area.topRows(lv.n));
    if (2 * lv.n <= ref_area.rows())
      lv.floor = metrics::marginal_w2(ref_area.topRows(lv.n), ref_area.middleRows(lv.n, lv.n));
    report.levels.push_back(lv);
    if (x.size() % 2 != 0) break;
    x = chen_combine(x);
  }
  // The starting size has no disjoint partner inside the reference.
  if (report.levels.size() > 1 && report.levels[0].floor == 0.0)
    report.levels[0].floor = report.levels[1].floor / std::sqrt(2.0);

  std::vector<double> xs, ys;
  for (auto& lv : report.levels) {
    if (lv.w2 < cfg.floor_factor * lv.floor) break;
    lv.fitted = true;
    xs.push_back(lv.level);
    ys.push_back(std::log2(lv.w2));
  }
  report.fitted_points = static_cast<int>(xs.size());
  if (xs.size() >= 2) {
    const auto fit = stats::fit_line(xs, ys);
    report.fitted_slope = fit.slope;
    report.slope_se = fit.slope_se;
  }
  return report;
}

std::string ChenStudyReport::csv() const {
  std::ostringstream os;
  os << std::setprecision(10) << "level,n,w2,floor,fitted\n";
  for (const auto& lv : levels)
    os << lv.level << ',' << lv.n << ',' << lv.w2 << ',' << lv.floor << ',' << (lv.fitted ? 1 : 0)
       << '\n';
  return os.str();
}

std::string ChenStudyReport::json() const {
  nlohmann::json j;
  j["fitted_slope"] = fitted_slope;
  j["slope_se"] = slope_se;
  j["fitted_points"] = fitted_points;
  j["slope_axis"] = "log2(W2) per halving level";
  return j.dump(2);
}

}  // namespace levy
