#include "levy/metrics.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>

namespace levy::metrics {

namespace {

constexpr Eigen::Index kChunk = 8192;

Eigen::MatrixXd unit_areas(const LevyBatch& b) { return b.a / b.dt; }

double w2_sorted(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return std::sqrt((a - b).squaredNorm() / static_cast<double>(a.size()));
}

Eigen::VectorXd sorted(Eigen::VectorXd v) {
  std::sort(v.data(), v.data() + v.size());
  return v;
}

double poisson1(randkit::RngStream& s) {
  static const double e_inv = std::exp(-1.0);
  const double u = s.uniform();
  int k = 0;
  double p = e_inv, cdf = e_inv;
  while (u > cdf && k < 30) {
    ++k;
    p /= k;
    cdf += p;
  }
  return k;
}

// Column 0 is all ones (point estimate); columns 1..r are Poisson(1) weights.
Eigen::MatrixXd bootstrap_weights(std::uint64_t seed, std::uint64_t tag, Eigen::Index chunk_index,
                                  Eigen::Index rows, int resamples) {
  Eigen::MatrixXd w(rows, 1 + resamples);
  w.col(0).setOnes();
  randkit::RngStream s = randkit::RngStream(seed, tag).substream(
      static_cast<std::uint64_t>(chunk_index));
  for (Eigen::Index i = 0; i < rows; ++i)
    for (int r = 0; r < resamples; ++r) w(i, 1 + r) = poisson1(s);
  return w;
}

double sd_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

double marginal_w2(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  if (x.rows() == 0 || y.rows() == 0) throw std::invalid_argument("marginal_w2: empty batch");
  if (x.cols() != y.cols()) throw std::invalid_argument("marginal_w2: column mismatch");
  const Eigen::Index n = std::min(x.rows(), y.rows());
  double total = 0;
  for (Eigen::Index c = 0; c < x.cols(); ++c)
    total += w2_sorted(sorted(x.col(c).head(n)), sorted(y.col(c).head(n)));
  return total / static_cast<double>(x.cols());
}

double marginal_w2(const LevyBatch& x, const LevyBatch& y) {
  return marginal_w2(unit_areas(x), unit_areas(y));
}

double exact_area_moment4(int d, int a, int b, int c, int e) {
  const int na = area_dim(d);
  for (int idx : {a, b, c, e})
    if (idx < 0 || idx >= na) throw std::invalid_argument("area index out of range");
  std::array<Eigen::MatrixXd, 4> mats;
  const std::array<int, 4> ids{a, b, c, e};
  for (int k = 0; k < 4; ++k) {
    Eigen::VectorXd unit = Eigen::VectorXd::Zero(na);
    unit(ids[k]) = 1.0;
    mats[k] = antisym_from_flat(unit, d);
  }
  // Fourth cumulant from log E exp(i<lambda, A>) = -|lambda|^2/8 + tr(L^4)/384 + ...
  std::array<int, 4> perm{0, 1, 2, 3};
  double trace_sum = 0;
  do {
    trace_sum += (mats[perm[0]] * mats[perm[1]] * mats[perm[2]] * mats[perm[3]]).trace();
  } while (std::next_permutation(perm.begin(), perm.end()));
  const double cumulant = trace_sum / (16.0 * 24.0);
  auto delta = [](int i, int j) { return i == j ? 1.0 : 0.0; };
  const double gaussian_part =
      (delta(a, b) * delta(c, e) + delta(a, c) * delta(b, e) + delta(a, e) * delta(b, c)) / 16.0;
  return cumulant + gaussian_part;
}

std::vector<Moment4Index> moment4_indices(int n_area) {
  std::vector<Moment4Index> out;
  for (int a = 0; a < n_area; ++a)
    for (int b = a; b < n_area; ++b)
      for (int c = b; c < n_area; ++c)
        for (int e = c; e < n_area; ++e) out.push_back({a, b, c, e});
  return out;
}

namespace {

Eigen::MatrixXd moment_products(const Eigen::MatrixXd& area, Eigen::Index begin, Eigen::Index rows,
                                const std::vector<Moment4Index>& idx) {
  Eigen::MatrixXd p(rows, static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const auto& m = idx[k];
    p.col(static_cast<Eigen::Index>(k)) =
        (area.col(m.a).segment(begin, rows).array() * area.col(m.b).segment(begin, rows).array() *
         area.col(m.c).segment(begin, rows).array() * area.col(m.e).segment(begin, rows).array())
            .matrix();
  }
  return p;
}

Eigen::VectorXd moment_targets(int d, const std::vector<Moment4Index>& idx) {
  Eigen::VectorXd t(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k)
    t(static_cast<Eigen::Index>(k)) = exact_area_moment4(d, idx[k].a, idx[k].b, idx[k].c, idx[k].e);
  return t;
}

}  // namespace

Eigen::VectorXd empirical_moments4(const Eigen::MatrixXd& area_unit) {
  const auto idx = moment4_indices(static_cast<int>(area_unit.cols()));
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(idx.size()));
  for (Eigen::Index begin = 0; begin < area_unit.rows(); begin += kChunk) {
    const Eigen::Index rows = std::min(kChunk, area_unit.rows() - begin);
    sum += moment_products(area_unit, begin, rows, idx).colwise().sum().transpose();
  }
  return sum / static_cast<double>(area_unit.rows());
}

double fourth_moment_metric(const LevyBatch& batch) {
  batch.validate();
  const auto idx = moment4_indices(area_dim(batch.d));
  return (empirical_moments4(unit_areas(batch)) - moment_targets(batch.d, idx))
      .cwiseAbs()
      .maxCoeff();
}

MetricWithSe fourth_moment_bootstrap(const LevyBatch& batch, int resamples, std::uint64_t seed) {
  batch.validate();
  const Eigen::MatrixXd area = unit_areas(batch);
  const auto idx = moment4_indices(area_dim(batch.d));
  const Eigen::VectorXd target = moment_targets(batch.d, idx);
  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(1 + resamples, static_cast<Eigen::Index>(idx.size()));
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(1 + resamples);
  Eigen::Index chunk_index = 0;
  for (Eigen::Index begin = 0; begin < area.rows(); begin += kChunk, ++chunk_index) {
    const Eigen::Index rows = std::min(kChunk, area.rows() - begin);
    const Eigen::MatrixXd w = bootstrap_weights(seed, 41, chunk_index, rows, resamples);
    sums += w.transpose() * moment_products(area, begin, rows, idx);
    counts += w.colwise().sum().transpose();
  }
  std::vector<double> boot;
  for (int r = 1; r <= resamples; ++r)
    boot.push_back((sums.row(r).transpose() / counts(r) - target).cwiseAbs().maxCoeff());
  return {(sums.row(0).transpose() / counts(0) - target).cwiseAbs().maxCoeff(), sd_of(boot)};
}

MetricWithSe marginal_w2_bootstrap(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                                   int resamples, std::uint64_t seed) {
  MetricWithSe out;
  out.value = marginal_w2(x, y);
  const Eigen::Index n = std::min(x.rows(), y.rows());
  randkit::RngStream s(seed, 43);
  std::vector<double> boot;
  Eigen::MatrixXd bx(n, x.cols()), by(n, y.cols());
  for (int r = 0; r < resamples; ++r) {
    for (Eigen::Index i = 0; i < n; ++i) {
      bx.row(i) = x.row(static_cast<Eigen::Index>(s.next_u64() % static_cast<std::uint64_t>(n)));
      by.row(i) = y.row(static_cast<Eigen::Index>(s.next_u64() % static_cast<std::uint64_t>(n)));
    }
    boot.push_back(marginal_w2(bx, by));
  }
  out.se = sd_of(boot);
  return out;
}

KernelType parse_kernel(const std::string& name) {
  if (name == "gaussian" || name == "rbf") return KernelType::Gaussian;
  if (name == "polynomial" || name == "poly") return KernelType::Polynomial;
  throw std::invalid_argument("unknown kernel: " + name);
}

double median_bandwidth(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  const Eigen::Index nx = std::min<Eigen::Index>(1000, x.rows());
  const Eigen::Index ny = std::min<Eigen::Index>(1000, y.rows());
  Eigen::MatrixXd pooled(nx + ny, x.cols());
  pooled << x.topRows(nx), y.topRows(ny);
  std::vector<double> dist;
  dist.reserve(static_cast<std::size_t>(pooled.rows() * (pooled.rows() - 1) / 2));
  for (Eigen::Index i = 0; i < pooled.rows(); ++i)
    for (Eigen::Index j = i + 1; j < pooled.rows(); ++j)
      dist.push_back((pooled.row(i) - pooled.row(j)).norm());
  if (dist.empty()) return 1.0;
  auto mid = dist.begin() + static_cast<std::ptrdiff_t>(dist.size() / 2);
  std::nth_element(dist.begin(), mid, dist.end());
  return *mid > 0 ? *mid : 1.0;
}

double kernel_value(const KernelSpec& kernel, const Eigen::Ref<const Eigen::RowVectorXd>& x,
                    const Eigen::Ref<const Eigen::RowVectorXd>& y) {
  if (kernel.type == KernelType::Gaussian)
    return std::exp(-(x - y).squaredNorm() / (2.0 * kernel.bandwidth * kernel.bandwidth));
  return std::pow(x.dot(y) / static_cast<double>(x.size()) + kernel.offset, kernel.degree);
}

namespace {

// Sufficient statistics of one side of the U-statistic under a weighting:
// s = sum_i w_i phi_i, t = sum_i w_i k(x_i, x_i), n = sum_i w_i.
struct Side {
  Eigen::MatrixXd s;  // resamples x features
  Eigen::VectorXd t;
  Eigen::VectorXd n;
};

double mmd_from(const Side& x, const Side& y, Eigen::Index r) {
  const double nx = x.n(r), ny = y.n(r);
  const double xx = (x.s.row(r).squaredNorm() - x.t(r)) / (nx * (nx - 1.0));
  const double yy = (y.s.row(r).squaredNorm() - y.t(r)) / (ny * (ny - 1.0));
  const double xy = x.s.row(r).dot(y.s.row(r)) / (nx * ny);
  return xx + yy - 2.0 * xy;
}

class FeatureMap {
 public:
  FeatureMap(const KernelSpec& kernel, Eigen::Index dim) : kernel_(kernel), dim_(dim) {
    if (kernel.type == KernelType::Gaussian) {
      const int half = std::max(1, kernel.random_features / 2);
      randkit::RngStream s(kernel.feature_seed, 47);
      omega_.resize(dim, half);
      randkit::fill_gauss(s, omega_, 1.0 / (kernel.bandwidth * kernel.bandwidth));
      width_ = 2 * half;
    } else {
      if (kernel.degree < 0 || kernel.degree > 4 || kernel.offset < 0)
        throw std::invalid_argument("polynomial kernel needs degree in [0, 4] and offset >= 0");
      width_ = 0;
      Eigen::Index p = 1;
      for (int k = 0; k <= kernel.degree; ++k, p *= dim) width_ += p;
    }
  }

  Eigen::Index width() const { return width_; }

  // Returns chunk features and the kernel diagonal k(x, x).
  Eigen::MatrixXd features(const Eigen::MatrixXd& x, Eigen::VectorXd& diag) const {
    if (kernel_.type == KernelType::Gaussian) {
      const Eigen::MatrixXd proj = x * omega_;
      Eigen::MatrixXd f(x.rows(), width_);
      const double scale = std::sqrt(2.0 / static_cast<double>(width_));
      f.leftCols(proj.cols()) = scale * proj.array().cos().matrix();
      f.rightCols(proj.cols()) = scale * proj.array().sin().matrix();
      diag = Eigen::VectorXd::Ones(x.rows());
      return f;
    }
    // (u.v + c)^deg = sum_k binom(deg, k) c^(deg-k) <u^(x)k, v^(x)k>, u = x / sqrt(dim).
    const Eigen::MatrixXd u = x / std::sqrt(static_cast<double>(dim_));
    Eigen::MatrixXd f(x.rows(), width_);
    Eigen::MatrixXd power = Eigen::MatrixXd::Ones(x.rows(), 1);
    Eigen::Index col = 0;
    for (int k = 0; k <= kernel_.degree; ++k) {
      if (k > 0) {
        Eigen::MatrixXd next(x.rows(), power.cols() * dim_);
        for (Eigen::Index a = 0; a < power.cols(); ++a)
          for (Eigen::Index b = 0; b < dim_; ++b)
            next.col(a * dim_ + b) = power.col(a).cwiseProduct(u.col(b));
        power = std::move(next);
      }
      const double coef = std::sqrt(std::tgamma(kernel_.degree + 1.0) /
                                    (std::tgamma(k + 1.0) * std::tgamma(kernel_.degree - k + 1.0)) *
                                    std::pow(kernel_.offset, kernel_.degree - k));
      f.middleCols(col, power.cols()) = coef * power;
      col += power.cols();
    }
    diag = f.rowwise().squaredNorm();
    return f;
  }

 private:
  KernelSpec kernel_;
  Eigen::Index dim_;
  Eigen::Index width_ = 0;
  Eigen::MatrixXd omega_;
};

Side accumulate(const FeatureMap& fmap, const Eigen::MatrixXd& x, int resamples,
                std::uint64_t seed, std::uint64_t tag) {
  Side side{Eigen::MatrixXd::Zero(1 + resamples, fmap.width()), Eigen::VectorXd::Zero(1 + resamples),
            Eigen::VectorXd::Zero(1 + resamples)};
  Eigen::VectorXd diag;
  Eigen::Index chunk_index = 0;
  for (Eigen::Index begin = 0; begin < x.rows(); begin += kChunk, ++chunk_index) {
    const Eigen::Index rows = std::min(kChunk, x.rows() - begin);
    const Eigen::MatrixXd f = fmap.features(x.middleRows(begin, rows), diag);
    const Eigen::MatrixXd w = bootstrap_weights(seed, tag, chunk_index, rows, resamples);
    side.s.noalias() += w.transpose() * f;
    side.t += w.transpose() * diag;
    side.n += w.colwise().sum().transpose();
  }
  return side;
}


}  // namespace

MmdResult mmd(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const KernelSpec& kernel_in,
              const MmdOptions& opts) {
  if (x.cols() != y.cols()) throw std::invalid_argument("mmd: dimension mismatch");
  if (x.rows() < 2 || y.rows() < 2) throw std::invalid_argument("mmd: need >= 2 rows per side");
  KernelSpec kernel = kernel_in;
  MmdResult out;
  if (kernel.type == KernelType::Gaussian && kernel.bandwidth <= 0)
    kernel.bandwidth = median_bandwidth(x, y);
  out.bandwidth = kernel.type == KernelType::Gaussian ? kernel.bandwidth : 0.0;
  const int r = std::max(0, opts.bootstrap);

  const bool exact = kernel.type == KernelType::Gaussian && x.rows() <= kernel.exact_limit &&
                     y.rows() <= kernel.exact_limit;
  std::vector<double> boot, null;
  if (exact) {
    out.exact = true;
    Eigen::MatrixXd pooled(x.rows() + y.rows(), x.cols());
    pooled << x, y;
    const Eigen::Index n = pooled.rows();
    Eigen::MatrixXd gram(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i; j < n; ++j)
        gram(i, j) = gram(j, i) = kernel_value(kernel, pooled.row(i), pooled.row(j));
    const Eigen::VectorXd diag = gram.diagonal();
    auto stat = [&](const Eigen::VectorXd& wx, const Eigen::VectorXd& wy) {
      const double nx = wx.sum(), ny = wy.sum();
      const double xx = (wx.dot(gram * wx) - wx.dot(diag)) / (nx * (nx - 1.0));
      const double yy = (wy.dot(gram * wy) - wy.dot(diag)) / (ny * (ny - 1.0));
      return xx + yy - 2.0 * wx.dot(gram * wy) / (nx * ny);
    };
    Eigen::VectorXd wx = Eigen::VectorXd::Zero(n), wy = Eigen::VectorXd::Zero(n);
    wx.head(x.rows()).setOnes();
    wy.tail(y.rows()).setOnes();
    out.value = stat(wx, wy);
    const Eigen::MatrixXd bw = bootstrap_weights(opts.seed, 53, 0, n, r);
    for (int k = 1; k <= r; ++k) {
      Eigen::VectorXd bx = Eigen::VectorXd::Zero(n), by = Eigen::VectorXd::Zero(n);
      bx.head(x.rows()) = bw.col(k).head(x.rows());
      by.tail(y.rows()) = bw.col(k).tail(y.rows());
      if (bx.sum() > 1 && by.sum() > 1) boot.push_back(stat(bx, by));
    }
    randkit::RngStream ps(opts.seed, 59);
    for (int k = 0; k < opts.permutations; ++k) {
      std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
      std::iota(perm.begin(), perm.end(), Eigen::Index{0});
      std::shuffle(perm.begin(), perm.end(), ps);
      Eigen::VectorXd px = Eigen::VectorXd::Zero(n), py = Eigen::VectorXd::Zero(n);
      for (Eigen::Index i = 0; i < n; ++i) (i < x.rows() ? px : py)(perm[static_cast<std::size_t>(i)]) = 1.0;
      null.push_back(stat(px, py));
    }
  } else {
    out.exact = kernel.type == KernelType::Polynomial;
    const FeatureMap fmap(kernel, x.cols());
    const Side sx = accumulate(fmap, x, r, opts.seed, 61);
    const Side sy = accumulate(fmap, y, r, opts.seed, 67);
    out.value = mmd_from(sx, sy, 0);
    for (int k = 1; k <= r; ++k) boot.push_back(mmd_from(sx, sy, k));
    if (opts.permutations > 0) {
      // Random relabeling of the pooled sample: each point joins side x with
      // probability nx / (nx + ny).
      const int p = opts.permutations;
      const double px = static_cast<double>(x.rows()) / static_cast<double>(x.rows() + y.rows());
      Side lx{Eigen::MatrixXd::Zero(p, fmap.width()), Eigen::VectorXd::Zero(p),
              Eigen::VectorXd::Zero(p)};
      Eigen::RowVectorXd s_tot = sx.s.row(0) + sy.s.row(0);
      const double t_tot = sx.t(0) + sy.t(0);
      const double n_tot = sx.n(0) + sy.n(0);
      Eigen::VectorXd diag;
      Eigen::Index chunk_index = 0;
      for (const Eigen::MatrixXd* side : {&x, &y}) {
        for (Eigen::Index begin = 0; begin < side->rows(); begin += kChunk, ++chunk_index) {
          const Eigen::Index rows = std::min(kChunk, side->rows() - begin);
          const Eigen::MatrixXd f = fmap.features(side->middleRows(begin, rows), diag);
          randkit::RngStream ls = randkit::RngStream(opts.seed, 71).substream(
              static_cast<std::uint64_t>(chunk_index));
          Eigen::MatrixXd labels(rows, p);
          for (Eigen::Index i = 0; i < rows; ++i)
            for (int k = 0; k < p; ++k) labels(i, k) = ls.uniform() < px ? 1.0 : 0.0;
          lx.s.noalias() += labels.transpose() * f;
          lx.t += labels.transpose() * diag;
          lx.n += labels.colwise().sum().transpose();
        }
      }
      Side ly{(-lx.s).rowwise() + s_tot, (-lx.t).array() + t_tot, (-lx.n).array() + n_tot};
      for (int k = 0; k < p; ++k) null.push_back(mmd_from(lx, ly, k));
    }
  }
  out.se = sd_of(boot);
  if (!null.empty()) {
    std::sort(null.begin(), null.end());
    const auto at = [&](double q) {
      const double pos = q * static_cast<double>(null.size() - 1);
      const auto lo = static_cast<std::size_t>(std::floor(pos));
      const auto hi = std::min(lo + 1, null.size() - 1);
      return null[lo] + (pos - static_cast<double>(lo)) * (null[hi] - null[lo]);
    };
    out.null_lo = at(0.025);
    out.null_hi = at(0.975);
  }
  return out;
}

std::vector<EvalRow> evaluate(const EvalConfig& cfg, const ReferenceProvider& reference) {
  std::vector<EvalRow> rows;
  for (int d : cfg.dims) {
    const LevyBatch ref =
        reference ? reference(d, cfg.n, cfg.reference_depth)
                  : reference_batch(randkit::RngStream(cfg.seed, 1000 + static_cast<std::uint64_t>(d)),
                                    cfg.n, d, 1.0, cfg.reference_depth);
    const Eigen::MatrixXd ref_area = unit_areas(ref);
    const Eigen::Index half = ref.size() / 2;
    const double floor =
        marginal_w2(ref_area.topRows(half), ref_area.middleRows(half, half)) / std::sqrt(2.0);
    std::uint64_t k = 0;
    for (const auto& spec : cfg.samplers) {
      ++k;
      const randkit::RngStream stream(cfg.seed, 2000 + 100 * static_cast<std::uint64_t>(d) + k);
      const auto t0 = std::chrono::steady_clock::now();
      const LevyBatch batch = sample_joint(spec, stream, cfg.n, d, 1.0);
      const double secs =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      EvalRow row;
      row.sampler = to_string(spec.kind);
      row.d = d;
      row.n = cfg.n;
      row.reference_depth = cfg.reference_depth;
      row.seconds_per_2p20 = secs * static_cast<double>(Eigen::Index{1} << 20) /
                             static_cast<double>(cfg.n);
      const Eigen::MatrixXd area = unit_areas(batch);
      row.w2 = marginal_w2_bootstrap(area, ref_area, cfg.bootstrap, cfg.seed + k);
      row.w2_floor = floor;
      row.fourth = fourth_moment_bootstrap(batch, cfg.bootstrap, cfg.seed + k);
      MmdOptions mo;
      mo.bootstrap = cfg.bootstrap;
      mo.seed = cfg.seed + k;
      KernelSpec gk;
      row.mmd_gaussian = mmd(area, ref_area, gk, mo);
      KernelSpec pk;
      pk.type = KernelType::Polynomial;
      row.mmd_polynomial = mmd(area, ref_area, pk, mo);
      rows.push_back(row);
    }
  }
  return rows;
}

std::string eval_csv(const std::vector<EvalRow>& rows) {
  std::ostringstream os;
  os << std::setprecision(10);
  os << "sampler,d,n,reference_depth,w2,w2_se,w2_floor,fourth_moment,fourth_moment_se,"
        "mmd_gaussian,mmd_gaussian_se,gaussian_bandwidth,mmd_polynomial,mmd_polynomial_se\n";
  for (const auto& r : rows)
    os << r.sampler << ',' << r.d << ',' << r.n << ',' << r.reference_depth << ',' << r.w2.value
       << ',' << r.w2.se << ',' << r.w2_floor << ',' << r.fourth.value << ',' << r.fourth.se << ','
       << r.mmd_gaussian.value << ',' << r.mmd_gaussian.se << ',' << r.mmd_gaussian.bandwidth << ','
       << r.mmd_polynomial.value << ',' << r.mmd_polynomial.se << '\n';
  return os.str();
}

std::string eval_json(const std::vector<EvalRow>& rows) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : rows) {
    j.push_back({{"sampler", r.sampler},
                 {"d", r.d},
                 {"n", r.n},
                 {"reference_depth", r.reference_depth},
                 {"marginal_w2", {{"value", r.w2.value}, {"se", r.w2.se}, {"floor", r.w2_floor}}},
                 {"fourth_moment", {{"value", r.fourth.value}, {"se", r.fourth.se}}},
                 {"mmd_gaussian",
                  {{"value", r.mmd_gaussian.value},
                   {"se", r.mmd_gaussian.se},
                   {"bandwidth", r.mmd_gaussian.bandwidth},
                   {"random_features", !r.mmd_gaussian.exact}}},
                 {"mmd_polynomial",
                  {{"value", r.mmd_polynomial.value},
                   {"se", r.mmd_polynomial.se},
                   {"degree", 3},
                   {"offset", 1.0}}}});
  }
  return j.dump(2);
}

}  // namespace levy::metrics
