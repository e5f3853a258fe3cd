#include "levy/samplers.hpp"

#include "levy/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <vector>

namespace levy {

namespace {

constexpr std::int64_t kRowBlock = 1024;

void require_dt(double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be positive");
}

void require_d(int d) {
  if (d < 1) throw std::invalid_argument("d must be >= 1");
}

// Runs row(s, r) with s = stream.substream(r) for every row, block-parallel.
template <typename RowFn>
void for_each_row(const randkit::RngStream& stream, Eigen::Index n, RowFn&& row) {
  parallel_blocks(n, kRowBlock, [&](std::int64_t, std::int64_t begin, std::int64_t end) {
    for (std::int64_t r = begin; r < end; ++r) {
      auto s = stream.substream(static_cast<std::uint64_t>(r));
      row(s, static_cast<Eigen::Index>(r));
    }
  });
}

// Row-major scratch view helpers; Eigen batches are column-major.
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

}  // namespace

SamplerKind parse_sampler_kind(const std::string& name) {
  std::string s = name;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "talay") return SamplerKind::Talay;
  if (s == "davie") return SamplerKind::Davie;
  if (s == "condgauss" || s == "cond_gauss" || s == "cond-gauss") return SamplerKind::CondGauss;
  if (s == "foster") return SamplerKind::Foster;
  if (s == "pairnet" || s == "levygan") return SamplerKind::PairNet;
  if (s == "reference" || s == "ref") return SamplerKind::Reference;
  throw std::invalid_argument("unknown sampler kind: " + name);
}

std::string to_string(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::Talay: return "talay";
    case SamplerKind::Davie: return "davie";
    case SamplerKind::CondGauss: return "condgauss";
    case SamplerKind::Foster: return "foster";
    case SamplerKind::PairNet: return "pairnet";
    case SamplerKind::Reference: return "reference";
  }
  return "unknown";
}

namespace detail {

void foster_row_given_h(randkit::RngStream& s, const double* w, const double* h, int d,
                        double dt, double* a) {
  constexpr int kMaxD = 64;
  if (d > kMaxD) throw std::invalid_argument("foster sampler supports d <= 64");
  double k[kMaxD], c[kMaxD];
  const double k_sd = std::sqrt(dt * randkit::kSpaceTimeTimeVariance);
  for (int i = 0; i < d; ++i) k[i] = k_sd * s.normal();
  // Exp(15/8) shifted by 1/sqrt(3) - 8/15 so E[C + shift] = 1/sqrt(3).
  const double shift = 1.0 / std::sqrt(3.0) - 1.0 / randkit::kFosterExpRate;
  for (int i = 0; i < d; ++i) c[i] = -std::log(s.uniform()) / randkit::kFosterExpRate + shift;
  int p = 0;
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j, ++p) {
      const double var = (3.0 / 28.0) * c[i] * c[j] * dt * dt +
                         (1.0 / 28.0) * dt * (144.0 * k[i] * k[i] + 144.0 * k[j] * k[j]);
      a[p] = h[i] * w[j] - w[i] * h[j] + 12.0 * (k[i] * h[j] - h[i] * k[j]) +
             std::sqrt(var) * randkit::foster_xi(s);
    }
}

void foster_row(randkit::RngStream& s, const double* w, int d, double dt, double* a,
                double* h_out, double* k_out) {
  constexpr int kMaxD = 64;
  if (d > kMaxD) throw std::invalid_argument("foster sampler supports d <= 64");
  double h[kMaxD];
  const double h_sd = std::sqrt(dt * randkit::kSpaceTimeVariance);
  for (int i = 0; i < d; ++i) h[i] = h_sd * s.normal();
  if (h_out) std::copy(h, h + d, h_out);
  if (k_out) {
    // Replay the k draws without disturbing the stream used below.
    randkit::RngStream replay = s;
    const double k_sd = std::sqrt(dt * randkit::kSpaceTimeTimeVariance);
    for (int i = 0; i < d; ++i) k_out[i] = k_sd * replay.normal();
  }
  foster_row_given_h(s, w, h, d, dt, a);
}

void base_row(SamplerKind kind, randkit::RngStream& s, const double* w, int d, double dt,
              double* a) {
  const int na = area_dim(d);
  switch (kind) {
    case SamplerKind::Talay:
      for (int p = 0; p < na; ++p) a[p] = 0.5 * dt * s.rademacher();
      return;
    case SamplerKind::Davie: {
      const double sd = std::sqrt(kAreaVarianceUnit) * dt;
      for (int p = 0; p < na; ++p) a[p] = sd * s.normal();
      return;
    }
    case SamplerKind::CondGauss: {
      constexpr int kMaxD = 64;
      if (d > kMaxD) throw std::invalid_argument("sampler supports d <= 64");
      double h[kMaxD];
      const double h_sd = std::sqrt(dt * randkit::kSpaceTimeVariance);
      for (int i = 0; i < d; ++i) h[i] = h_sd * s.normal();
      // Var(b_ij) = dt^2/12, matching the logistic law of scale dt/(2 pi).
      const double g_sd = dt * std::sqrt(1.0 / 12.0);
      int p = 0;
      for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j, ++p) a[p] = h[i] * w[j] - w[i] * h[j] + g_sd * s.normal();
      return;
    }
    case SamplerKind::Foster:
      foster_row(s, w, d, dt, a);
      return;
    default:
      throw std::invalid_argument("sampler kind has no single-row kernel: " + to_string(kind));
  }
}

void chen_tree(double* w_fine, double* a_fine, int n_fine, int d) {
  const int na = area_dim(d);
  for (int stride = 1; stride < n_fine; stride *= 2)
    for (int i = 0; i < n_fine; i += 2 * stride) {
      double* w1 = w_fine + static_cast<std::ptrdiff_t>(i) * d;
      const double* w2 = w_fine + static_cast<std::ptrdiff_t>(i + stride) * d;
      double* a1 = a_fine + static_cast<std::ptrdiff_t>(i) * na;
      const double* a2 = a_fine + static_cast<std::ptrdiff_t>(i + stride) * na;
      int p = 0;
      for (int u = 0; u < d; ++u)
        for (int v = u + 1; v < d; ++v, ++p)
          a1[p] += a2[p] + 0.5 * (w1[u] * w2[v] - w1[v] * w2[u]);
      for (int u = 0; u < d; ++u) w1[u] += w2[u];
    }
}

}  // namespace detail

Eigen::MatrixXd talay_area(const randkit::RngStream& stream, Eigen::Index n, int d, double dt) {
  require_dt(dt);
  require_d(d);
  RowMat a(n, area_dim(d));
  for_each_row(stream, n, [&](randkit::RngStream& s, Eigen::Index r) {
    detail::base_row(SamplerKind::Talay, s, nullptr, d, dt, a.row(r).data());
  });
  return a;
}

Eigen::MatrixXd davie_area(const randkit::RngStream& stream, Eigen::Index n, int d, double dt) {
  require_dt(dt);
  require_d(d);
  RowMat a(n, area_dim(d));
  for_each_row(stream, n, [&](randkit::RngStream& s, Eigen::Index r) {
    detail::base_row(SamplerKind::Davie, s, nullptr, d, dt, a.row(r).data());
  });
  return a;
}

Eigen::MatrixXd cond_gauss_area(const randkit::RngStream& stream, const Eigen::MatrixXd& w,
                                double dt) {
  require_dt(dt);
  const int d = static_cast<int>(w.cols());
  require_d(d);
  const RowMat wr = w;
  RowMat a(w.rows(), area_dim(d));
  for_each_row(stream, w.rows(), [&](randkit::RngStream& s, Eigen::Index r) {
    detail::base_row(SamplerKind::CondGauss, s, wr.row(r).data(), d, dt, a.row(r).data());
  });
  return a;
}

FosterSample foster_area(const randkit::RngStream& stream, const Eigen::MatrixXd& w, double dt) {
  require_dt(dt);
  const int d = static_cast<int>(w.cols());
  require_d(d);
  const RowMat wr = w;
  RowMat a(w.rows(), area_dim(d)), h(w.rows(), d), k(w.rows(), d);
  for_each_row(stream, w.rows(), [&](randkit::RngStream& s, Eigen::Index r) {
    detail::foster_row(s, wr.row(r).data(), d, dt, a.row(r).data(), h.row(r).data(),
                       k.row(r).data());
  });
  return {a, h, k};
}

Eigen::MatrixXd foster_area_given_h(const randkit::RngStream& stream, const Eigen::MatrixXd& w,
                                    const Eigen::MatrixXd& h, double dt) {
  require_dt(dt);
  const int d = static_cast<int>(w.cols());
  if (h.rows() != w.rows() || h.cols() != d) throw std::invalid_argument("h shape mismatch");
  const RowMat wr = w, hr = h;
  RowMat a(w.rows(), area_dim(d));
  for_each_row(stream, w.rows(), [&](randkit::RngStream& s, Eigen::Index r) {
    detail::foster_row_given_h(s, wr.row(r).data(), hr.row(r).data(), d, dt, a.row(r).data());
  });
  return a;
}

Eigen::MatrixXd reference_area(const randkit::RngStream& stream, const Eigen::MatrixXd& w,
                               double dt, int depth) {
  require_dt(dt);
  if (depth < 0 || depth > 24) throw std::invalid_argument("reference depth must be in [0, 24]");
  const int d = static_cast<int>(w.cols());
  require_d(d);
  const int na = area_dim(d);
  const int n_fine = 1 << depth;
  const double delta = dt / n_fine;
  const RowMat wr = w;
  RowMat a(w.rows(), na);
  parallel_blocks(w.rows(), kRowBlock, [&](std::int64_t, std::int64_t begin, std::int64_t end) {
    RowMat w_fine(n_fine, d), a_fine(n_fine, na);
    for (std::int64_t r = begin; r < end; ++r) {
      auto s = stream.substream(static_cast<std::uint64_t>(r));
      w_fine = randkit::conditioned_fine_increments(s, wr.row(r).transpose(), n_fine, dt);
      for (int m = 0; m < n_fine; ++m)
        detail::foster_row(s, w_fine.row(m).data(), d, delta, a_fine.row(m).data());
      detail::chen_tree(w_fine.data(), a_fine.data(), n_fine, d);
      a.row(r) = a_fine.row(0);
    }
  });
  return a;
}

Eigen::MatrixXd reference_area_given_h(const randkit::RngStream& stream, const Eigen::MatrixXd& w,
                                       const Eigen::MatrixXd& h, double dt, int depth) {
  require_dt(dt);
  if (depth < 0 || depth > 24) throw std::invalid_argument("reference depth must be in [0, 24]");
  const int d = static_cast<int>(w.cols());
  require_d(d);
  if (h.rows() != w.rows() || h.cols() != d) throw std::invalid_argument("h shape mismatch");
  const int na = area_dim(d);
  const int n_fine = 1 << depth;
  const double delta = dt / n_fine;
  RowMat a(w.rows(), na);
  parallel_blocks(w.rows(), kRowBlock, [&](std::int64_t, std::int64_t begin, std::int64_t end) {
    RowMat w_fine(n_fine, d), h_fine(n_fine, d), a_fine(n_fine, na);
    for (std::int64_t r = begin; r < end; ++r) {
      auto s = stream.substream(static_cast<std::uint64_t>(r));
      const randkit::FineBridge fb = randkit::conditioned_fine_bridge(
          s, w.row(r).transpose(), h.row(r).transpose(), n_fine, dt);
      w_fine = fb.dw;
      h_fine = fb.h;
      for (int m = 0; m < n_fine; ++m)
        detail::foster_row_given_h(s, w_fine.row(m).data(), h_fine.row(m).data(), d, delta,
                                   a_fine.row(m).data());
      detail::chen_tree(w_fine.data(), a_fine.data(), n_fine, d);
      a.row(r) = a_fine.row(0);
    }
  });
  return a;
}

LevyBatch sample_area(const SamplerSpec& spec, const randkit::RngStream& stream,
                      const Eigen::MatrixXd& w, double dt) {
  require_dt(dt);
  const int d = static_cast<int>(w.cols());
  require_d(d);
  LevyBatch out;
  out.d = d;
  out.dt = dt;
  out.sampler = to_string(spec.kind);
  out.seed = stream.seed();
  switch (spec.kind) {
    case SamplerKind::Talay: out.a = talay_area(stream, w.rows(), d, dt); break;
    case SamplerKind::Davie: out.a = davie_area(stream, w.rows(), d, dt); break;
    case SamplerKind::CondGauss: out.a = cond_gauss_area(stream, w, dt); break;
    case SamplerKind::Foster: {
      // Same draws as foster_area without materialising h and k.
      const RowMat wr = w;
      RowMat a(w.rows(), area_dim(d));
      for_each_row(stream, w.rows(), [&](randkit::RngStream& s, Eigen::Index r) {
        detail::foster_row(s, wr.row(r).data(), d, dt, a.row(r).data());
      });
      out.a = a;
      break;
    }
    case SamplerKind::Reference:
      out.a = reference_area(stream, w, dt, spec.depth);
      out.depth = spec.depth;
      break;
    case SamplerKind::PairNet: {
      if (!spec.model) throw std::invalid_argument("pairnet sampler requires a loaded model");
      if (d > spec.model->d)
        std::cerr << "warning: generating d=" << d << " with a model trained at d="
                  << spec.model->d << "\n";
      out.a = pairnet::generate(*spec.model, stream, w, dt, spec.generate).a;
      break;
    }
  }
  out.w = w;
  return out;
}

namespace {

Eigen::MatrixXd gaussian_rows(const randkit::RngStream& stream, Eigen::Index n, int d,
                              double variance) {
  RowMat w(n, d);
  const double sd = std::sqrt(variance);
  for_each_row(stream, n, [&](randkit::RngStream& s, Eigen::Index r) {
    for (int j = 0; j < d; ++j) w(r, j) = sd * s.normal();
  });
  return w;
}

}  // namespace

LevyBatch sample_joint(const SamplerSpec& spec, const randkit::RngStream& stream, Eigen::Index n,
                       int d, double dt) {
  require_dt(dt);
  require_d(d);
  const Eigen::MatrixXd w = gaussian_rows(stream.substream(0), n, d, dt);
  LevyBatch out = sample_area(spec, stream.substream(1), w, dt);
  out.seed = stream.seed();
  return out;
}

LevyBatch reference_batch(const randkit::RngStream& stream, Eigen::Index n, int d, double dt,
                          int depth) {
  SamplerSpec spec;
  spec.kind = SamplerKind::Reference;
  spec.depth = depth;
  return sample_joint(spec, stream, n, d, dt);
}

}  // namespace levy
