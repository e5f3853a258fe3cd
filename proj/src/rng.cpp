#include "levy/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace levy::randkit {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

void require_positive(double x, const char* what) {
  if (!(x > 0.0) || !std::isfinite(x))
    throw std::invalid_argument(std::string(what) + " must be positive and finite");
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kPhiloxW0;
      key[1] += kPhiloxW1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
    mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {}

RngStream RngStream::substream(std::uint64_t index) const {
  return RngStream(seed_, mix64(mix64(stream_id_) ^ mix64(~index)));
}

std::uint64_t RngStream::next_u64() {
  if (buffered_ == 0) {
    const auto out = philox4x32(
        {static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
         static_cast<std::uint32_t>(stream_id_), static_cast<std::uint32_t>(stream_id_ >> 32)},
        {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)});
    ++block_;
    buffer_[0] = static_cast<std::uint64_t>(out[0]) | (static_cast<std::uint64_t>(out[1]) << 32);
    buffer_[1] = static_cast<std::uint64_t>(out[2]) | (static_cast<std::uint64_t>(out[3]) << 32);
    buffered_ = 2;
  }
  return buffer_[2 - buffered_--];
}

double RngStream::uniform() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_normal_;
  }
  const double r = std::sqrt(-2.0 * std::log(uniform()));
  const double theta = 2.0 * std::numbers::pi * uniform();
  spare_normal_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

Eigen::VectorXd gauss(RngStream& stream, Eigen::Index n, double variance) {
  Eigen::VectorXd out(n);
  fill_gauss(stream, out, variance);
  return out;
}

void fill_gauss(RngStream& stream, Eigen::Ref<Eigen::MatrixXd> out, double variance) {
  require_positive(variance, "variance");
  const double sd = std::sqrt(variance);
  // Column-major traversal; callers rely on this order for reproducibility.
  for (Eigen::Index j = 0; j < out.cols(); ++j)
    for (Eigen::Index i = 0; i < out.rows(); ++i) out(i, j) = sd * stream.normal();
}

Eigen::VectorXd rademacher(RngStream& stream, Eigen::Index n) {
  Eigen::VectorXd out(n);
  fill_rademacher(stream, out);
  return out;
}

void fill_rademacher(RngStream& stream, Eigen::Ref<Eigen::MatrixXd> out) {
  for (Eigen::Index j = 0; j < out.cols(); ++j)
    for (Eigen::Index i = 0; i < out.rows(); ++i) out(i, j) = stream.rademacher();
}

double foster_xi(RngStream& stream) {
  static const double root3 = std::sqrt(3.0);
  if (stream.uniform() < kFosterMixtureP) return root3 * (2.0 * stream.uniform() - 1.0);
  return stream.rademacher();
}

Eigen::VectorXd foster_xi(RngStream& stream, Eigen::Index n) {
  Eigen::VectorXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) out(i) = foster_xi(stream);
  return out;
}

Eigen::VectorXd exponential(RngStream& stream, Eigen::Index n, double rate) {
  require_positive(rate, "rate");
  Eigen::VectorXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) out(i) = -std::log(stream.uniform()) / rate;
  return out;
}

Eigen::VectorXd logistic(RngStream& stream, Eigen::Index n, double scale) {
  require_positive(scale, "scale");
  Eigen::VectorXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double u = stream.uniform();
    out(i) = scale * std::log(u / (1.0 - u));
  }
  return out;
}

BridgeSample sample_bridge(RngStream& stream, int d, double dt) {
  require_positive(dt, "dt");
  if (d < 1) throw std::invalid_argument("d must be >= 1");
  BridgeSample out;
  out.h = gauss(stream, d, dt * kSpaceTimeVariance);
  out.k = gauss(stream, d, dt * kSpaceTimeTimeVariance);
  return out;
}

Eigen::MatrixXd brownian_increments(RngStream& stream, int d, Eigen::Index n_steps,
                                    double dt) {
  require_positive(dt, "dt");
  if (d < 1 || n_steps < 0) throw std::invalid_argument("invalid increment shape");
  Eigen::MatrixXd out(n_steps, d);
  fill_gauss(stream, out, dt);
  return out;
}

Eigen::MatrixXd conditioned_fine_increments(RngStream& stream,
                                            const Eigen::Ref<const Eigen::VectorXd>& w,
                                            Eigen::Index n_fine, double dt) {
  require_positive(dt, "dt");
  if (n_fine < 1 || !is_power_of_two(static_cast<std::uint64_t>(n_fine)))
    throw std::invalid_argument("n_fine must be a power of two");
  const Eigen::Index d = w.size();
  if (n_fine == 1) return w.transpose();
  Eigen::MatrixXd z(n_fine, d);
  fill_gauss(stream, z, dt / static_cast<double>(n_fine));
  const Eigen::RowVectorXd shift =
      w.transpose() / static_cast<double>(n_fine) - z.colwise().mean();
  z.rowwise() += shift;
  return z;
}

Eigen::VectorXd space_time_area_from_fine(const Eigen::MatrixXd& dw, const Eigen::MatrixXd& h,
                                          double dt) {
  const Eigen::Index n = dw.rows();
  const double delta = dt / static_cast<double>(n);
  Eigen::VectorXd running = Eigen::VectorXd::Zero(dw.cols());
  Eigen::VectorXd integral = Eigen::VectorXd::Zero(dw.cols());
  for (Eigen::Index k = 0; k < n; ++k) {
    integral += delta * (running + 0.5 * dw.row(k).transpose() + h.row(k).transpose());
    running += dw.row(k).transpose();
  }
  return integral / dt - 0.5 * running;
}

FineBridge conditioned_fine_bridge(RngStream& stream, const Eigen::Ref<const Eigen::VectorXd>& w,
                                   const Eigen::Ref<const Eigen::VectorXd>& h,
                                   Eigen::Index n_fine, double dt) {
  require_positive(dt, "dt");
  if (n_fine < 1 || !is_power_of_two(static_cast<std::uint64_t>(n_fine)))
    throw std::invalid_argument("n_fine must be a power of two");
  if (h.size() != w.size()) throw std::invalid_argument("w and h dimensions differ");
  const Eigen::Index d = w.size();
  const double n = static_cast<double>(n_fine);
  const double delta = dt / n;

  // Linear constraints on the stacked (dw_0..dw_{N-1}, h_0..h_{N-1}) per
  // coordinate: sum dw = w and a space-time functional equal to h. The two
  // constraint rows are orthogonal under the prior covariance.
  Eigen::VectorXd c_dw(n_fine);
  for (Eigen::Index m = 0; m < n_fine; ++m)
    c_dw(m) = (delta * (n - 1.0 - static_cast<double>(m)) + 0.5 * delta - 0.5 * dt) / dt;
  const double c_h = delta / dt;
  const double var_dw = delta;
  const double var_h = delta * kSpaceTimeVariance;
  const double s_w = var_dw * n;
  const double s_h = var_dw * c_dw.squaredNorm() + var_h * c_h * c_h * n;

  FineBridge out;
  out.dw.resize(n_fine, d);
  out.h.resize(n_fine, d);
  fill_gauss(stream, out.dw, var_dw);
  fill_gauss(stream, out.h, var_h);
  for (Eigen::Index j = 0; j < d; ++j) {
    const double r_w = w(j) - out.dw.col(j).sum();
    const double r_h = h(j) - (c_dw.dot(out.dw.col(j)) + c_h * out.h.col(j).sum());
    out.dw.col(j).array() += var_dw * (r_w / s_w) + var_dw * c_dw.array() * (r_h / s_h);
    out.h.col(j).array() += var_h * c_h * (r_h / s_h);
  }
  return out;
}

}  // namespace levy::randkit
