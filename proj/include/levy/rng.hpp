#pragma once

// Counter-based random streams and the primitive distributions used by the
// samplers: Gaussian, Rademacher, exponential, logistic, Foster's uniform /
// Rademacher mixture, and the Brownian bridge quantities H and K.

#include <Eigen/Dense>

#include <array>
#include <cstdint>

namespace levy::randkit {

/// Philox4x32-10 block function (Salmon et al. 2011).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key);

/// A reproducible stream keyed by (seed, stream_id). Output block k is
/// philox(counter = {k, stream_id}, key = seed), so any (seed, stream_id)
/// pair replays the same sequence and distinct ids never share a block.
/// A stream carries a position and must not be advanced concurrently.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  /// Independent child stream; a pure function of (seed, stream_id, index).
  RngStream substream(std::uint64_t index) const;

  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform();
  double normal();
  double rademacher() { return (next_u64() >> 63) ? 1.0 : -1.0; }

  // Uniform random bit generator interface.
  using result_type = std::uint64_t;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() { return next_u64(); }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int buffered_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

/// splitmix64 finalizer, used for stream-id derivation.
std::uint64_t mix64(std::uint64_t x);

// Kept as exact rationals.
inline constexpr double kFosterMixtureP = 21130.0 / 25621.0;
inline constexpr double kFosterExpRate = 15.0 / 8.0;
inline constexpr double kSpaceTimeVariance = 1.0 / 12.0;       // H per unit time
inline constexpr double kSpaceTimeTimeVariance = 1.0 / 720.0;  // K per unit time

Eigen::VectorXd gauss(RngStream& stream, Eigen::Index n, double variance);
/// Fills `out` with i.i.d. N(0, variance).
void fill_gauss(RngStream& stream, Eigen::Ref<Eigen::MatrixXd> out, double variance);
Eigen::VectorXd rademacher(RngStream& stream, Eigen::Index n);
void fill_rademacher(RngStream& stream, Eigen::Ref<Eigen::MatrixXd> out);
/// Uni[-sqrt3, sqrt3] with probability 21130/25621, otherwise Rademacher.
Eigen::VectorXd foster_xi(RngStream& stream, Eigen::Index n);
double foster_xi(RngStream& stream);
/// Inverse-CDF exponential with the given rate.
Eigen::VectorXd exponential(RngStream& stream, Eigen::Index n, double rate);
/// Inverse-CDF logistic with location 0 and the given scale.
Eigen::VectorXd logistic(RngStream& stream, Eigen::Index n, double scale);

struct BridgeSample {
  Eigen::VectorXd h;  // space-time area, variance dt/12
  Eigen::VectorXd k;  // space-time-time area, variance dt/720
  Eigen::VectorXd b;  // space-space area (flattened), left empty by samplers here
};

/// h ~ N^d(0, dt/12) and k ~ N^d(0, dt/720), independent.
BridgeSample sample_bridge(RngStream& stream, int d, double dt);

/// n_steps x d matrix of i.i.d. N(0, dt) increments.
Eigen::MatrixXd brownian_increments(RngStream& stream, int d, Eigen::Index n_steps,
                                    double dt);

/// n_fine x d increments over equal sub-intervals of [0, dt] distributed as
/// Brownian motion conditioned on its total increment being w. Column sums
/// equal w up to rounding. n_fine must be a power of two; n_fine == 1
/// returns w without consuming randomness.
Eigen::MatrixXd conditioned_fine_increments(RngStream& stream,
                                            const Eigen::Ref<const Eigen::VectorXd>& w,
                                            Eigen::Index n_fine, double dt = 1.0);

struct FineBridge {
  Eigen::MatrixXd dw;  // n_fine x d increments
  Eigen::MatrixXd h;   // n_fine x d per-interval space-time areas
};

/// Space-time area over [0, dt] assembled from per-interval increments and
/// space-time areas of an equispaced partition.
Eigen::VectorXd space_time_area_from_fine(const Eigen::MatrixXd& dw,
                                          const Eigen::MatrixXd& h, double dt);

/// Fine increments and fine space-time areas conditioned on both the total
/// increment w and the total space-time area h over [0, dt] (exact Gaussian
/// conditioning, coordinate by coordinate).
FineBridge conditioned_fine_bridge(RngStream& stream,
                                   const Eigen::Ref<const Eigen::VectorXd>& w,
                                   const Eigen::Ref<const Eigen::VectorXd>& h,
                                   Eigen::Index n_fine, double dt = 1.0);

constexpr bool is_power_of_two(std::uint64_t n) { return n != 0 && (n & (n - 1)) == 0; }

}  // namespace levy::randkit
