#pragma once

// Conditional Lévy-area samplers. Every batch sampler draws row r from
// stream.substream(r), so outputs do not depend on the thread count and a
// batch prefix equals the batch of that size.

#include "levy/core.hpp"
#include "levy/pairnet.hpp"
#include "levy/rng.hpp"

#include <memory>
#include <string>

namespace levy {

enum class SamplerKind { Talay, Davie, CondGauss, Foster, PairNet, Reference };

SamplerKind parse_sampler_kind(const std::string& name);
std::string to_string(SamplerKind kind);

struct SamplerSpec {
  SamplerKind kind = SamplerKind::Foster;
  int depth = 10;  // Reference only
  std::shared_ptr<const pairnet::GeneratorModel> model;  // PairNet only
  pairnet::GenerateOptions generate;
};

/// Unit-variance factor behind every scaled sampler: Var(A_{0,dt}) = dt^2/4.
inline constexpr double kAreaVarianceUnit = 0.25;

/// Independent +-dt/2 per pair; ignores w.
Eigen::MatrixXd talay_area(const randkit::RngStream& stream, Eigen::Index n, int d, double dt);
/// Independent N(0, dt^2/4) per pair; ignores w.
Eigen::MatrixXd davie_area(const randkit::RngStream& stream, Eigen::Index n, int d, double dt);
/// h_i w_j - w_i h_j + g_ij with h ~ N(0, dt/12), g ~ N(0, dt^2/12).
Eigen::MatrixXd cond_gauss_area(const randkit::RngStream& stream, const Eigen::MatrixXd& w,
                                double dt);

struct FosterSample {
  Eigen::MatrixXd a;  // n x a'
  Eigen::MatrixXd h;  // n x d
  Eigen::MatrixXd k;  // n x d
};

/// Foster's moment-matching approximation.
FosterSample foster_area(const randkit::RngStream& stream, const Eigen::MatrixXd& w, double dt);

/// Foster areas with a prescribed space-time area h (per row), as used when
/// conditioning on (w, h).
Eigen::MatrixXd foster_area_given_h(const randkit::RngStream& stream, const Eigen::MatrixXd& w,
                                    const Eigen::MatrixXd& h, double dt);

/// High-accuracy oracle: per row, 2^depth fine increments conditioned to sum
/// to w, a Foster area on each fine interval, then a dyadic Chen tree.
/// depth = 0 coincides with foster_area for the same stream.
Eigen::MatrixXd reference_area(const randkit::RngStream& stream, const Eigen::MatrixXd& w,
                               double dt, int depth);

/// Reference oracle conditioned on both w and the space-time area h per row:
/// fine increments and fine space-time areas are drawn jointly conditioned on
/// (w, h), each fine area from Foster given its fine h, then a Chen tree.
Eigen::MatrixXd reference_area_given_h(const randkit::RngStream& stream, const Eigen::MatrixXd& w,
                                       const Eigen::MatrixXd& h, double dt, int depth);

/// Dispatcher; w is passed through unchanged.
LevyBatch sample_area(const SamplerSpec& spec, const randkit::RngStream& stream,
                      const Eigen::MatrixXd& w, double dt);

/// Draws w ~ N(0, dt) (stream.substream(0)) then areas (stream.substream(1)).
LevyBatch sample_joint(const SamplerSpec& spec, const randkit::RngStream& stream, Eigen::Index n,
                       int d, double dt);

/// Exact joint batch substitute: the reference oracle with its own fresh w.
LevyBatch reference_batch(const randkit::RngStream& stream, Eigen::Index n, int d, double dt,
                          int depth);

namespace detail {

/// Single-row kernels drawing sequentially from `s`. a has length d(d-1)/2.
void foster_row(randkit::RngStream& s, const double* w, int d, double dt, double* a,
                double* h_out = nullptr, double* k_out = nullptr);
void foster_row_given_h(randkit::RngStream& s, const double* w, const double* h, int d,
                        double dt, double* a);
void base_row(SamplerKind kind, randkit::RngStream& s, const double* w, int d, double dt,
              double* a);

/// In-place dyadic Chen tree over n_fine (power of two) consecutive segments.
/// w_fine is n_fine x d row-major, a_fine n_fine x a' row-major; the result
/// lands in row 0.
void chen_tree(double* w_fine, double* a_fine, int n_fine, int d);

}  // namespace detail

}  // namespace levy
