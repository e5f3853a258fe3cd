#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace levy {

/// Number of independent Lévy-area entries for Brownian dimension d.
constexpr int area_dim(int d) { return d * (d - 1) / 2; }

/// Row-major position of pair (i, j), i < j, in the flattened upper triangle.
constexpr int pair_index(int i, int j, int d) {
  return i * d - i * (i + 1) / 2 + (j - i - 1);
}

/// All (i, j), i < j, in storage order.
inline std::vector<std::pair<int, int>> pair_list(int d) {
  std::vector<std::pair<int, int>> out;
  out.reserve(static_cast<std::size_t>(area_dim(d)));
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) out.emplace_back(i, j);
  return out;
}

/// Recovers d from the flattened area length, or -1 if no d matches.
inline int dim_from_area(Eigen::Index a) {
  for (int d = 1; area_dim(d) <= a; ++d)
    if (area_dim(d) == a) return d;
  return -1;
}

/// Antisymmetric d x d matrix from its flattened upper triangle.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>
antisym_from_flat(const Eigen::MatrixBase<Derived>& flat, int d) {
  using Scalar = typename Derived::Scalar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> m =
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(d, d);
  int p = 0;
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j, ++p) {
      m(i, j) = flat(p);
      m(j, i) = -flat(p);
    }
  return m;
}

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> flat_from_antisym(
    const Eigen::MatrixBase<Derived>& m) {
  const int d = static_cast<int>(m.rows());
  Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> out(area_dim(d));
  int p = 0;
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) out(p++) = m(i, j);
  return out;
}

/// A batch of paired Brownian increments and flattened Lévy areas at time
/// scale dt. Row r of `w` and row r of `a` belong to the same sample.
struct LevyBatch {
  int d = 0;
  double dt = 1.0;
  Eigen::MatrixXd w;  // n x d
  Eigen::MatrixXd a;  // n x d(d-1)/2

  // Provenance carried into serialized headers.
  std::string sampler = "unknown";
  std::uint64_t seed = 0;
  int depth = -1;

  Eigen::Index size() const { return w.rows(); }

  /// Joint (w, a) sample matrix, n x (d + a').
  Eigen::MatrixXd joint() const {
    Eigen::MatrixXd x(w.rows(), w.cols() + a.cols());
    x << w, a;
    return x;
  }

  /// First n rows.
  LevyBatch head(Eigen::Index n) const {
    LevyBatch out = *this;
    out.w = w.topRows(n);
    out.a = a.topRows(n);
    return out;
  }

  void validate() const {
    if (d < 1) throw std::invalid_argument("LevyBatch: d must be >= 1");
    if (w.cols() != d || a.cols() != area_dim(d) || w.rows() != a.rows())
      throw std::invalid_argument("LevyBatch: inconsistent shapes");
    if (!(dt > 0.0)) throw std::invalid_argument("LevyBatch: dt must be > 0");
  }
};

/// Raised for malformed or truncated files and version mismatches.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Library version plus build description.
const char* version_string();

}  // namespace levy
