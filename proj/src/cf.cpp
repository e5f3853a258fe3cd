#include "levy/cf.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace levy::cf {

namespace {

constexpr double kRankTolerance = 1e-12;
constexpr double kSeriesThreshold = 1e-6;
constexpr Eigen::Index kChunk = 4096;

}  // namespace

Eigen::MatrixXd AntisymDecomposition::canonical() const {
  const Eigen::Index d = R.rows();
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index k = 0; k < eta.size(); ++k) {
    s(2 * k, 2 * k + 1) = -eta(k);
    s(2 * k + 1, 2 * k) = eta(k);
  }
  return s;
}

AntisymDecomposition antisym_decompose(const Eigen::MatrixXd& lambda) {
  const Eigen::Index d = lambda.rows();
  if (lambda.cols() != d) throw std::invalid_argument("antisym_decompose: matrix not square");
  if (!lambda.allFinite()) throw std::invalid_argument("antisym_decompose: non-finite input");
  AntisymDecomposition out;
  const double scale = lambda.norm();
  if (scale == 0.0) {
    out.R = Eigen::MatrixXd::Identity(d, d);
    out.eta.resize(0);
    out.d0 = static_cast<int>(d);
    return out;
  }
  const std::complex<double> i_unit(0.0, 1.0);
  const Eigen::MatrixXcd herm = i_unit * lambda.cast<std::complex<double>>();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm);
  const Eigen::VectorXd mu = es.eigenvalues();  // ascending: -eta_1 <= -eta_2 <= ...
  const double tol = kRankTolerance * scale;

  std::vector<Eigen::VectorXd> rows;
  std::vector<double> etas;
  for (Eigen::Index k = 0; k < d && mu(k) < -tol; ++k) {
    // lambda v = i eta v with v = x + i y gives lambda x = -eta y, lambda y = eta x.
    const Eigen::VectorXcd v = es.eigenvectors().col(k);
    rows.push_back(std::sqrt(2.0) * v.imag());
    rows.push_back(std::sqrt(2.0) * v.real());
    etas.push_back(-mu(k));
  }
  out.eta = Eigen::Map<const Eigen::VectorXd>(etas.data(), static_cast<Eigen::Index>(etas.size()));
  out.d0 = static_cast<int>(d) - 2 * static_cast<int>(etas.size());
  out.R.resize(d, d);
  Eigen::MatrixXd projector = Eigen::MatrixXd::Identity(d, d);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    out.R.row(static_cast<Eigen::Index>(k)) = rows[k].transpose();
    projector -= rows[k] * rows[k].transpose();
  }
  if (out.d0 > 0) {
    // Real orthonormal basis of the kernel: top eigenvectors of the projector.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ps(projector);
    for (int k = 0; k < out.d0; ++k)
      out.R.row(static_cast<Eigen::Index>(rows.size()) + k) =
          ps.eigenvectors().col(d - 1 - k).transpose();
  }
  return out;
}

AntisymDecomposition antisym_decompose_flat(const Eigen::VectorXd& lambda_flat) {
  const int d = dim_from_area(lambda_flat.size());
  if (d < 0) throw std::invalid_argument("flattened length is not d(d-1)/2 for any d");
  return antisym_decompose(antisym_from_flat(lambda_flat, d));
}

double joint_cf(double t, const Eigen::VectorXd& mu, const Eigen::VectorXd& lambda_flat) {
  if (!(t > 0.0)) throw std::invalid_argument("joint_cf: t must be positive");
  const int d = static_cast<int>(mu.size());
  if (lambda_flat.size() != area_dim(d))
    throw std::invalid_argument("joint_cf: lambda length does not match mu");
  const AntisymDecomposition dec = antisym_decompose(antisym_from_flat(lambda_flat, d));
  const Eigen::VectorXd rmu = dec.R * mu;
  double log_value = 0.0;
  for (Eigen::Index k = 0; k < dec.eta.size(); ++k) {
    const double eta = dec.eta(k);
    const double x = 0.5 * eta * t;
    // tanh(x) / eta -> t/2 - eta^2 t^3 / 24 as eta t -> 0.
    const double tanh_over_eta =
        eta * t < kSeriesThreshold ? 0.5 * t - eta * eta * t * t * t / 24.0 : std::tanh(x) / eta;
    log_value -= std::log(std::cosh(x));
    log_value -= (rmu(2 * k) * rmu(2 * k) + rmu(2 * k + 1) * rmu(2 * k + 1)) * tanh_over_eta;
  }
  for (Eigen::Index k = 2 * dec.eta.size(); k < d; ++k) log_value -= 0.5 * t * rmu(k) * rmu(k);
  return std::exp(log_value);
}

Eigen::VectorXcd empirical_cf(const Eigen::MatrixXd& x, const Frequencies& freqs) {
  if (freqs.cols() != x.cols()) throw std::invalid_argument("empirical_cf: dimension mismatch");
  if (x.rows() == 0) throw std::invalid_argument("empirical_cf: empty sample");
  Eigen::VectorXd re = Eigen::VectorXd::Zero(freqs.rows()), im = Eigen::VectorXd::Zero(freqs.rows());
  for (Eigen::Index begin = 0; begin < x.rows(); begin += kChunk) {
    const Eigen::Index rows = std::min(kChunk, x.rows() - begin);
    const Eigen::MatrixXd phase = x.middleRows(begin, rows) * freqs.transpose();
    re += phase.array().cos().matrix().colwise().sum().transpose();
    im += phase.array().sin().matrix().colwise().sum().transpose();
  }
  const double n = static_cast<double>(x.rows());
  Eigen::VectorXcd out(freqs.rows());
  for (Eigen::Index m = 0; m < freqs.rows(); ++m) out(m) = {re(m) / n, im(m) / n};
  return out;
}

double cfd(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const Frequencies& freqs,
           CfNorm norm) {
  if (x.cols() != y.cols()) throw std::invalid_argument("cfd: dimension mismatch");
  const Eigen::VectorXcd fx = empirical_cf(x, freqs), fy = empirical_cf(y, freqs);
  const Eigen::VectorXd diff = (fx - fy).cwiseAbs();
  if (norm == CfNorm::L1) return diff.mean();
  if (norm == CfNorm::L2) return std::sqrt(diff.squaredNorm() / static_cast<double>(diff.size()));
  if (x.rows() < 2 || y.rows() < 2) throw std::invalid_argument("cfd: unbiased needs >= 2 rows");
  const double nx = static_cast<double>(x.rows()), ny = static_cast<double>(y.rows());
  const Eigen::ArrayXd ux = (nx * fx.cwiseAbs2().array() - 1.0) / (nx - 1.0);
  const Eigen::ArrayXd uy = (ny * fy.cwiseAbs2().array() - 1.0) / (ny - 1.0);
  const Eigen::ArrayXd cross = (fx.array() * fy.array().conjugate()).real();
  return (ux + uy - 2.0 * cross).mean();
}

CfNorm parse_norm(const std::string& name) {
  if (name == "l1") return CfNorm::L1;
  if (name == "l2") return CfNorm::L2;
  if (name == "unbiased") return CfNorm::Unbiased;
  throw std::invalid_argument("unknown CF norm '" + name + "' (l1, l2, unbiased)");
}

Frequencies random_frequencies(randkit::RngStream& stream, int count, int dim, double scale,
                               FrequencyLaw law) {
  if (count < 1 || dim < 1) throw std::invalid_argument("frequency set must be non-empty");
  Frequencies f(count, dim);
  for (Eigen::Index i = 0; i < f.rows(); ++i)
    for (Eigen::Index j = 0; j < f.cols(); ++j) {
      if (law == FrequencyLaw::Gaussian) {
        f(i, j) = scale * stream.normal();
      } else {
        f(i, j) = scale * std::tan(std::numbers::pi * (stream.uniform() - 0.5));
      }
    }
  return f;
}

UnitaryFrequencies random_unitary_frequencies(randkit::RngStream& stream, int count, int dim,
                                              int degree, double scale) {
  if (degree < 1) throw std::invalid_argument("degree must be >= 1");
  UnitaryFrequencies out;
  out.degree = degree;
  out.maps.resize(static_cast<std::size_t>(count));
  for (auto& map : out.maps) {
    for (int k = 0; k < dim; ++k) {
      Eigen::MatrixXcd g(degree, degree);
      for (Eigen::Index i = 0; i < g.size(); ++i) g(i) = {stream.normal(), stream.normal()};
      map.push_back(0.5 * scale * (g - g.adjoint()));
    }
  }
  return out;
}

Eigen::MatrixXcd expm_anti_hermitian(const Eigen::MatrixXcd& m) {
  const std::complex<double> i_unit(0.0, 1.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(-i_unit * m);
  const Eigen::VectorXcd phases =
      (i_unit * es.eigenvalues().cast<std::complex<double>>()).array().exp();
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

std::vector<Eigen::MatrixXcd> ucf(const Eigen::MatrixXd& x, const UnitaryFrequencies& freqs) {
  if (freqs.dim() != x.cols()) throw std::invalid_argument("ucf: dimension mismatch");
  for (const auto& map : freqs.maps)
    for (const auto& b : map)
      if (!(b + b.adjoint()).isZero(1e-12))
        throw std::invalid_argument("ucf: basis image is not anti-Hermitian");
  std::vector<Eigen::MatrixXcd> out;
  for (const auto& map : freqs.maps) {
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(freqs.degree, freqs.degree);
    for (Eigen::Index s = 0; s < x.rows(); ++s) {
      Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(freqs.degree, freqs.degree);
      for (Eigen::Index k = 0; k < x.cols(); ++k) m += x(s, k) * map[static_cast<std::size_t>(k)];
      acc += expm_anti_hermitian(m);
    }
    out.push_back(acc / static_cast<double>(x.rows()));
  }
  return out;
}

double ucfd(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const UnitaryFrequencies& freqs) {
  const auto ux = ucf(x, freqs), uy = ucf(y, freqs);
  double total = 0;
  for (std::size_t m = 0; m < ux.size(); ++m) total += (ux[m] - uy[m]).norm();
  return ux.empty() ? 0.0 : total / static_cast<double>(ux.size());
}

}  // namespace levy::cf
