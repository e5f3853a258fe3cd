#pragma once

// Analytic joint characteristic function of (W, A), empirical and unitary
// characteristic functions, and the distances built from them.

#include "levy/core.hpp"
#include "levy/rng.hpp"

#include <complex>
#include <string>
#include <vector>

namespace levy::cf {

/// Real canonical form of an antisymmetric matrix: lambda = R^T S R with S
/// block diagonal, blocks [[0, -eta_k], [eta_k, 0]] then d0 zeros.
struct AntisymDecomposition {
  Eigen::MatrixXd R;    // d x d orthogonal
  Eigen::VectorXd eta;  // positive, descending
  int d0 = 0;

  Eigen::MatrixXd canonical() const;  // the block matrix S
};

AntisymDecomposition antisym_decompose(const Eigen::MatrixXd& lambda);
/// From the flattened upper triangle.
AntisymDecomposition antisym_decompose_flat(const Eigen::VectorXd& lambda_flat);

/// E exp(i <mu, W_t> + i <lambda, A_t>) for d-dimensional Brownian motion.
/// The value is real and lies in (0, 1].
double joint_cf(double t, const Eigen::VectorXd& mu, const Eigen::VectorXd& lambda_flat);

/// Degree-1 frequencies: one row per frequency, columns = data dimension.
using Frequencies = Eigen::MatrixXd;

/// Mean of exp(i <f, x_s>) over rows x_s, one entry per frequency row f.
Eigen::VectorXcd empirical_cf(const Eigen::MatrixXd& x, const Frequencies& freqs);

/// Unbiased: U-statistic estimate of the mean squared modulus, which has no
/// finite-sample floor for independent samples. It can be slightly negative.
enum class CfNorm { L1, L2, Unbiased };

CfNorm parse_norm(const std::string& name);

/// Mean over frequencies of |cf_x - cf_y| (L1), sqrt of the mean squared
/// modulus (L2), or the unbiased estimate of the mean squared modulus.
double cfd(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const Frequencies& freqs,
           CfNorm norm = CfNorm::L1);

/// Linear maps into anti-Hermitian n x n matrices: maps[m][k] is the image
/// of the k-th coordinate basis vector under map m.
struct UnitaryFrequencies {
  int degree = 2;
  std::vector<std::vector<Eigen::MatrixXcd>> maps;

  int dim() const { return maps.empty() ? 0 : static_cast<int>(maps.front().size()); }
};

enum class FrequencyLaw { Gaussian, Cauchy };

Frequencies random_frequencies(randkit::RngStream& stream, int count, int dim, double scale = 1.0,
                               FrequencyLaw law = FrequencyLaw::Gaussian);
UnitaryFrequencies random_unitary_frequencies(randkit::RngStream& stream, int count, int dim,
                                              int degree, double scale = 1.0);

/// exp(M) for anti-Hermitian M via the eigendecomposition of -iM.
Eigen::MatrixXcd expm_anti_hermitian(const Eigen::MatrixXcd& m);

/// Empirical unitary characteristic function, one n x n matrix per map.
std::vector<Eigen::MatrixXcd> ucf(const Eigen::MatrixXd& x, const UnitaryFrequencies& freqs);

/// Mean over maps of the Hilbert-Schmidt norm of the EUCF difference.
double ucfd(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const UnitaryFrequencies& freqs);

}  // namespace levy::cf
