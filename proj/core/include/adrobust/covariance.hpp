#pragma once

#include <cstddef>
#include <span>
#include <string_view>

#include <Eigen/Core>

namespace adrobust {

enum class Estimator { empirical, ledoit_wolf };

const char* estimator_name(Estimator e) noexcept;
/// Accepts "empirical" and "ledoit_wolf" (also "ledoit", "ledoit-wolf").
Estimator parse_estimator(std::string_view name);

/// Fitted Gaussian: mean, covariance and the precision used for scoring.
///
/// `covariance` may be empty (0 x 0) when a model keeps only the precision to
/// save memory; `precision` is always present.
struct GaussianStats {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
  Eigen::MatrixXd precision;
  Estimator estimator = Estimator::empirical;
  double shrinkage = 0.0;
  std::size_t n_samples = 0;

  Eigen::Index dim() const noexcept { return mean.size(); }
  bool has_covariance() const noexcept { return covariance.size() != 0; }
};

/// Moore-Penrose pseudo-inverse of a symmetric matrix through its
/// eigendecomposition. Eigenvalues <= p * eps * lambda_max are treated as zero.
Eigen::MatrixXd symmetric_pseudo_inverse(const Eigen::MatrixXd& sym);

/// Maximum-likelihood (divisor n) mean and covariance; precision is the
/// pseudo-inverse. Rows of `samples` are observations. Requires n >= 1.
GaussianStats fit_empirical(const Eigen::MatrixXd& samples);

/// Ledoit-Wolf intensity for already-centred data, in [0, 1].
double ledoit_wolf_shrinkage(const Eigen::MatrixXd& centered, const Eigen::MatrixXd& emp_cov);

/// (1 - delta) * S + delta * (tr(S)/p) * I with the Ledoit-Wolf (2004) optimal
/// delta. Precision via Cholesky; falls back to the pseudo-inverse when the
/// shrunk matrix is not positive-definite (all rows identical).
GaussianStats fit_ledoit_wolf(const Eigen::MatrixXd& samples);

GaussianStats fit_gaussian(const Eigen::MatrixXd& samples, Estimator estimator);

/// sqrt(max(0, (x - mu)^T P (x - mu))). Throws DimensionMismatch.
double mahalanobis(const GaussianStats& stats, std::span<const double> x);
double mahalanobis(const GaussianStats& stats, const Eigen::Ref<const Eigen::VectorXd>& x);

}  // namespace adrobust
