#include "adrobust/covariance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "adrobust/error.hpp"

namespace adrobust {

const char* estimator_name(Estimator e) noexcept {
  return e == Estimator::empirical ? "empirical" : "ledoit_wolf";
}

Estimator parse_estimator(std::string_view name) {
  if (name == "empirical") return Estimator::empirical;
  if (name == "ledoit_wolf" || name == "ledoit" || name == "ledoit-wolf") return Estimator::ledoit_wolf;
  throw InvalidArgument("unknown covariance estimator '" + std::string(name) + "'");
}

Eigen::MatrixXd symmetric_pseudo_inverse(const Eigen::MatrixXd& sym) {
  const Eigen::Index p = sym.rows();
  if (p == 0) return Eigen::MatrixXd(0, 0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  const Eigen::VectorXd& lambda = eig.eigenvalues();
  const double lambda_max = lambda.maxCoeff();
  if (!(lambda_max > 0.0)) return Eigen::MatrixXd::Zero(p, p);
  const double cutoff = static_cast<double>(p) * std::numeric_limits<double>::epsilon() * lambda_max;
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(p);
  for (Eigen::Index i = 0; i < p; ++i) {
    if (lambda[i] > cutoff) inv[i] = 1.0 / lambda[i];
  }
  const Eigen::MatrixXd& v = eig.eigenvectors();
  Eigen::MatrixXd out = v * inv.asDiagonal() * v.transpose();
  return 0.5 * (out + out.transpose());
}

namespace {

void check_samples(const Eigen::MatrixXd& samples) {
  if (samples.rows() < 1) throw InvalidArgument("covariance estimation needs at least one sample");
  if (!samples.allFinite()) throw InvalidArgument("covariance input contains NaN or Inf");
}

struct Moments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd centered;
  Eigen::MatrixXd cov;
};

Moments mle_moments(const Eigen::MatrixXd& samples) {
  const double n = static_cast<double>(samples.rows());
  Moments m;
  m.mean = samples.colwise().mean().transpose();
  m.centered = samples.rowwise() - m.mean.transpose();
  m.cov = Eigen::MatrixXd(samples.cols(), samples.cols());
  m.cov.setZero();
  m.cov.selfadjointView<Eigen::Lower>().rankUpdate(m.centered.transpose(), 1.0 / n);
  m.cov = m.cov.selfadjointView<Eigen::Lower>();
  return m;
}

}  // namespace

GaussianStats fit_empirical(const Eigen::MatrixXd& samples) {
  check_samples(samples);
  Moments m = mle_moments(samples);
  GaussianStats out;
  out.mean = std::move(m.mean);
  out.precision = symmetric_pseudo_inverse(m.cov);
  out.covariance = std::move(m.cov);
  out.estimator = Estimator::empirical;
  out.shrinkage = 0.0;
  out.n_samples = static_cast<std::size_t>(samples.rows());
  return out;
}

double ledoit_wolf_shrinkage(const Eigen::MatrixXd& centered, const Eigen::MatrixXd& emp_cov) {
  const double n = static_cast<double>(centered.rows());
  const double p = static_cast<double>(centered.cols());
  const double trace = emp_cov.trace();
  const double mu = trace / p;
  // ||S||_F^2 and sum_k ||x_k||^4, from which the mean squared deviation of
  // the per-sample scatter x_k x_k^T around S follows without forming it.
  const double cov_sq = emp_cov.squaredNorm();
  const double fourth = centered.rowwise().squaredNorm().squaredNorm();
  double b2 = (fourth / n - cov_sq) / (p * n);
  const double d2 = (cov_sq - 2.0 * mu * trace + p * mu * mu) / p;
  if (!(d2 > 0.0)) return 1.0;
  b2 = std::clamp(b2, 0.0, d2);
  return b2 / d2;
}

GaussianStats fit_ledoit_wolf(const Eigen::MatrixXd& samples) {
  if (samples.cols() == 0) throw InvalidArgument("Ledoit-Wolf estimation needs at least one feature");
  check_samples(samples);
  Moments m = mle_moments(samples);
  const Eigen::Index p = samples.cols();
  const double delta = ledoit_wolf_shrinkage(m.centered, m.cov);
  const double mu = m.cov.trace() / static_cast<double>(p);

  Eigen::MatrixXd shrunk = (1.0 - delta) * m.cov;
  shrunk.diagonal().array() += delta * mu;

  GaussianStats out;
  out.mean = std::move(m.mean);
  Eigen::LLT<Eigen::MatrixXd> llt(shrunk);
  if (mu > 0.0 && llt.info() == Eigen::Success) {
    Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(p, p));
    out.precision = 0.5 * (inv + inv.transpose());
  } else {
    out.precision = symmetric_pseudo_inverse(shrunk);
  }
  out.covariance = std::move(shrunk);
  out.estimator = Estimator::ledoit_wolf;
  out.shrinkage = delta;
  out.n_samples = static_cast<std::size_t>(samples.rows());
  return out;
}

GaussianStats fit_gaussian(const Eigen::MatrixXd& samples, Estimator estimator) {
  return estimator == Estimator::empirical ? fit_empirical(samples) : fit_ledoit_wolf(samples);
}

double mahalanobis(const GaussianStats& stats, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != stats.mean.size()) {
    throw DimensionMismatch("mahalanobis: vector has dimension " + std::to_string(x.size()) +
                            ", model has " + std::to_string(stats.mean.size()));
  }
  const Eigen::VectorXd diff = x - stats.mean;
  const double q = diff.dot(stats.precision.selfadjointView<Eigen::Lower>() * diff);
  return std::sqrt(std::max(0.0, q));
}

double mahalanobis(const GaussianStats& stats, std::span<const double> x) {
  return mahalanobis(stats, Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size())));
}

}  // namespace adrobust
