#include "mvrl/estimation.hpp"

#include <cmath>

#include "mvrl/common.hpp"

namespace mvrl {

void EstimationWindow::validate() const {
  require(returns.rows() >= 2, ErrorCategory::validation,
          "estimation window needs at least two return observations");
  require(returns.cols() >= 1, ErrorCategory::validation,
          "estimation window needs at least one asset");
  require(returns.allFinite(), ErrorCategory::validation,
          "estimation window contains non-finite returns");
  require(std::isfinite(dt) && dt > 0.0, ErrorCategory::validation,
          "estimation window step length must be positive");
}

MLEMoments mle_moments(const EstimationWindow& window) {
  window.validate();
  const double M = static_cast<double>(window.returns.rows());

  MLEMoments out;
  out.mu_hat_minus_r = window.returns.colwise().mean() / window.dt;
  const Eigen::MatrixXd centered = window.returns.rowwise() - window.returns.colwise().mean();
  out.sample_cov = (centered.transpose() * centered) / (M * window.dt);
  out.sample_cov = 0.5 * (out.sample_cov + out.sample_cov.transpose()).eval();
  out.sigma_hat = out.sample_cov.diagonal().cwiseMax(0.0).cwiseSqrt();
  return out;
}

Eigen::MatrixXd shrink_inverse_covariance(const Eigen::MatrixXd& sample_cov, double kappa_max) {
  require(sample_cov.rows() == sample_cov.cols() && sample_cov.rows() > 0,
          ErrorCategory::validation, "covariance must be square and non-empty");
  require(sample_cov.isApprox(sample_cov.transpose(), 1e-10), ErrorCategory::validation,
          "covariance must be symmetric");
  require(std::isfinite(kappa_max) && kappa_max > 1.0, ErrorCategory::validation,
          "condition-number cap must exceed 1");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sample_cov);
  require(eig.info() == Eigen::Success, ErrorCategory::numeric,
          "eigendecomposition of the covariance failed");

  constexpr double kFloor = 1e-12;
  const double lambda_max = std::max(eig.eigenvalues().maxCoeff(), kFloor);
  const double lambda_min = lambda_max / kappa_max;

  Eigen::VectorXd inv_clipped(eig.eigenvalues().size());
  for (Eigen::Index i = 0; i < inv_clipped.size(); ++i) {
    const double clipped = std::min(std::max(eig.eigenvalues()[i], lambda_min), lambda_max);
    inv_clipped[i] = 1.0 / clipped;
  }
  Eigen::MatrixXd out =
      eig.eigenvectors() * inv_clipped.asDiagonal() * eig.eigenvectors().transpose();
  return 0.5 * (out + out.transpose()).eval();
}

}  // namespace mvrl
