#pragma once

#include <Eigen/Dense>

namespace mvrl {

// A window of observed per-step simple returns (rows = steps, columns = assets)
// together with the step length in years.
struct EstimationWindow {
  Eigen::MatrixXd returns;
  double dt = 0.0;

  void validate() const;
};

// Annualized maximum-likelihood moments of the window: sample mean scaled by
// 1/dt, the 1/M covariance scaled by 1/dt, and the per-asset volatilities.
struct MLEMoments {
  Eigen::VectorXd mu_hat_minus_r;  // per year
  Eigen::VectorXd sigma_hat;       // per sqrt(year)
  Eigen::MatrixXd sample_cov;      // per year
};

MLEMoments mle_moments(const EstimationWindow& window);

// Eigenvalue-regularized inverse: eigenvalues of `sample_cov` are clipped into
// [lambda_max / kappa_max, lambda_max] (lambda_max floored at a small positive
// constant when the matrix is numerically zero) and the inverse is formed on
// the eigenbasis. The result is symmetric positive definite with condition
// number at most kappa_max.
Eigen::MatrixXd shrink_inverse_covariance(const Eigen::MatrixXd& sample_cov, double kappa_max);

}  // namespace mvrl
