#pragma once

#include <Eigen/Dense>

#include "mvrl/grid.hpp"
#include "mvrl/market.hpp"

namespace mvrl {

// Scalar curve that is constant on each grid segment, with exact integrals.
struct PiecewiseScalar {
  TimeGrid grid;
  std::vector<double> values;  // one per segment

  void validate() const;
  double value_at(double t) const;
  double integral(double a, double b) const;           // exact segment sums
  double average(double a, double b) const;             // integral / (b - a)
  double backward_double_integral(double t, double T) const;  // int_t^T int_s^T v dr ds
};

// Mean-variance problem data: maximize E[W_T] - gamma * Var(W_T) over [0, T]
// starting from discounted wealth w0.
struct MVProblem {
  double gamma = 1.0;
  double w0 = 1.0;
  double T = 1.0;
  MarketModel model;

  void validate() const;
};

// Market profitability: A(t) = (mu-r)' Sigma^{-1} (mu-r), its horizon average
// K(t,T), and the wealth-target scalar tau = exp(K(0,T) T) + 2 gamma w0.
struct Profitability {
  PiecewiseScalar A;
  double T = 0.0;
  double tau = 0.0;

  double K(double t) const { return A.average(t, T); }
};

// Instantaneous profitability from explicit moments.
double profitability_A(const Eigen::VectorXd& mu_minus_r, const Eigen::MatrixXd& Sigma_inv);

// Assembles the profitability curve of a problem's market over [0, T]; the
// quadratic form is computed by linear solve on each segment.
Profitability compute_profitability(const MVProblem& problem);

// Time-average of a piecewise-constant profitability curve over [t, T].
double average_K(const PiecewiseScalar& A, double t, double T);

// Multi-asset combination law for per-asset average profitabilities under a
// stationary market: K = sqrt(K)' L^{-1} sqrt(K) with L the correlation.
double combine_K(const Eigen::VectorXd& per_asset_K, const Eigen::MatrixXd& rho);

// Closed-form optimal allocation (tau/(2 gamma) - w) * Sigma^{-1} (mu - r),
// in discounted currency units per asset.
Eigen::VectorXd classical_allocation(double w, const MVProblem& problem, const Profitability& prof,
                                     const Eigen::VectorXd& mu_minus_r,
                                     const Eigen::MatrixXd& Sigma_inv);

}  // namespace mvrl
