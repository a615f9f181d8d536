#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "mvrl/market.hpp"
#include "mvrl/mv_core.hpp"
#include "mvrl/policy.hpp"
#include "mvrl/value.hpp"

namespace mvrl {

// Entropy-regularized problem data: the mean-variance scalars plus the
// exploration weight lambda of the objective E[W_T] - gamma Var(W_T) + lambda * entropy.
struct ExploratoryConfig {
  double lambda = 1.0;
  double gamma = 1.0;
  double w0 = 1.0;
  double T = 1.0;

  static ExploratoryConfig from(const MVProblem& problem, double lambda) {
    return ExploratoryConfig{lambda, problem.gamma, problem.w0, problem.T};
  }
  void validate() const;
};

// Differential entropy of a Gaussian with the given covariance:
// n/2 ln(2 pi e) + 1/2 ln|cov|.
double gaussian_entropy(const Eigen::MatrixXd& cov);

struct PolicyMoments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

// Closed-form optimal exploratory policy at (t, w):
// mean = (tau/(2 gamma) - w) Sigma^{-1}(mu - r), cov = (lambda/2)(e^{K(t,T)(T-t)}/gamma) Sigma^{-1}.
PolicyMoments optimal_policy(double t, double w, const ExploratoryConfig& cfg,
                             const Profitability& prof, const Eigen::VectorXd& mu_minus_r,
                             const Eigen::MatrixXd& Sigma_inv);

// The same policy as a full curve object (exact over piecewise-constant markets).
GaussianPolicy optimal_policy_curve(const ExploratoryConfig& cfg, const Profitability& prof,
                                    const MarketModel& model);

// Closed-form optimal value; the integral term is an exact piecewise sum.
double optimal_value(double t, double w, const ExploratoryConfig& cfg, const Profitability& prof,
                     const MarketModel& model);

namespace detail {
// Analytic continuation of the closed form to t slightly outside [0, T];
// used by finite-difference residual checks at the time boundaries.
double optimal_value_unchecked(double t, double w, const ExploratoryConfig& cfg,
                               const Profitability& prof, const MarketModel& model);
}  // namespace detail

// One Euler step of the exploratory wealth dynamics: drift mean'(mu-r), squared
// diffusion mean' Sigma mean + tr(Sigma cov) (the Gaussian moments of the
// randomized allocation), driven by a standard normal `noise`.
double exploratory_wealth_step(double w, const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov,
                               const Eigen::VectorXd& mu_minus_r, const Eigen::MatrixXd& Sigma,
                               double dt, double noise);

// Policy evaluation: V(t,w) = -I w^2 + H w + G with exact exponential-integral
// coefficient curves, and tauP = 1 + 2 gamma E[W_T] unless overridden (the
// override pins the terminal condition when comparing successive policies).
ValueQuadratic evaluate_policy(const GaussianPolicy& policy, const ExploratoryConfig& cfg,
                               const MarketModel& model,
                               std::optional<double> tau_override = std::nullopt);

// Policy improvement: mean ((H/(2I)) - w) Sigma^{-1}(mu - r), cov (lambda/(2I)) Sigma^{-1},
// re-expressed exactly in the canonical (a0, a1, a2, A3) form.
GaussianPolicy improve_policy(const ValueQuadratic& value, const ExploratoryConfig& cfg,
                              const MarketModel& model);
GaussianPolicy improve_policy(const ValueQuadratic& value, const ExploratoryConfig& cfg,
                              const Eigen::VectorXd& mu_minus_r, const Eigen::MatrixXd& Sigma_inv);

struct PolicyIterationResult {
  GaussianPolicy policy;
  ValueQuadratic value;
  std::vector<double> tau_sequence;  // tau^{P_0}, tau^{P_1}, ...
  bool converged = false;
  double tau_star = 0.0;  // closed-form limit e^{K(0,T)T} + 2 gamma w0
};

// Alternates evaluate/improve until |tau_n - tau_{n-1}| < tol.
PolicyIterationResult policy_iterate(const GaussianPolicy& initial, const ExploratoryConfig& cfg,
                                     const MarketModel& model, double tol, int max_iter);

}  // namespace mvrl
