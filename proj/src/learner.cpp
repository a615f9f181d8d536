#include "mvrl/learner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <limits>

#include "mvrl/common.hpp"
#include "mvrl/estimation.hpp"
#include "mvrl/mv_core.hpp"

namespace mvrl {
namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kMinVariance = 1e-12;

// Critic parameters as a plain quadruple so the 1-d and joint updates share
// one descent routine. v(t,w) = -gamma e^{-p2 (T-t)} (w - p1/(2 gamma))^2
//                              + p3 + (lambda/2) p4 (T-t).
// p3 is the terminal level and p4 the level's time slope. For any policy in
// the Gaussian family the true level drains at rate
// lambda*(entropy - n/2), so p4 is pinned to 2*entropy - n analytically at
// every update rather than descended: the residual's within-update
// sensitivity to p4 has the opposite sign of its across-update role (raising
// p4 raises the predicted next value but lowers every future entry residual),
// so descending it feeds the absorbed residual back on itself. With p4
// tracking the slope, the entry residual is centred at zero when the other
// parameters are consistent with the data.
struct Psi {
  double p1 = 0.0, p2 = 0.0, p3 = 0.0, p4 = 0.0;
};

struct DeltaEval {
  double delta = 0.0;
  double d2 = 0.0, d3 = 0.0;  // partials of delta w.r.t. psi2, psi3
};

// Sample-average Bellman residual and its psi-gradient. `next_wealth` holds
// the simulated branch wealths at t + dt; psi_bar (the previous time point's
// parameters) supplies the level that prices the current state, while the
// decay psi2 prices both time points. Differentiating the residual through
// both legs (the residual-gradient form) is what keeps psi2 stable: a
// one-sided gradient against a frozen current-state value has the opposite
// sign of the residual's dependence on psi2 across updates, so descending it
// pushes psi2 away from the consistent point instead of toward it.
//
// The psi2 partial uses `exp_dev_sq_next`, the analytic expectation of the
// squared next-state deviation under the entry policy, instead of the batch
// average. The batch average shares its sampling noise with delta, and the
// product E[delta * ddelta/dpsi2] then picks up the derivative of the noise
// variance — which the decay damps, so descending the sampled squared
// residual inflates psi2 to suppress noise rather than to zero the expected
// residual. A state-measurable gradient factor is uncorrelated with delta's
// noise, leaving E[delta] = 0 as the fixed point.
DeltaEval eval_delta(const Psi& psi, const Psi& psi_bar, double gamma, double lambda, double T,
                     double t, double dt, double W_t, const std::vector<double>& next_wealth,
                     double entropy, double exp_dev_sq_next) {
  const double ttg = std::max(T - t, 0.0);
  const double u = std::max(T - t - dt, 0.0);
  const double decay = std::exp(-psi.p2 * u);
  double sum_v = 0.0;
  for (const double w : next_wealth) {
    const double dev = w - psi.p1 / (2.0 * gamma);
    sum_v += -gamma * decay * dev * dev;
  }
  const double M = static_cast<double>(next_wealth.size());
  const double mean_v = sum_v / M + psi.p3 + 0.5 * lambda * psi.p4 * u;
  const double decay_bar = std::exp(-psi.p2 * ttg);
  const double dev0 = W_t - psi_bar.p1 / (2.0 * gamma);
  const double v_bar = -gamma * decay_bar * dev0 * dev0 + psi_bar.p3 +
                       0.5 * lambda * psi_bar.p4 * ttg;

  DeltaEval out;
  out.delta = (mean_v - v_bar) / dt + lambda * entropy;
  out.d2 = gamma * (u * decay * exp_dev_sq_next - ttg * decay_bar * dev0 * dev0) / dt;
  out.d3 = 1.0 / dt;
  return out;
}

// k_inner gradient-descent steps on (psi2, psi3) with halving backtracking,
// so no accepted step increases the loss. Returns false (psi untouched) when
// a gradient turns non-finite.
bool critic_descend(Psi& psi, const Psi& psi_bar, double gamma, double lambda, double T, double t,
                    double dt, double W_t, const std::vector<double>& next_wealth, double entropy,
                    double exp_dev_sq_next, double eta2, double eta3, int k_inner) {
  static const bool dbg = std::getenv("MVRL_DBG") != nullptr;
  if (dbg) {
    const DeltaEval e0 = eval_delta(psi, psi_bar, gamma, lambda, T, t, dt, W_t, next_wealth,
                                    entropy, exp_dev_sq_next);
    std::fprintf(stderr, "DBG t=%.6f W=%.6f p1=%.6f p2=%.6f delta=%.8f d2=%.8f h=%.6f\n", t, W_t,
                 psi.p1, psi.p2, e0.delta, e0.d2, entropy);
  }
  Psi work = psi;
  for (int it = 0; it < k_inner; ++it) {
    const DeltaEval ev = eval_delta(work, psi_bar, gamma, lambda, T, t, dt, W_t, next_wealth,
                                    entropy, exp_dev_sq_next);
    const double loss = 0.5 * dt * ev.delta * ev.delta;
    const double g2 = dt * ev.delta * ev.d2;
    const double g3 = dt * ev.delta * ev.d3;
    if (!std::isfinite(g2) || !std::isfinite(g3)) return false;

    bool applied = false;
    double scale = 1.0;
    for (int bt = 0; bt < 12; ++bt) {
      Psi trial = work;
      trial.p2 -= scale * eta2 * g2;
      trial.p3 -= scale * eta3 * g3;
      const DeltaEval tev = eval_delta(trial, psi_bar, gamma, lambda, T, t, dt, W_t, next_wealth,
                                       entropy, exp_dev_sq_next);
      const double trial_loss = 0.5 * dt * tev.delta * tev.delta;
      if (std::isfinite(trial_loss) && trial_loss <= loss) {
        work = trial;
        applied = true;
        break;
      }
      scale *= 0.5;
    }
    if (!applied) break;  // descent direction exhausted at this resolution
  }
  psi = work;
  return true;
}

double policy_variance_1d(const AssetLearnerState& s, double time_to_go) {
  return 0.5 * s.problem.lambda * std::exp(s.phi2 * time_to_go) / s.problem.gamma * s.phi4;
}

// E[(W_{t+dt} - psi1/2gamma)^2] under the entry policy, with the return's
// first two moments taken from the learner's own estimates (phi3, 1/phi4).
double expected_dev_sq_next_1d(const AssetLearnerState& s, double W_t, double mean, double var,
                               double dt) {
  const double dev0 = W_t - s.psi1 / (2.0 * s.problem.gamma);
  const double r1 = s.phi3 * dt;
  const double r2 = dt / s.phi4 + r1 * r1;
  return dev0 * dev0 + 2.0 * dev0 * mean * r1 + (mean * mean + var) * r2;
}

}  // namespace

void AssetLearnerState::validate() const {
  problem.validate();
  require(std::isfinite(phi1) && std::isfinite(phi2) && std::isfinite(phi3),
          ErrorCategory::validation, "policy parameters must be finite");
  require(std::isfinite(phi4) && phi4 > 0.0, ErrorCategory::validation,
          "inverse-variance parameter must be positive");
  require(std::isfinite(psi1) && std::isfinite(psi2) && std::isfinite(psi3) &&
              std::isfinite(psi4),
          ErrorCategory::validation, "value parameters must be finite");
  require(k_inner >= 1, ErrorCategory::validation, "inner iteration count must be positive");
}

void JointLearnerState::validate() const {
  problem.validate();
  require(std::isfinite(phi1) && std::isfinite(phi2), ErrorCategory::validation,
          "policy parameters must be finite");
  require(std::isfinite(psi1) && std::isfinite(psi2) && std::isfinite(psi3) &&
              std::isfinite(psi4),
          ErrorCategory::validation, "value parameters must be finite");
  require(mu_hat_minus_r.size() > 0, ErrorCategory::validation,
          "estimated excess returns must be set");
  require(Sigma_inv_hat.rows() == mu_hat_minus_r.size() &&
              Sigma_inv_hat.cols() == mu_hat_minus_r.size(),
          ErrorCategory::validation, "estimated precision matrix has inconsistent dimensions");
  require(Sigma_inv_hat.isApprox(Sigma_inv_hat.transpose(), 1e-8), ErrorCategory::validation,
          "estimated precision matrix must be symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(Sigma_inv_hat);
  require(llt.info() == Eigen::Success, ErrorCategory::validation,
          "estimated precision matrix must be positive definite");
  require(k_inner >= 1, ErrorCategory::validation, "inner iteration count must be positive");
}

AssetLearnerState warm_start_asset(double mu_hat_minus_r, double sigma_hat_sq,
                                   const ExploratoryConfig& problem) {
  problem.validate();
  AssetLearnerState s;
  s.problem = problem;
  const double var = std::max(sigma_hat_sq, kMinVariance);
  const double K_hat = mu_hat_minus_r * mu_hat_minus_r / var;
  s.phi3 = mu_hat_minus_r;
  s.phi4 = 1.0 / var;
  s.phi2 = K_hat;
  s.phi1 = std::exp(K_hat * problem.T) + 2.0 * problem.gamma * problem.w0;
  s.psi1 = s.phi1;
  s.psi2 = s.phi2;
  s.psi3 = s.phi1 * s.phi1 / (4.0 * problem.gamma);
  // Level slope at t = 0: twice the policy entropy minus the dimension, so
  // the level drains exactly as fast as the entropy reward accrues.
  s.psi4 = std::log(kPi * problem.lambda / (problem.gamma * var)) + K_hat * problem.T;
  return s;
}

JointLearnerState warm_start_joint(const Eigen::VectorXd& mu_hat_minus_r,
                                   const Eigen::MatrixXd& Sigma_inv_hat,
                                   const ExploratoryConfig& problem) {
  problem.validate();
  JointLearnerState s;
  s.problem = problem;
  s.mu_hat_minus_r = mu_hat_minus_r;
  s.Sigma_inv_hat = Sigma_inv_hat;
  s.validate();

  const double n = static_cast<double>(mu_hat_minus_r.size());
  const double K_hat = mu_hat_minus_r.dot(Sigma_inv_hat * mu_hat_minus_r);
  s.phi2 = K_hat;
  s.phi1 = std::exp(K_hat * problem.T) + 2.0 * problem.gamma * problem.w0;
  s.psi1 = s.phi1;
  s.psi2 = s.phi2;
  s.psi3 = s.phi1 * s.phi1 / (4.0 * problem.gamma);
  Eigen::LLT<Eigen::MatrixXd> llt(Sigma_inv_hat);
  double log_det_inv = 0.0;
  for (Eigen::Index i = 0; i < Sigma_inv_hat.rows(); ++i)
    log_det_inv += 2.0 * std::log(llt.matrixL()(i, i));
  // Level slope at t = 0 (twice the policy entropy minus the dimension).
  s.psi4 = n * std::log(kPi * problem.lambda / problem.gamma) + log_det_inv +
           n * K_hat * problem.T;
  return s;
}

TDStep td_loss_1d(const AssetLearnerState& state, double t, double W_t,
                  const std::vector<double>& samples, double dt, Rng& rng) {
  state.validate();
  require(!samples.empty(), ErrorCategory::validation, "need at least one return sample");
  require(dt > 0.0, ErrorCategory::validation, "time step must be positive");

  const double gamma = state.problem.gamma;
  const double lambda = state.problem.lambda;
  const double T = state.problem.T;
  const double ttg = std::max(T - t, 0.0);
  const double mean = (state.phi1 / (2.0 * gamma) - W_t) * state.phi4 * state.phi3;
  const double var = policy_variance_1d(state, ttg);
  require(var > 0.0, ErrorCategory::numeric, "policy variance must be positive");
  const double sd = std::sqrt(var);
  const double entropy = 0.5 * std::log(2.0 * kPi * std::exp(1.0) * var);

  TDStep out;
  out.next_wealth.reserve(samples.size());
  for (const double ret : samples) {
    const double theta = mean + sd * rng.normal();
    out.next_wealth.push_back(W_t + ret * theta);
  }
  const Psi psi{state.psi1, state.psi2, state.psi3, state.psi4};
  const DeltaEval ev = eval_delta(psi, psi, gamma, lambda, T, t, dt, W_t, out.next_wealth, entropy,
                                  expected_dev_sq_next_1d(state, W_t, mean, var, dt));
  out.delta = ev.delta;
  out.loss = 0.5 * dt * ev.delta * ev.delta;
  return out;
}

AssetLearnerState update_asset_learner(const AssetLearnerState& state, double t, double W_t,
                                       const std::vector<double>& samples, double dt, Rng& rng,
                                       std::optional<double> sigma_sq_override) {
  state.validate();
  require(!samples.empty(), ErrorCategory::validation, "need at least one return sample");
  require(dt > 0.0, ErrorCategory::validation, "time step must be positive");

  const double gamma = state.problem.gamma;
  const double lambda = state.problem.lambda;
  const double T = state.problem.T;
  const double ttg = std::max(T - t, 0.0);

  const double mean = (state.phi1 / (2.0 * gamma) - W_t) * state.phi4 * state.phi3;
  const double var = policy_variance_1d(state, ttg);
  require(var > 0.0, ErrorCategory::numeric, "policy variance must be positive");
  const double sd = std::sqrt(var);
  const double entropy = 0.5 * std::log(2.0 * kPi * std::exp(1.0) * var);

  std::vector<double> next_wealth;
  next_wealth.reserve(samples.size());
  double mean_return = 0.0;
  double mean_sq_return = 0.0;
  for (const double ret : samples) {
    const double theta = mean + sd * rng.normal();
    next_wealth.push_back(W_t + ret * theta);
    mean_return += ret;
    mean_sq_return += ret * ret;
  }
  const double M = static_cast<double>(samples.size());
  mean_return /= M;
  mean_sq_return /= M;

  AssetLearnerState out = state;

  // Critic: pin the level slope to the current entropy rate, then descend the
  // TD loss in (psi2, psi3); psi1 is grounded separately by the
  // terminal-wealth recursion.
  Psi psi{state.psi1, state.psi2, state.psi3, state.psi4};
  psi.p4 = 2.0 * entropy - 1.0;
  const Psi psi_bar = psi;
  if (!critic_descend(psi, psi_bar, gamma, lambda, T, t, dt, W_t, next_wealth, entropy,
                      expected_dev_sq_next_1d(state, W_t, mean, var, dt), state.eta_psi2,
                      state.eta_psi3, state.k_inner)) {
    ++out.rejected_updates;
    return out;
  }
  out.psi2 = psi.p2;
  out.psi3 = psi.p3;
  out.psi4 = psi.p4;

  // Actor: copy the learned terminal/decay parameters, refresh the inverse
  // variance, and damp phi3 toward the residual-stationary vertex
  // R_bar / (dt sigma^2 phi4) (the batch-mean excess return annualized when
  // phi4 = 1/sigma^2).
  out.phi1 = out.psi1;
  out.phi2 = out.psi2;
  const double sigma_sq =
      std::max(sigma_sq_override ? *sigma_sq_override
                                 : (mean_sq_return - mean_return * mean_return) / dt,
               kMinVariance);
  const double phi4_new = 1.0 / sigma_sq;
  const double vertex = mean_return / (dt * sigma_sq * phi4_new);
  const double phi3_new = out.phi3 + out.eta_phi3 * (vertex - out.phi3);
  if (!std::isfinite(phi4_new) || !std::isfinite(phi3_new)) {
    ++out.rejected_updates;
    out.psi2 = state.psi2;
    out.psi3 = state.psi3;
    out.psi4 = state.psi4;
    return out;
  }
  out.phi4 = phi4_new;
  out.phi3 = phi3_new;
  return out;
}

JointLearnerState update_joint_learner(const JointLearnerState& state, double t, double W_t,
                                       const std::vector<Eigen::VectorXd>& samples, double dt,
                                       Rng& rng) {
  state.validate();
  require(!samples.empty(), ErrorCategory::validation, "need at least one return sample");
  require(dt > 0.0, ErrorCategory::validation, "time step must be positive");
  const Eigen::Index n = state.mu_hat_minus_r.size();
  for (const auto& s : samples)
    require(s.size() == n, ErrorCategory::validation,
            "return sample dimension does not match the estimated market");

  const double gamma = state.problem.gamma;
  const double lambda = state.problem.lambda;
  const double T = state.problem.T;
  const double ttg = std::max(T - t, 0.0);

  const double cdev = state.phi1 / (2.0 * gamma) - W_t;
  const Eigen::VectorXd dir = state.Sigma_inv_hat * state.mu_hat_minus_r;
  const Eigen::VectorXd mean = cdev * dir;
  const double cov_scale = 0.5 * lambda * std::exp(state.phi2 * ttg) / gamma;
  const Eigen::MatrixXd cov = cov_scale * state.Sigma_inv_hat;
  const double entropy = gaussian_entropy(cov);
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  require(llt.info() == Eigen::Success, ErrorCategory::numeric,
          "policy covariance must be positive definite");
  const Eigen::MatrixXd chol = llt.matrixL();

  std::vector<double> next_wealth;
  next_wealth.reserve(samples.size());
  for (const auto& ret : samples) {
    const Eigen::VectorXd theta = mean + chol * rng.normal_vector(n);
    next_wealth.push_back(W_t + ret.dot(theta));
  }

  // Analytic E[(W_{t+dt} - psi1/2gamma)^2] under the entry policy, with the
  // return moments taken from the learner's own estimates. Uses
  // Sigma_hat * mean = cdev * mu_hat (no inverse needed); see eval_delta for
  // why the psi2 gradient factor must be state-measurable.
  const double dev0 = W_t - state.psi1 / (2.0 * gamma);
  const double quad_mu = state.mu_hat_minus_r.dot(dir);
  const double m_mu = cdev * quad_mu;
  const double exp_dev_sq = dev0 * dev0 + 2.0 * dev0 * dt * m_mu + cdev * m_mu * dt +
                            dt * dt * m_mu * m_mu +
                            cov_scale * (static_cast<double>(n) * dt + dt * dt * quad_mu);

  JointLearnerState out = state;
  Psi psi{state.psi1, state.psi2, state.psi3, state.psi4};
  psi.p4 = 2.0 * entropy - static_cast<double>(n);
  const Psi psi_bar = psi;
  if (!critic_descend(psi, psi_bar, gamma, lambda, T, t, dt, W_t, next_wealth, entropy,
                      exp_dev_sq, state.eta_psi2, state.eta_psi3, state.k_inner)) {
    ++out.rejected_updates;
    return out;
  }
  out.psi2 = psi.p2;
  out.psi3 = psi.p3;
  out.psi4 = psi.p4;
  out.phi1 = out.psi1;
  out.phi2 = out.psi2;
  return out;
}

void ground_phi1(AssetLearnerState& state) {
  const double decay = std::exp(-state.phi2 * state.problem.T);
  state.phi1 = 1.0 + state.phi1 * (1.0 - decay) +
               2.0 * state.problem.gamma * state.problem.w0 * decay;
  state.psi1 = state.phi1;
}

void ground_phi1(JointLearnerState& state) {
  const double decay = std::exp(-state.phi2 * state.problem.T);
  state.phi1 = 1.0 + state.phi1 * (1.0 - decay) +
               2.0 * state.problem.gamma * state.problem.w0 * decay;
  state.psi1 = state.phi1;
}

namespace {
double k_readout_impl(double phi1, double gamma, double w0, double T) {
  const double arg = phi1 - 2.0 * gamma * w0;
  if (!(arg > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return std::log(arg) / T;
}
}  // namespace

double k_readout(const AssetLearnerState& state) {
  return k_readout_impl(state.phi1, state.problem.gamma, state.problem.w0, state.problem.T);
}

double k_readout(const JointLearnerState& state) {
  return k_readout_impl(state.phi1, state.problem.gamma, state.problem.w0, state.problem.T);
}

void EpisodeExperimentConfig::validate() const {
  problem.validate();
  require(episodes >= 0, ErrorCategory::validation, "episode count must be non-negative");
  require(month_steps >= 1, ErrorCategory::validation, "month length must be positive");
  require(eta0_phi3 >= 0.0 && eta0_psi2 >= 0.0 && eta0_psi_level >= 0.0,
          ErrorCategory::validation, "step sizes must be non-negative");
  require(eta_half_phi3 > 0.0 && eta_half_psi2 > 0.0, ErrorCategory::validation,
          "step-size half-lives must be positive");
  require(k_inner >= 1, ErrorCategory::validation, "inner iteration count must be positive");
  require(kappa_max > 1.0, ErrorCategory::validation, "condition-number cap must exceed 1");
}

LearningCurves run_learning_episodes(const PricePanel& train, const EpisodeExperimentConfig& cfg,
                                     const Eigen::VectorXd& true_mu_minus_r, double true_K) {
  cfg.validate();
  const int n = train.assets();
  const int R = train.steps();
  require(n >= 1, ErrorCategory::validation, "training panel has no assets");
  require(R >= cfg.month_steps, ErrorCategory::validation,
          "training panel is shorter than one episode");
  require(true_mu_minus_r.size() == n, ErrorCategory::validation,
          "ground-truth excess returns do not match the panel");
  require(true_mu_minus_r.cwiseAbs().minCoeff() > 0.0 && std::abs(true_K) > 0.0,
          ErrorCategory::validation, "relative errors need nonzero ground truth");
  const double dt = train.dt();
  require(std::abs(cfg.problem.T - cfg.month_steps * dt) < 1e-9, ErrorCategory::validation,
          "episode horizon must equal month_steps panel steps");

  // MLE warm start over the full training panel.
  const MLEMoments mle = mle_moments(EstimationWindow{train.returns, dt});
  const Eigen::MatrixXd Sigma_inv_hat = shrink_inverse_covariance(mle.sample_cov, cfg.kappa_max);
  Eigen::MatrixXd rho_hat(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      rho_hat(i, j) = mle.sample_cov(i, j) /
                      std::max(mle.sigma_hat(i) * mle.sigma_hat(j), kMinVariance);

  LearningCurves out;
  out.assets.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    AssetLearnerState s = warm_start_asset(mle.mu_hat_minus_r(i),
                                           std::max(mle.sample_cov(i, i), kMinVariance),
                                           cfg.problem);
    s.k_inner = cfg.k_inner;
    out.assets.push_back(std::move(s));
  }
  out.joint = warm_start_joint(mle.mu_hat_minus_r, Sigma_inv_hat, cfg.problem);
  out.joint.k_inner = cfg.k_inner;

  const int E = cfg.episodes;
  out.episode.resize(static_cast<std::size_t>(E) + 1);
  out.mu_error.resize(E + 1, n);
  out.k_error.resize(static_cast<std::size_t>(E) + 1);
  out.k_combo_error.resize(static_cast<std::size_t>(E) + 1);

  const auto record = [&](int e) {
    out.episode[static_cast<std::size_t>(e)] = e;
    for (int i = 0; i < n; ++i)
      out.mu_error(e, i) = std::abs(out.assets[static_cast<std::size_t>(i)].phi3 -
                                    true_mu_minus_r(i)) /
                           std::abs(true_mu_minus_r(i));
    const double k_joint = k_readout(out.joint);
    out.k_error[static_cast<std::size_t>(e)] = std::abs(k_joint - true_K) / std::abs(true_K);

    Eigen::VectorXd per_asset_K(n);
    bool combo_ok = true;
    for (int i = 0; i < n; ++i) {
      per_asset_K(i) = k_readout(out.assets[static_cast<std::size_t>(i)]);
      if (!std::isfinite(per_asset_K(i)) || per_asset_K(i) < 0.0) combo_ok = false;
    }
    double combo = std::numeric_limits<double>::quiet_NaN();
    if (combo_ok) combo = combine_K(per_asset_K, rho_hat);
    out.k_combo_error[static_cast<std::size_t>(e)] = std::abs(combo - true_K) / std::abs(true_K);
  };
  record(0);

  Rng rng(cfg.seed);
  const int L = cfg.month_steps;
  std::vector<double> asset_samples(static_cast<std::size_t>(L));
  std::vector<Eigen::VectorXd> joint_samples(static_cast<std::size_t>(L));

  for (int e = 1; e <= E; ++e) {
    // Harmonically decayed step sizes (Robbins-Monro style).
    const double decay_phi3 = 1.0 / (1.0 + static_cast<double>(e) / cfg.eta_half_phi3);
    const double decay_psi2 = 1.0 / (1.0 + static_cast<double>(e) / cfg.eta_half_psi2);
    for (int i = 0; i < n; ++i) {
      auto& s = out.assets[static_cast<std::size_t>(i)];
      s.eta_phi3 = cfg.eta0_phi3 * decay_phi3;
      s.eta_psi2 = cfg.eta0_psi2 * decay_psi2;
      s.eta_psi3 = cfg.eta0_psi_level * dt;
    }
    out.joint.eta_psi2 = cfg.eta0_psi2 * decay_psi2;
    out.joint.eta_psi3 = cfg.eta0_psi_level * dt;

    // A uniformly random consecutive one-month subsequence; its returns form
    // the branch batch at every step of the episode.
    const int start = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(R - L + 1)));
    for (int j = 0; j < L; ++j)
      joint_samples[static_cast<std::size_t>(j)] = train.returns.row(start + j).transpose();

    std::vector<double> asset_wealth(static_cast<std::size_t>(n), cfg.problem.w0);
    double joint_wealth = cfg.problem.w0;

    for (int j = 0; j < L; ++j) {
      const double t = j * dt;
      for (int i = 0; i < n; ++i) {
        auto& s = out.assets[static_cast<std::size_t>(i)];
        for (int k = 0; k < L; ++k)
          asset_samples[static_cast<std::size_t>(k)] = train.returns(start + k, i);
        const double W = asset_wealth[static_cast<std::size_t>(i)];
        s = update_asset_learner(s, t, W, asset_samples, dt, rng,
                                 std::max(mle.sample_cov(i, i), kMinVariance));
        const double theta =
            (s.phi1 / (2.0 * cfg.problem.gamma) - W) * s.phi4 * s.phi3;
        asset_wealth[static_cast<std::size_t>(i)] = W + train.returns(start + j, i) * theta;
      }
      out.joint = update_joint_learner(out.joint, t, joint_wealth, joint_samples, dt, rng);
      const Eigen::VectorXd theta =
          (out.joint.phi1 / (2.0 * cfg.problem.gamma) - joint_wealth) *
          (out.joint.Sigma_inv_hat * out.joint.mu_hat_minus_r);
      joint_wealth += train.returns.row(start + j).dot(theta);
    }

    for (int i = 0; i < n; ++i) ground_phi1(out.assets[static_cast<std::size_t>(i)]);
    ground_phi1(out.joint);
    record(e);
  }
  return out;
}

void OnlineConfig::validate() const {
  require(std::isfinite(T) && T > 0.0, ErrorCategory::validation, "horizon must be positive");
  require(N >= 1, ErrorCategory::validation, "steps per horizon must be positive");
  require(m >= 1 && m <= N, ErrorCategory::validation,
          "learning cycle must lie between 1 and N steps");
  require(M >= 1, ErrorCategory::validation, "samples per update must be positive");
  require(leverage_cap > 0.0, ErrorCategory::validation, "leverage cap must be positive");
  require(tc >= 0.0, ErrorCategory::validation, "transaction cost must be non-negative");
  require(warmup_steps >= 2, ErrorCategory::validation,
          "warm-up span must cover at least two steps");
  require(window_steps >= 0, ErrorCategory::validation,
          "estimation window must be non-negative");
  require(kappa_max > 1.0, ErrorCategory::validation, "condition-number cap must exceed 1");
  require(k_inner >= 1, ErrorCategory::validation, "inner iteration count must be positive");
}

OnlineRun run_online_sac(const PricePanel& panel, const OnlineConfig& cfg,
                         const ExploratoryConfig& ex) {
  cfg.validate();
  ex.validate();
  require(std::abs(ex.T - cfg.T) < 1e-12, ErrorCategory::validation,
          "online and exploratory horizons must agree");
  const int n = panel.assets();
  const int total = panel.steps();
  const double dt = panel.dt();
  require(std::abs(cfg.N * dt - cfg.T) < 1e-9, ErrorCategory::validation,
          "N panel steps must span one horizon");
  const int window = cfg.window_steps > 0 ? cfg.window_steps : cfg.warmup_steps;
  require(window >= 2 && window <= cfg.warmup_steps, ErrorCategory::validation,
          "estimation window must fit inside the warm-up span");
  require(cfg.M <= window, ErrorCategory::validation,
          "samples per update cannot exceed the estimation window");
  require(total >= cfg.warmup_steps + cfg.N, ErrorCategory::validation,
          "panel must cover at least one horizon past the warm-up span");

  Rng rng(cfg.seed);
  double W = ex.w0;
  double month_w0 = W;

  const auto window_moments = [&](int end_step) {
    return mle_moments(
        EstimationWindow{panel.returns.middleRows(end_step - window, window), dt});
  };

  MLEMoments mle = window_moments(cfg.warmup_steps);
  Eigen::MatrixXd Sigma_inv = shrink_inverse_covariance(mle.sample_cov, cfg.kappa_max);

  ExploratoryConfig problem = ex;
  std::vector<AssetLearnerState> assets;
  assets.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    AssetLearnerState s = warm_start_asset(mle.mu_hat_minus_r(i),
                                           std::max(mle.sample_cov(i, i), kMinVariance), problem);
    s.k_inner = cfg.k_inner;
    s.eta_psi2 = cfg.eta_psi2;
    s.eta_psi3 = cfg.eta_psi3 * dt;
    s.eta_phi3 = cfg.eta_phi3;
    assets.push_back(std::move(s));
  }
  JointLearnerState joint = warm_start_joint(mle.mu_hat_minus_r, Sigma_inv, problem);
  joint.k_inner = cfg.k_inner;
  joint.eta_psi2 = cfg.eta_psi2;
  joint.eta_psi3 = cfg.eta_psi3 * dt;

  OnlineRun out;
  out.wealth.push_back(W);
  Eigen::VectorXd theta_prev = Eigen::VectorXd::Zero(n);
  std::vector<double> asset_samples(static_cast<std::size_t>(cfg.M));
  std::vector<Eigen::VectorXd> joint_samples(static_cast<std::size_t>(cfg.M));

  for (int step = cfg.warmup_steps; step < total; ++step) {
    const int local = step - cfg.warmup_steps;
    const int j_in_month = local % cfg.N;
    if (j_in_month == 0 && local > 0) {
      // Roll the horizon: the episode restarts at the current wealth, so the
      // terminal-wealth anchor phi1 = e^{KT} + 2 gamma w0 shifts with w0.
      const double shift = 2.0 * ex.gamma * (W - month_w0);
      joint.phi1 += shift;
      joint.psi1 = joint.phi1;
      joint.problem.w0 = W;
      for (auto& s : assets) {
        s.phi1 += shift;
        s.psi1 = s.phi1;
        s.problem.w0 = W;
      }
      month_w0 = W;
    }
    const double t_in = j_in_month * dt;

    if (local % cfg.m == 0) {
      mle = window_moments(step);
      Sigma_inv = shrink_inverse_covariance(mle.sample_cov, cfg.kappa_max);
      for (int k = 0; k < cfg.M; ++k)
        joint_samples[static_cast<std::size_t>(k)] =
            panel.returns.row(step - cfg.M + k).transpose();
      for (int i = 0; i < n; ++i) {
        for (int k = 0; k < cfg.M; ++k)
          asset_samples[static_cast<std::size_t>(k)] = panel.returns(step - cfg.M + k, i);
        assets[static_cast<std::size_t>(i)] = update_asset_learner(
            assets[static_cast<std::size_t>(i)], t_in, W, asset_samples, dt, rng,
            std::max(mle.sample_cov(i, i), kMinVariance));
      }
      Eigen::VectorXd mu_hat(n);
      for (int i = 0; i < n; ++i) mu_hat(i) = assets[static_cast<std::size_t>(i)].phi3;
      joint.mu_hat_minus_r = mu_hat;
      joint.Sigma_inv_hat = Sigma_inv;
      joint = update_joint_learner(joint, t_in, W, joint_samples, dt, rng);
      for (auto& s : assets) ground_phi1(s);
      ground_phi1(joint);
    }

    // Implement the mean of the learned policy, clipped to the gross-exposure
    // cap by proportional scaling.
    Eigen::VectorXd theta =
        (joint.phi1 / (2.0 * ex.gamma) - W) * (joint.Sigma_inv_hat * joint.mu_hat_minus_r);
    const double gross = theta.lpNorm<1>();
    if (gross > cfg.leverage_cap * W) theta *= cfg.leverage_cap * W / gross;

    const double turnover = (theta - theta_prev).lpNorm<1>();
    out.times.push_back(panel.times(step));
    out.allocations.push_back(theta);
    out.turnover.push_back(turnover);
    out.phi1_trace.push_back(joint.phi1);
    out.k_trace.push_back(k_readout(joint));

    W += panel.returns.row(step).dot(theta) - cfg.tc * turnover;
    out.wealth.push_back(W);
    theta_prev = theta;
    if (!(W > 0.0)) {
      out.ruined = true;
      break;
    }
  }

  out.rejected_updates = joint.rejected_updates;
  for (const auto& s : assets) out.rejected_updates += s.rejected_updates;
  return out;
}

}  // namespace mvrl
