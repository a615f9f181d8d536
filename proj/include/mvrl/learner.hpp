#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "mvrl/exploratory.hpp"
#include "mvrl/market.hpp"
#include "mvrl/rng.hpp"

namespace mvrl {

// One-dimensional actor-critic state for a single risky asset.
//
// Policy (phi):  N((phi1/(2 gamma) - w) phi4 phi3,  (lambda/2)(e^{phi2 (T-t)}/gamma) phi4)
// Value (psi):   v(t,w) = -gamma e^{-psi2 (T-t)} (w - psi1/(2 gamma))^2
//                         + psi3 + (lambda/2) psi4 (T-t)
//
// phi1 tracks e^{K(0,T) T} + 2 gamma w0, phi2 tracks K(t,T), phi3 tracks mu - r,
// phi4 tracks 1/sigma^2. psi3 is the terminal value level and is descended as
// the residual absorber; psi4, the level's time slope, is pinned analytically
// to twice the policy entropy minus the dimension at every update (the rate
// at which the true level drains), which centres the entry residual at zero
// when the remaining parameters fit the data. psi1 is pinned to phi1 by the
// terminal-wealth recursion (see ground_phi1) rather than fitted by TD.
struct AssetLearnerState {
  double phi1 = 0.0, phi2 = 0.0, phi3 = 0.0, phi4 = 1.0;
  double psi1 = 0.0, psi2 = 0.0, psi3 = 0.0, psi4 = 0.0;

  double eta_psi2 = 0.01, eta_psi3 = 0.05;
  double eta_phi3 = 0.01;
  int k_inner = 10;

  ExploratoryConfig problem;  // lambda, gamma, current-episode w0, horizon T

  std::size_t rejected_updates = 0;  // incident count of non-finite gradient steps

  void validate() const;
};

// Multi-asset actor-critic state for the average-profitability learner.
// Policy: N((phi1/(2 gamma) - w) Sigma_inv_hat (mu_hat - r),
//           (lambda/2)(e^{phi2 (T-t)}/gamma) Sigma_inv_hat); value as above.
struct JointLearnerState {
  double phi1 = 0.0, phi2 = 0.0;
  double psi1 = 0.0, psi2 = 0.0, psi3 = 0.0, psi4 = 0.0;
  Eigen::VectorXd mu_hat_minus_r;
  Eigen::MatrixXd Sigma_inv_hat;

  double eta_psi2 = 0.01, eta_psi3 = 0.05;
  int k_inner = 10;

  ExploratoryConfig problem;

  std::size_t rejected_updates = 0;

  void validate() const;
};

// Warm starts from maximum-likelihood moments: phi3 = mu_hat - r,
// phi4 = 1/sigma_hat^2, phi2 = K_hat, phi1 = psi1 = e^{K_hat T} + 2 gamma w0.
AssetLearnerState warm_start_asset(double mu_hat_minus_r, double sigma_hat_sq,
                                   const ExploratoryConfig& problem);
JointLearnerState warm_start_joint(const Eigen::VectorXd& mu_hat_minus_r,
                                   const Eigen::MatrixXd& Sigma_inv_hat,
                                   const ExploratoryConfig& problem);

struct TDStep {
  double loss = 0.0;
  double delta = 0.0;
  std::vector<double> next_wealth;  // one simulated branch per sample
};

// Temporal-difference loss at (t, W_t): draws one allocation per sample return,
// simulates W_{t+dt} = W_t + R theta, and returns L = (dt/2) delta^2 with
// delta the sample-average Bellman residual plus lambda times policy entropy.
TDStep td_loss_1d(const AssetLearnerState& state, double t, double W_t,
                  const std::vector<double>& samples, double dt, Rng& rng);

// One Algorithm-1 update: k_inner backtracked gradient-descent steps on the
// psi parameters (psi1 pinned), then phi1 <- psi1, phi2 <- psi2,
// phi4 <- 1/sigma_hat^2 (MLE from the samples unless overridden), and a damped
// step of phi3 toward the residual-maximizing vertex. Non-finite gradients
// reject the step and leave the parameters unchanged (counted in
// rejected_updates).
AssetLearnerState update_asset_learner(const AssetLearnerState& state, double t, double W_t,
                                       const std::vector<double>& samples, double dt, Rng& rng,
                                       std::optional<double> sigma_sq_override = std::nullopt);

// One Algorithm-2 update: same critic step on the joint TD loss, then
// phi1 <- psi1, phi2 <- psi2. mu_hat_minus_r and Sigma_inv_hat are inputs held
// in the state.
JointLearnerState update_joint_learner(const JointLearnerState& state, double t, double W_t,
                                       const std::vector<Eigen::VectorXd>& samples, double dt,
                                       Rng& rng);

// Terminal-wealth grounding of phi1/psi1 (applied once per episode or learning
// cycle): phi1 <- 1 + phi1 (1 - e^{-phi2 T}) + 2 gamma w0 e^{-phi2 T}, whose
// fixed point is e^{phi2 T} + 2 gamma w0.
void ground_phi1(AssetLearnerState& state);
void ground_phi1(JointLearnerState& state);

// K(0,T) read-out (1/T) ln(phi1 - 2 gamma w0); NaN when phi1 <= 2 gamma w0
// (diagnostic only -- learning continues).
double k_readout(const AssetLearnerState& state);
double k_readout(const JointLearnerState& state);

// Episode-based learning experiment: per episode, a uniformly random
// consecutive one-month subsequence of the training panel is sampled, the
// month's returns serve as the branch batch at every step, wealth restarts at
// w0, and step sizes decay harmonically across episodes.
struct EpisodeExperimentConfig {
  int episodes = 3000;
  int month_steps = 21;
  double eta0_phi3 = 2e-4;
  double eta_half_phi3 = 400.0;
  double eta0_psi2 = 2e-3;
  double eta_half_psi2 = 400.0;
  double eta0_psi_level = 0.05;  // psi3 absorber step scale (not decayed as hard)
  int k_inner = 10;
  double kappa_max = 100.0;
  std::uint64_t seed = 1;
  ExploratoryConfig problem{1.0, 1.5, 1.0, 21.0 / 252.0};

  void validate() const;
};

struct LearningCurves {
  // Row e holds the state after e episodes; row 0 is the MLE warm start.
  std::vector<int> episode;
  Eigen::MatrixXd mu_error;            // relative error of phi3 per asset
  std::vector<double> k_error;         // relative error of the joint learner's K
  std::vector<double> k_combo_error;   // relative error of the per-asset combination
  std::vector<AssetLearnerState> assets;
  JointLearnerState joint;
};

LearningCurves run_learning_episodes(const PricePanel& train, const EpisodeExperimentConfig& cfg,
                                     const Eigen::VectorXd& true_mu_minus_r, double true_K);

// Online SAC loop over a train+test panel: MLE warm start on the trailing
// window at the end of the warm-up span, then per test step -- every m steps a
// learning cycle (Algorithm 1 per asset, covariance refresh, Algorithm 2) --
// and at every step the mean allocation of the learned policy, gross exposure
// capped by proportional scaling, proportional transaction costs, wealth
// advanced with the observed returns. Horizons roll monthly: w0 rebases to the
// current wealth and phi1 is shifted accordingly.
struct OnlineConfig {
  double T = 21.0 / 252.0;  // horizon of one investment episode
  int N = 21;               // rebalancing steps per horizon
  int m = 5;                // learning cycle in steps
  int M = 21;               // samples per update
  double leverage_cap = 2.0;
  double tc = 0.003;
  int warmup_steps = 144 * 21;
  int window_steps = 0;  // trailing estimation window; 0 means warmup_steps
  double kappa_max = 100.0;
  std::uint64_t seed = 1;
  int k_inner = 10;
  double eta_psi2 = 0.01, eta_psi3 = 0.05;
  double eta_phi3 = 0.01;

  void validate() const;
};

struct OnlineRun {
  std::vector<double> times;                 // one per executed step
  std::vector<double> wealth;                // wealth[0] = w0, then one per step
  std::vector<Eigen::VectorXd> allocations;  // implemented allocation per step
  std::vector<double> turnover;              // sum |delta theta| per step
  std::vector<double> phi1_trace;            // joint phi1 per step
  std::vector<double> k_trace;               // joint K read-out per step
  bool ruined = false;
  std::size_t rejected_updates = 0;
};

OnlineRun run_online_sac(const PricePanel& panel, const OnlineConfig& cfg,
                         const ExploratoryConfig& ex);

}  // namespace mvrl
