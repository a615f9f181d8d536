#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mvrl/grid.hpp"

namespace mvrl {

// Multi-asset market with piecewise-constant drift/volatility curves and a
// constant instantaneous correlation. Prices are handled in discounted units
// throughout (the riskless account is the numeraire), so the drift that
// matters dynamically is the excess drift mu - r.
struct MarketModel {
  double r = 0.0;
  TimeGrid grid;                       // coefficient segmentation
  std::vector<Eigen::VectorXd> mu;     // per-segment annualized drift
  std::vector<Eigen::VectorXd> sigma;  // per-segment annualized volatility (> 0)
  Eigen::MatrixXd rho;                 // symmetric positive-definite, unit diagonal

  static MarketModel stationary(double r, Eigen::VectorXd mu, Eigen::VectorXd sigma,
                                Eigen::MatrixXd rho, double horizon = 1.0);

  int assets() const { return rho.rows() > 0 ? static_cast<int>(rho.rows()) : 0; }
  void validate() const;

  // Coefficients extend constantly beyond the grid span, so a stationary model
  // built over [0,1] can serve any horizon.
  int segment_at(double t) const;
  const Eigen::VectorXd& mu_at(double t) const { return mu[static_cast<std::size_t>(segment_at(t))]; }
  const Eigen::VectorXd& sigma_at(double t) const { return sigma[static_cast<std::size_t>(segment_at(t))]; }
  Eigen::VectorXd excess_at(double t) const;  // mu(t) - r

  // Segmentation of [a, b] on which all coefficients are constant.
  TimeGrid effective_grid(double a, double b) const;
};

// Covariance assembled from per-asset volatilities and a correlation matrix:
// Sigma = diag(sigma) * rho * diag(sigma). Returns (Sigma, Sigma^{-1}); the
// inverse is computed from a Cholesky factorization and symmetrized.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> covariance_from(const Eigen::VectorXd& sigma,
                                                            const Eigen::MatrixXd& rho);

// Uniformly sampled price history. `prices` holds discounted levels
// (steps+1 rows); `returns` holds one-step simple returns
// prices[j+1]/prices[j] - 1.
struct PricePanel {
  Eigen::VectorXd times;
  Eigen::MatrixXd prices;
  Eigen::MatrixXd returns;

  int assets() const { return static_cast<int>(prices.cols()); }
  int steps() const { return static_cast<int>(prices.rows()) - 1; }
  double dt() const { return (times(times.size() - 1) - times(0)) / steps(); }
  void recompute_returns();
};

// Exact-in-distribution geometric Brownian paths on a uniform grid: log prices
// advance by (mu - r - sigma^2/2) dt + sigma sqrt(dt) * (correlated normal).
// Path p of a given seed is reproducible independently of n_paths.
std::vector<PricePanel> simulate_paths(const MarketModel& model, double horizon, int steps,
                                       int n_paths, std::uint64_t seed);

// CSV exchange format: header "date,asset_1,...,asset_n"; the date column is
// either a decimal year-fraction or an ISO yyyy-mm-dd date (converted at
// 365.25 days per year). Prices must be positive and times strictly increasing
// on an approximately uniform grid. read_prices performs no discounting; the
// backtest-facing ingest operation owns the raw-to-discounted conversion.
PricePanel read_prices(const std::string& csv_path);
void write_prices(const PricePanel& panel, const std::string& csv_path);

}  // namespace mvrl
