#include "mvrl/market.hpp"

#include <cmath>
#include <cstdio>

#include "mvrl/common.hpp"
#include "mvrl/csv.hpp"
#include "mvrl/rng.hpp"

namespace mvrl {

namespace {

// Days since 1970-01-01 for a proleptic Gregorian date (civil-days algorithm).
long days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const long era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                       static_cast<unsigned>(d) - 1u;
  const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
  return era * 146097 + static_cast<long>(doe) - 719468;
}

// Date cell: decimal year-fraction, or ISO yyyy-mm-dd mapped at 365.25 d/y.
double parse_time_cell(const std::string& cell, const std::string& context) {
  int y = 0, m = 0, d = 0;
  char tail = '\0';
  if (std::sscanf(cell.c_str(), "%d-%d-%d%c", &y, &m, &d, &tail) == 3) {
    require(m >= 1 && m <= 12 && d >= 1 && d <= 31, ErrorCategory::validation,
            context + ": invalid calendar date '" + cell + "'");
    return static_cast<double>(days_from_civil(y, m, d)) / 365.25;
  }
  return csv::parse_double(cell, context);
}

}  // namespace

MarketModel MarketModel::stationary(double r, Eigen::VectorXd mu, Eigen::VectorXd sigma,
                                    Eigen::MatrixXd rho, double horizon) {
  MarketModel model;
  model.r = r;
  model.grid = TimeGrid::single(0.0, horizon);
  model.mu = {std::move(mu)};
  model.sigma = {std::move(sigma)};
  model.rho = std::move(rho);
  model.validate();
  return model;
}

namespace {

// Diagnostic for a failed correlation factorization, naming the eigenvalue
// that breaks positive definiteness.
std::string non_pd_message(const Eigen::MatrixXd& rho) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(rho);
  return "correlation matrix is not positive definite (smallest eigenvalue " +
         format_double(es.eigenvalues().minCoeff()) + ")";
}

}  // namespace

void PricePanel::recompute_returns() {
  const int n = assets();
  returns.resize(prices.rows() - 1, n);
  for (int j = 0; j + 1 < prices.rows(); ++j)
    for (int i = 0; i < n; ++i) returns(j, i) = prices(j + 1, i) / prices(j, i) - 1.0;
}

void MarketModel::validate() const {
  const int n = assets();
  require(n >= 1, ErrorCategory::validation, "market needs at least one asset");
  require(grid.segments() >= 1, ErrorCategory::validation, "market grid is empty");
  require(static_cast<int>(mu.size()) == grid.segments() &&
              static_cast<int>(sigma.size()) == grid.segments(),
          ErrorCategory::validation, "market curves must have one value per grid segment");
  for (int k = 0; k < grid.segments(); ++k) {
    const auto& m = mu[static_cast<std::size_t>(k)];
    const auto& s = sigma[static_cast<std::size_t>(k)];
    require(m.size() == n && s.size() == n, ErrorCategory::validation,
            "market curve dimension mismatch");
    require((s.array() > 0.0).all(), ErrorCategory::validation,
            "volatilities must be strictly positive");
  }
  require(rho.rows() == n && rho.cols() == n, ErrorCategory::validation,
          "correlation matrix dimension mismatch");
  require(rho.isApprox(rho.transpose(), 1e-12), ErrorCategory::validation,
          "correlation matrix must be symmetric");
  for (int i = 0; i < n; ++i)
    require(std::abs(rho(i, i) - 1.0) < 1e-12, ErrorCategory::validation,
            "correlation matrix must have a unit diagonal");
  require((rho.array().abs() <= 1.0 + 1e-12).all(), ErrorCategory::validation,
          "correlation entries must lie in [-1, 1]");
  Eigen::LLT<Eigen::MatrixXd> llt(rho);
  require(llt.info() == Eigen::Success, ErrorCategory::validation, non_pd_message(rho));
}

int MarketModel::segment_at(double t) const {
  if (t <= grid.begin()) return 0;
  if (t >= grid.end()) return grid.segments() - 1;
  return grid.segment_of(t);
}

Eigen::VectorXd MarketModel::excess_at(double t) const {
  return mu_at(t).array() - r;
}

TimeGrid MarketModel::effective_grid(double a, double b) const {
  require(b > a, ErrorCategory::validation, "empty market span");
  std::vector<double> knots{a};
  for (double t : grid.knots())
    if (t > a + 1e-12 && t < b - 1e-12) knots.push_back(t);
  knots.push_back(b);
  return TimeGrid(std::move(knots));
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> covariance_from(const Eigen::VectorXd& sigma,
                                                            const Eigen::MatrixXd& rho) {
  const int n = static_cast<int>(sigma.size());
  require(rho.rows() == n && rho.cols() == n, ErrorCategory::validation,
          "sigma/rho dimension mismatch");
  require((sigma.array() > 0.0).all(), ErrorCategory::validation,
          "volatilities must be strictly positive");
  Eigen::LLT<Eigen::MatrixXd> rho_llt(rho);
  require(rho_llt.info() == Eigen::Success, ErrorCategory::validation, non_pd_message(rho));
  const Eigen::MatrixXd Sigma = sigma.asDiagonal() * rho * sigma.asDiagonal();
  Eigen::LLT<Eigen::MatrixXd> llt(Sigma);
  require(llt.info() == Eigen::Success, ErrorCategory::validation,
          "covariance must be positive definite");
  Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(n, n));
  inv = ((inv + inv.transpose()) / 2.0).eval();  // enforce exact symmetry
  return {Sigma, inv};
}

std::vector<PricePanel> simulate_paths(const MarketModel& model, double horizon, int steps,
                                       int n_paths, std::uint64_t seed) {
  model.validate();
  require(horizon > 0.0, ErrorCategory::validation, "horizon must be positive");
  require(steps >= 1, ErrorCategory::validation, "need at least one step");
  require(n_paths >= 1, ErrorCategory::validation, "need at least one path");

  const int n = model.assets();
  const double dt = horizon / steps;
  const double sqrt_dt = std::sqrt(dt);
  const Eigen::MatrixXd chol = Eigen::LLT<Eigen::MatrixXd>(model.rho).matrixL();

  std::vector<PricePanel> panels;
  panels.reserve(static_cast<std::size_t>(n_paths));
  for (int p = 0; p < n_paths; ++p) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(p)));
    PricePanel panel;
    panel.times = Eigen::VectorXd::LinSpaced(steps + 1, 0.0, horizon);
    panel.prices.resize(steps + 1, n);
    panel.prices.row(0).setOnes();
    for (int j = 0; j < steps; ++j) {
      const double t = j * dt;
      const Eigen::VectorXd excess = model.excess_at(t);
      const Eigen::VectorXd& vol = model.sigma_at(t);
      const Eigen::VectorXd shock = chol * rng.normal_vector(n);
      for (int i = 0; i < n; ++i) {
        const double dlog =
            (excess(i) - 0.5 * vol(i) * vol(i)) * dt + vol(i) * sqrt_dt * shock(i);
        panel.prices(j + 1, i) = panel.prices(j, i) * std::exp(dlog);
      }
    }
    panel.recompute_returns();
    panels.push_back(std::move(panel));
  }
  return panels;
}

PricePanel read_prices(const std::string& csv_path) {
  const csv::Table table = csv::read_table(csv_path);
  require(table.header.size() >= 2, ErrorCategory::validation,
          csv_path + ": need a date column and at least one asset column");
  require(table.header[0] == "date", ErrorCategory::validation,
          csv_path + ": first column must be 'date'");
  const int n = static_cast<int>(table.header.size()) - 1;
  const int rows = static_cast<int>(table.rows.size());
  require(rows >= 2, ErrorCategory::validation, csv_path + ": need at least two price rows");

  PricePanel panel;
  panel.times.resize(rows);
  panel.prices.resize(rows, n);
  for (int j = 0; j < rows; ++j) {
    const std::string context = csv_path + ":row " + std::to_string(j + 2);
    panel.times(j) = parse_time_cell(table.rows[static_cast<std::size_t>(j)][0], context);
    if (j > 0)
      require(panel.times(j) > panel.times(j - 1), ErrorCategory::validation,
              context + ": times must be strictly increasing");
    for (int i = 0; i < n; ++i) {
      const double price =
          csv::parse_double(table.rows[static_cast<std::size_t>(j)][static_cast<std::size_t>(i) + 1],
                            context + ", column " + table.header[static_cast<std::size_t>(i) + 1]);
      require(price > 0.0, ErrorCategory::validation, context + ": prices must be positive");
      panel.prices(j, i) = price;
    }
  }

  // Approximately uniform sampling is required by the estimators downstream.
  const double dt = (panel.times(rows - 1) - panel.times(0)) / (rows - 1);
  for (int j = 1; j < rows; ++j) {
    const double step = panel.times(j) - panel.times(j - 1);
    require(std::abs(step - dt) <= 1e-6 * std::max(1.0, std::abs(dt)) + 1e-9,
            ErrorCategory::validation,
            csv_path + ":row " + std::to_string(j + 2) + ": non-uniform sampling interval");
  }

  panel.recompute_returns();
  return panel;
}

void write_prices(const PricePanel& panel, const std::string& csv_path) {
  std::vector<std::string> lines;
  lines.reserve(static_cast<std::size_t>(panel.prices.rows()) + 1);
  std::string header = "date";
  for (int i = 0; i < panel.assets(); ++i) header += ",asset_" + std::to_string(i + 1);
  lines.push_back(header);
  for (int j = 0; j < panel.prices.rows(); ++j) {
    std::string line = format_double(panel.times(j));
    for (int i = 0; i < panel.assets(); ++i) line += "," + format_double(panel.prices(j, i));
    lines.push_back(std::move(line));
  }
  csv::write_lines(csv_path, lines);
}

}  // namespace mvrl
