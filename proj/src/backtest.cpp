#include "mvrl/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mvrl/common.hpp"
#include "mvrl/csv.hpp"
#include "mvrl/estimation.hpp"

namespace mvrl {
namespace {

constexpr double kMinVariance = 1e-12;

// Shared per-step accounting: charge the trade, book the P&L.
struct Ledger {
  StrategyRun run;
  Eigen::VectorXd drifted;  // previous positions after the last market move
  double W = 0.0;
  double tc = 0.0;

  Ledger(std::string name, int n, double w0, double tc_in, double t0)
      : W(w0), tc(tc_in) {
    run.name = std::move(name);
    run.times.push_back(t0);
    run.wealth.push_back(w0);
    drifted = Eigen::VectorXd::Zero(n);
  }

  // Trades to `target`, applies the step's returns, and records the step.
  void step(const Eigen::VectorXd& target, const Eigen::VectorXd& returns, double next_time) {
    const double turnover = (target - drifted).lpNorm<1>();
    run.allocations.push_back(target);
    run.turnover.push_back(turnover);
    W += target.dot(returns) - tc * turnover;
    run.times.push_back(next_time);
    run.wealth.push_back(W);
    drifted = target.array() * (1.0 + returns.array());
  }
};

}  // namespace

void StrategyRun::validate() const {
  require(!wealth.empty() && wealth.size() == times.size(), ErrorCategory::validation,
          "wealth and time series must align");
  require(turnover.size() + 1 == wealth.size() && allocations.size() == turnover.size(),
          ErrorCategory::validation, "per-step series must be one shorter than the wealth series");
  for (double w : wealth)
    require(std::isfinite(w), ErrorCategory::numeric, "wealth series contains non-finite values");
}

PricePanel ingest_prices(const std::string& csv_path, double r) {
  require(std::isfinite(r), ErrorCategory::validation, "discount rate must be finite");
  PricePanel panel = read_prices(csv_path);
  const double t0 = panel.times(0);
  for (int j = 0; j < panel.prices.rows(); ++j)
    panel.prices.row(j) *= std::exp(-r * (panel.times(j) - t0));
  panel.recompute_returns();
  return panel;
}

PricePanel slice_panel(const PricePanel& panel, int first_step, int steps) {
  require(first_step >= 0 && steps >= 1 && first_step + steps <= panel.steps(),
          ErrorCategory::validation, "panel slice out of range");
  PricePanel out;
  out.times = panel.times.segment(first_step, steps + 1);
  out.prices = panel.prices.middleRows(first_step, steps + 1);
  out.recompute_returns();
  return out;
}

void WindowConfig::validate() const {
  require(window_steps >= 2, ErrorCategory::validation,
          "estimation window must cover at least two steps");
  require(start_step >= window_steps, ErrorCategory::validation,
          "first traded step must leave room for the estimation window");
  require(rebalance_every >= 1, ErrorCategory::validation,
          "re-estimation cadence must be positive");
  require(horizon_steps >= 1, ErrorCategory::validation, "horizon must cover at least one step");
  require(std::isfinite(T) && T > 0.0, ErrorCategory::validation, "horizon must be positive");
  require(leverage_cap > 0.0, ErrorCategory::validation, "leverage cap must be positive");
  require(tc >= 0.0, ErrorCategory::validation, "transaction cost must be non-negative");
  require(kappa_max > 1.0, ErrorCategory::validation, "condition-number cap must exceed 1");
}

StrategyRun run_plugin(const PricePanel& panel, const WindowConfig& cfg,
                       const ExploratoryConfig& problem) {
  cfg.validate();
  problem.validate();
  const int n = panel.assets();
  const int total = panel.steps();
  const double dt = panel.dt();
  require(total > cfg.start_step, ErrorCategory::validation,
          "panel ends before the first traded step");

  Ledger ledger("Plug-in", n, problem.w0, cfg.tc, panel.times(cfg.start_step));
  double month_w0 = problem.w0;
  Eigen::VectorXd mu_hat = Eigen::VectorXd::Zero(n);
  Eigen::MatrixXd Sigma_inv = Eigen::MatrixXd::Identity(n, n);

  for (int step = cfg.start_step; step < total; ++step) {
    const int local = step - cfg.start_step;
    if (local % cfg.horizon_steps == 0) month_w0 = ledger.W;
    if (local % cfg.rebalance_every == 0) {
      const MLEMoments mle = mle_moments(
          EstimationWindow{panel.returns.middleRows(step - cfg.window_steps, cfg.window_steps),
                           dt});
      mu_hat = mle.mu_hat_minus_r;
      Sigma_inv = shrink_inverse_covariance(mle.sample_cov, cfg.kappa_max);
    }
    const double K_hat = std::max(mu_hat.dot(Sigma_inv * mu_hat), 0.0);
    const double tau = std::exp(K_hat * cfg.T) + 2.0 * problem.gamma * month_w0;

    Eigen::VectorXd theta =
        (tau / (2.0 * problem.gamma) - ledger.W) * (Sigma_inv * mu_hat);
    const double gross = theta.lpNorm<1>();
    if (gross > cfg.leverage_cap * ledger.W) theta *= cfg.leverage_cap * ledger.W / gross;

    ledger.step(theta, panel.returns.row(step).transpose(), panel.times(step + 1));
    if (!(ledger.W > 0.0)) break;
  }
  return std::move(ledger.run);
}

StrategyRun run_buy_hold(const PricePanel& panel, const ExploratoryConfig& problem, double tc) {
  problem.validate();
  require(tc >= 0.0, ErrorCategory::validation, "transaction cost must be non-negative");
  const int n = panel.assets();
  Ledger ledger("B-H", n, problem.w0, tc, panel.times(0));
  for (int step = 0; step < panel.steps(); ++step) {
    const Eigen::VectorXd target = Eigen::VectorXd::Constant(n, ledger.W / n);
    ledger.step(target, panel.returns.row(step).transpose(), panel.times(step + 1));
    if (!(ledger.W > 0.0)) break;
  }
  return std::move(ledger.run);
}

StrategyRun run_index(const PricePanel& panel, const ExploratoryConfig& problem, double tc) {
  problem.validate();
  require(tc >= 0.0, ErrorCategory::validation, "transaction cost must be non-negative");
  const int n = panel.assets();
  Ledger ledger("Index", n, problem.w0, tc, panel.times(0));
  for (int step = 0; step < panel.steps(); ++step) {
    const Eigen::VectorXd target =
        step == 0 ? Eigen::VectorXd::Constant(n, ledger.W / n) : ledger.drifted;
    ledger.step(target, panel.returns.row(step).transpose(), panel.times(step + 1));
    if (!(ledger.W > 0.0)) break;
  }
  return std::move(ledger.run);
}

StrategyRun to_strategy_run(const OnlineRun& run, const PricePanel& panel,
                            const OnlineConfig& cfg, const ExploratoryConfig& problem,
                            std::string name) {
  require(!run.wealth.empty() && run.wealth.front() == problem.w0, ErrorCategory::validation,
          "online run does not start at the problem's initial wealth");
  StrategyRun out;
  out.name = std::move(name);
  out.wealth = run.wealth;
  out.allocations = run.allocations;
  out.turnover = run.turnover;
  out.times.reserve(run.wealth.size());
  out.times.push_back(panel.times(cfg.warmup_steps));
  for (std::size_t k = 0; k < run.turnover.size(); ++k)
    out.times.push_back(panel.times(cfg.warmup_steps + static_cast<int>(k) + 1));
  out.validate();
  return out;
}

MetricsRow compute_metrics(const StrategyRun& run, double gamma, double tc, double r,
                           int month_steps, bool ceq_half_gamma) {
  run.validate();
  require(gamma > 0.0, ErrorCategory::validation, "risk aversion must be positive");
  require(tc >= 0.0, ErrorCategory::validation, "transaction cost must be non-negative");
  require(month_steps >= 1, ErrorCategory::validation, "month length must be positive");
  const int S = run.steps();
  const int months = S / month_steps;
  require(months >= 2, ErrorCategory::validation,
          "need at least two complete months to aggregate returns");
  for (int k = 0; k <= months * month_steps; ++k)
    require(run.wealth[static_cast<std::size_t>(k)] > 0.0, ErrorCategory::numeric,
            "wealth must stay positive to compute return rates");

  // Daily returns with and without the cost drag; identical when tc = 0.
  std::vector<double> gross_monthly(static_cast<std::size_t>(months));
  std::vector<double> net_monthly(static_cast<std::size_t>(months));
  for (int k = 0; k < months; ++k) {
    double g = 1.0, v = 1.0;
    for (int t = k * month_steps; t < (k + 1) * month_steps; ++t) {
      const auto u = static_cast<std::size_t>(t);
      const double dW = run.wealth[u + 1] - run.wealth[u];
      g *= 1.0 + (dW + tc * run.turnover[u]) / run.wealth[u];
      v *= 1.0 + dW / run.wealth[u];
    }
    gross_monthly[static_cast<std::size_t>(k)] = g - 1.0;
    net_monthly[static_cast<std::size_t>(k)] = v - 1.0;
  }

  const auto mean_std = [](const std::vector<double>& x) {
    const double m = static_cast<double>(x.size());
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= m;
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    return std::pair<double, double>{mean, std::sqrt(ss / (m - 1.0))};
  };
  const double gamma_eff = ceq_half_gamma ? 0.5 * gamma : gamma;
  const auto ceq_of = [&](double mean, double sd) { return 12.0 * (mean - gamma_eff * sd * sd); };
  const auto sr_of = [&](double mean, double sd) {
    if (sd == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return std::sqrt(12.0) * (mean - r / 12.0) / sd;
  };

  MetricsRow row;
  row.name = run.name;
  const auto [gm, gs] = mean_std(gross_monthly);
  const auto [nm, ns] = mean_std(net_monthly);
  row.mean_monthly = gm;
  row.std_monthly = gs;
  row.ceq = ceq_of(gm, gs);
  row.sr = sr_of(gm, gs);
  row.ceq_tr = ceq_of(nm, ns);
  row.sr_tr = sr_of(nm, ns);

  double tr = 0.0;
  for (int t = 1; t < S; ++t)
    tr += run.turnover[static_cast<std::size_t>(t)] / run.wealth[static_cast<std::size_t>(t)];
  row.tr = S > 1 ? tr / (S - 1) : 0.0;
  return row;
}

void write_report(const BacktestReport& report, const std::string& csv_path) {
  std::vector<std::string> lines;
  lines.reserve(report.rows.size() + 1);
  lines.emplace_back("strategy,mean_monthly,std_monthly,ceq,sr,tr,ceq_tr,sr_tr");
  for (const auto& row : report.rows)
    lines.push_back(row.name + "," + format_double(row.mean_monthly) + "," +
                    format_double(row.std_monthly) + "," + format_double(row.ceq) + "," +
                    format_double(row.sr) + "," + format_double(row.tr) + "," +
                    format_double(row.ceq_tr) + "," + format_double(row.sr_tr));
  csv::write_lines(csv_path, lines);
}

void write_wealth_paths(const std::vector<StrategyRun>& runs, const std::string& csv_path) {
  require(!runs.empty(), ErrorCategory::validation, "no strategy runs to write");
  std::size_t longest = 0, longest_at = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    runs[i].validate();
    if (runs[i].times.size() > longest) {
      longest = runs[i].times.size();
      longest_at = i;
    }
  }
  std::string header = "date";
  for (const auto& run : runs) header += "," + run.name;
  std::vector<std::string> lines;
  lines.reserve(longest + 1);
  lines.push_back(header);
  for (std::size_t k = 0; k < longest; ++k) {
    std::string line = format_double(runs[longest_at].times[k]);
    for (const auto& run : runs)
      line += "," + (k < run.wealth.size() ? format_double(run.wealth[k]) : std::string());
    lines.push_back(std::move(line));
  }
  csv::write_lines(csv_path, lines);
}

}  // namespace mvrl
