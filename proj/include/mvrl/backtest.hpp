#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "mvrl/exploratory.hpp"
#include "mvrl/learner.hpp"
#include "mvrl/market.hpp"

namespace mvrl {

// One strategy's trajectory over an evaluation span. `wealth` is the
// discounted wealth net of transaction costs, with one entry per panel time
// (`times` and `wealth` align); `allocations` holds the discounted currency
// positions chosen at each step and `turnover` the L1 trade volume of that
// step, the entry trade from cash included.
struct StrategyRun {
  std::string name;
  std::vector<double> times;                 // wealth timestamps, steps + 1 entries
  std::vector<double> wealth;                // wealth[0] = initial wealth
  std::vector<Eigen::VectorXd> allocations;  // one per step
  std::vector<double> turnover;              // one per step

  int steps() const { return static_cast<int>(turnover.size()); }
  void validate() const;
};

// Seven-criterion performance row. `sr` and `sr_tr` are NaN when the monthly
// return standard deviation vanishes.
struct MetricsRow {
  std::string name;
  double mean_monthly = 0.0;  // mean monthly return, costs added back
  double std_monthly = 0.0;   // sample standard deviation (n-1) of the same
  double ceq = 0.0;           // annualized certainty-equivalent return
  double sr = 0.0;            // annualized Sharpe ratio
  double tr = 0.0;            // average daily turnover / wealth, entry trade excluded
  double ceq_tr = 0.0;        // certainty equivalent on the cost-bearing path
  double sr_tr = 0.0;         // Sharpe ratio on the cost-bearing path
};

struct BacktestReport {
  std::vector<MetricsRow> rows;
};

// Reads a "date,asset_1,..." price CSV and converts the raw prices to
// discounted levels via e^{-r (t - t_0)}. All structural validation (row
// diagnostics, strictly increasing dates, positive prices, uniform sampling)
// happens in read_prices.
PricePanel ingest_prices(const std::string& csv_path, double r);

// Sub-panel covering `steps` consecutive return intervals starting at
// `first_step` (so rows first_step .. first_step + steps of the price table).
PricePanel slice_panel(const PricePanel& panel, int first_step, int steps);

// Rolling-MLE plug-in strategy: every `rebalance_every` steps the trailing
// `window_steps` returns are re-estimated and the classical target
// tau = e^{K_hat T} + 2 gamma w_month is refreshed; the closed-form allocation
// (tau/(2 gamma) - W) Sigma_inv_hat mu_hat is implemented every step with the
// same leverage cap and cost accounting as the online learner.
struct WindowConfig {
  int window_steps = 144 * 21;  // trailing estimation span
  int start_step = 144 * 21;    // first traded step
  int rebalance_every = 1;      // re-estimation cadence in steps
  int horizon_steps = 21;       // steps per investment horizon
  double T = 21.0 / 252.0;      // horizon in years
  double leverage_cap = 2.0;    // gross exposure bound, multiples of wealth
  double tc = 0.0;              // proportional transaction cost
  double kappa_max = 100.0;     // condition-number cap for the precision matrix

  void validate() const;
};

StrategyRun run_plugin(const PricePanel& panel, const WindowConfig& cfg,
                       const ExploratoryConfig& problem);

// Equal-weight portfolio rebalanced every step: weight 1/n of current wealth
// in each asset.
StrategyRun run_buy_hold(const PricePanel& panel, const ExploratoryConfig& problem,
                         double tc = 0.0);

// Hold-initial portfolio: an equal split bought at entry and never traded
// again, so positions drift with prices. On a single-asset panel this
// reproduces the asset's own return series exactly.
StrategyRun run_index(const PricePanel& panel, const ExploratoryConfig& problem, double tc = 0.0);

// Repackages an online-learner run (which trades the panel rows from
// cfg.warmup_steps onward) in the common strategy-run form.
StrategyRun to_strategy_run(const OnlineRun& run, const PricePanel& panel,
                            const OnlineConfig& cfg, const ExploratoryConfig& problem,
                            std::string name);

// Seven criteria over complete `month_steps`-day months. Daily cost-free
// returns add tc * turnover back to the wealth increments, so CEQ/SR describe
// the strategy before frictions and CEQ_TR/SR_TR the realized cost-bearing
// path. CEQ = 12 (MEAN - gamma STD^2) by default; `ceq_half_gamma` switches
// the risk penalty to gamma/2. SR = sqrt(12) (MEAN - r/12) / STD.
MetricsRow compute_metrics(const StrategyRun& run, double gamma, double tc, double r = 0.0,
                           int month_steps = 21, bool ceq_half_gamma = false);

// CSV writers: one report row per strategy; wealth paths side by side (runs
// of different lengths leave trailing cells empty).
void write_report(const BacktestReport& report, const std::string& csv_path);
void write_wealth_paths(const std::vector<StrategyRun>& runs, const std::string& csv_path);

}  // namespace mvrl
