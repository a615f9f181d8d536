#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "mvrl/backtest.hpp"
#include "mvrl/csv.hpp"
#include "mvrl/market.hpp"

using namespace mvrl;

namespace {

ExploratoryConfig month_problem() { return ExploratoryConfig{1.0, 1.5, 1.0, 21.0 / 252.0}; }

std::string data_path(const std::string& name) {
  return std::string(MVRL_TEST_DATA_DIR) + "/" + name;
}

std::string scratch_file(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "mvrl_backtest_tests";
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

std::string write_scratch(const std::string& name, const std::string& text) {
  const std::string path = scratch_file(name);
  std::ofstream out(path);
  out << text;
  return path;
}

// Hand-built panel from an explicit return matrix (prices are integrated from
// the returns; consumers read panel.returns directly).
PricePanel panel_from_returns(const Eigen::MatrixXd& returns, double dt) {
  PricePanel p;
  const int S = static_cast<int>(returns.rows());
  const int n = static_cast<int>(returns.cols());
  p.times = Eigen::VectorXd::LinSpaced(S + 1, 0.0, S * dt);
  p.prices.resize(S + 1, n);
  p.prices.row(0) = Eigen::RowVectorXd::Constant(n, 100.0);
  for (int k = 0; k < S; ++k)
    p.prices.row(k + 1) = p.prices.row(k).cwiseProduct(
        (Eigen::RowVectorXd::Ones(n) + returns.row(k)));
  p.returns = returns;
  return p;
}

// Wealth curve with one exact-ratio jump per month and flat days otherwise,
// so the compounded monthly returns are bitwise identical across months.
StrategyRun monthly_jump_run(int months, double jump_factor) {
  StrategyRun run;
  run.name = "jump";
  double w = 1.0;
  run.wealth.push_back(w);
  run.times.push_back(0.0);
  for (int m = 0; m < months; ++m) {
    for (int j = 0; j < 21; ++j) {
      if (j == 10) w *= jump_factor;
      run.wealth.push_back(w);
      run.times.push_back((m * 21 + j + 1) / 252.0);
      run.allocations.push_back(Eigen::VectorXd::Zero(1));
      run.turnover.push_back(0.0);
    }
  }
  return run;
}

}  // namespace

TEST_CASE("price ingestion discounts by the riskless rate") {
  SUBCASE("zero rate keeps raw simple returns") {
    const std::string path = write_scratch("two_rows.csv",
                                           "date,asset_1\n2020-01-01,100\n2020-01-02,101\n");
    const PricePanel p = ingest_prices(path, 0.0);
    CHECK(p.assets() == 1);
    CHECK(p.steps() == 1);
    CHECK(p.returns(0, 0) == doctest::Approx(0.01).epsilon(1e-12));
  }
  SUBCASE("a flat price one year out discounts to e^{-r} - 1") {
    const std::string path =
        write_scratch("flat_year.csv", "date,asset_1\n0.0,100\n0.5,100\n1.0,100\n");
    const PricePanel p = ingest_prices(path, 0.02);
    CHECK(p.prices(2, 0) == doctest::Approx(100.0 * std::exp(-0.02)).epsilon(1e-12));
    const double two_step = (1.0 + p.returns(0, 0)) * (1.0 + p.returns(1, 0));
    CHECK(two_step - 1.0 == doctest::Approx(std::exp(-0.02) - 1.0).epsilon(1e-12));
  }
  SUBCASE("duplicate dates are rejected with the row number") {
    const std::string path = write_scratch(
        "dup.csv", "date,asset_1\n2020-01-01,100\n2020-01-02,101\n2020-01-02,102\n");
    CHECK_THROWS_WITH_AS(ingest_prices(path, 0.0), doctest::Contains("row 4"), Error);
  }
}

TEST_CASE("panel slicing preserves rows and recomputes returns") {
  Eigen::MatrixXd rets(6, 2);
  rets << 0.01, 0.02, -0.01, 0.00, 0.02, -0.02, 0.00, 0.01, 0.01, 0.01, -0.02, 0.03;
  const PricePanel p = panel_from_returns(rets, 1.0 / 252.0);
  const PricePanel s = slice_panel(p, 2, 3);
  CHECK(s.steps() == 3);
  CHECK(s.assets() == 2);
  CHECK(s.times(0) == p.times(2));
  CHECK((s.prices - p.prices.middleRows(2, 4)).cwiseAbs().maxCoeff() == 0.0);
  for (int k = 0; k < 3; ++k)
    for (int i = 0; i < 2; ++i)
      CHECK(s.returns(k, i) == doctest::Approx(p.returns(2 + k, i)).epsilon(1e-12));
  CHECK_THROWS_WITH_AS(slice_panel(p, 5, 3), doctest::Contains("slice"), Error);
}

TEST_CASE("bundled fixture reproduces the reference metric rows") {
  // Reference values computed by tests/data/make_fixture.py from the
  // documented ledger and metric formulas (independent implementation).
  const PricePanel panel = ingest_prices(data_path("fixture_prices.csv"), 0.0);
  REQUIRE(panel.assets() == 2);
  REQUIRE(panel.steps() == 168);
  const ExploratoryConfig pb = month_problem();
  const double tc = 0.003;

  SUBCASE("buy-and-hold") {
    const StrategyRun run = run_buy_hold(panel, pb, tc);
    CHECK(run.wealth.back() == doctest::Approx(1.10366702466).epsilon(1e-10));
    const MetricsRow m = compute_metrics(run, 1.5, tc, 0.02);
    CHECK(m.mean_monthly == doctest::Approx(0.014314920315).epsilon(1e-9));
    CHECK(m.std_monthly == doctest::Approx(0.0551798445723).epsilon(1e-9));
    CHECK(m.ceq == doctest::Approx(0.116972369333).epsilon(1e-9));
    CHECK(m.sr == doctest::Approx(0.794036957361).epsilon(1e-9));
    CHECK(m.tr == doctest::Approx(0.00336720069709).epsilon(1e-9));
    CHECK(m.ceq_tr == doctest::Approx(0.110303727185).epsilon(1e-9));
    CHECK(m.sr_tr == doctest::Approx(0.760190917925).epsilon(1e-9));
    CHECK(m.ceq_tr < m.ceq);
    CHECK(m.sr_tr < m.sr);
  }
  SUBCASE("index") {
    const StrategyRun run = run_index(panel, pb, tc);
    CHECK(run.wealth.back() == doctest::Approx(1.10482765075).epsilon(1e-10));
    const MetricsRow m = compute_metrics(run, 1.5, tc, 0.02);
    CHECK(m.mean_monthly == doctest::Approx(0.014244173478).epsilon(1e-9));
    CHECK(m.std_monthly == doctest::Approx(0.0553959969217).epsilon(1e-9));
    CHECK(m.ceq == doctest::Approx(0.115693185187).epsilon(1e-9));
    CHECK(m.sr == doctest::Approx(0.78651462345).epsilon(1e-9));
    CHECK(m.tr == 0.0);
    CHECK(m.ceq_tr == doctest::Approx(0.111577069244).epsilon(1e-9));
    CHECK(m.sr_tr == doctest::Approx(0.766099853735).epsilon(1e-9));
  }
  SUBCASE("the gamma/2 convention halves only the risk penalty") {
    const StrategyRun run = run_index(panel, pb, tc);
    const MetricsRow full = compute_metrics(run, 1.5, tc, 0.02);
    const MetricsRow half = compute_metrics(run, 1.5, tc, 0.02, 21, true);
    CHECK(half.ceq == doctest::Approx(full.ceq + 12.0 * 0.75 * full.std_monthly *
                                                     full.std_monthly)
                          .epsilon(1e-12));
    CHECK(half.sr == full.sr);
  }
}

TEST_CASE("deterministic monthly growth yields zero spread and CEQ = 12g") {
  const StrategyRun run = monthly_jump_run(4, 1.5);
  const MetricsRow m = compute_metrics(run, 1.5, 0.003, 0.0);
  CHECK(m.mean_monthly == 0.5);
  CHECK(m.std_monthly == 0.0);
  CHECK(m.ceq == 6.0);
  CHECK(std::isnan(m.sr));
  CHECK(std::isnan(m.sr_tr));
  CHECK(m.ceq_tr == m.ceq);  // zero turnover: the cost-bearing path coincides
  CHECK(m.tr == 0.0);
}

TEST_CASE("monthly returns averaging the riskless rate have zero Sharpe ratio") {
  const double r = 0.024;
  const double q = r / 12.0;
  StrategyRun run;
  run.name = "even";
  double w = 1.0;
  run.wealth.push_back(w);
  run.times.push_back(0.0);
  const double spread = 0.0009765625;  // 2^-10, exactly representable
  for (int m = 0; m < 4; ++m) {
    const double g = (m % 2 == 0) ? q - spread : q + spread;
    for (int j = 0; j < 21; ++j) {
      if (j == 0) w *= 1.0 + g;
      run.wealth.push_back(w);
      run.times.push_back((m * 21 + j + 1) / 252.0);
      run.allocations.push_back(Eigen::VectorXd::Zero(1));
      run.turnover.push_back(0.0);
    }
  }
  const MetricsRow metrics = compute_metrics(run, 1.5, 0.0, r);
  CHECK(metrics.mean_monthly == doctest::Approx(q).epsilon(1e-12));
  CHECK(std::abs(metrics.sr) < 1e-9);
}

TEST_CASE("higher transaction costs never help terminal wealth") {
  const PricePanel panel = ingest_prices(data_path("fixture_prices.csv"), 0.0);
  const ExploratoryConfig pb = month_problem();
  double last = std::numeric_limits<double>::infinity();
  for (double tc : {0.0, 0.001, 0.003, 0.01}) {
    const StrategyRun run = run_buy_hold(panel, pb, tc);
    CHECK(run.wealth.back() <= last + 1e-15);
    last = run.wealth.back();
  }
}

TEST_CASE("zero transaction cost collapses the cost-adjusted metrics exactly") {
  const PricePanel panel = ingest_prices(data_path("fixture_prices.csv"), 0.0);
  const StrategyRun run = run_buy_hold(panel, month_problem(), 0.0);
  const MetricsRow m = compute_metrics(run, 1.5, 0.0, 0.02);
  CHECK(m.ceq_tr == m.ceq);
  CHECK(m.sr_tr == m.sr);
}

TEST_CASE("single-asset index reproduces the asset's own returns") {
  Eigen::MatrixXd rets(63, 1);
  for (int k = 0; k < 63; ++k) rets(k, 0) = 0.01 * std::sin(0.37 * k) + 0.0004;
  const PricePanel panel = panel_from_returns(rets, 1.0 / 252.0);
  const StrategyRun run = run_index(panel, month_problem(), 0.0);
  REQUIRE(run.steps() == 63);
  for (int k = 0; k < 63; ++k) {
    const double realized = run.wealth[static_cast<std::size_t>(k) + 1] /
                                run.wealth[static_cast<std::size_t>(k)] -
                            1.0;
    CHECK(realized == doctest::Approx(rets(k, 0)).epsilon(1e-12));
    if (k > 0) CHECK(run.turnover[static_cast<std::size_t>(k)] == 0.0);
  }
}

TEST_CASE("buy-and-hold on flat prices never trades after entry") {
  Eigen::MatrixXd rets = Eigen::MatrixXd::Zero(42, 2);
  const PricePanel panel = panel_from_returns(rets, 1.0 / 252.0);
  const StrategyRun run = run_buy_hold(panel, month_problem(), 0.0);
  CHECK(run.turnover.front() == doctest::Approx(1.0).epsilon(1e-12));  // full entry
  for (int k = 1; k < run.steps(); ++k)
    CHECK(run.turnover[static_cast<std::size_t>(k)] == 0.0);
  const MetricsRow m = compute_metrics(run, 1.5, 0.0, 0.0);
  CHECK(m.tr == 0.0);
  CHECK(run.wealth.back() == 1.0);
}

TEST_CASE("plug-in allocation equals the closed form at exact window moments") {
  // A window of alternating +/- returns has exactly the dyadic sample moments,
  // so the rolling MLE is known in closed form and cannot drift.
  const double dt = 1.0 / 252.0;
  const double m_day = 0.000244140625;  // 2^-12
  const double s_day = 0.0078125;       // 2^-7
  const int window = 84, tail = 42;
  Eigen::MatrixXd rets(window + tail, 1);
  for (int k = 0; k < rets.rows(); ++k)
    rets(k, 0) = (k % 2 == 0) ? m_day + s_day : m_day - s_day;
  const PricePanel panel = panel_from_returns(rets, dt);

  WindowConfig cfg;
  cfg.window_steps = window;
  cfg.start_step = window;
  cfg.rebalance_every = 1;
  cfg.horizon_steps = 21;
  cfg.T = 21.0 / 252.0;
  cfg.leverage_cap = 10.0;
  cfg.tc = 0.0;
  cfg.kappa_max = 100.0;
  const ExploratoryConfig pb = month_problem();
  const StrategyRun run = run_plugin(panel, cfg, pb);
  REQUIRE(run.steps() == tail);

  const double mu_hat = m_day / dt;
  const double var_hat = s_day * s_day / dt;
  const double K_hat = mu_hat * mu_hat / var_hat;
  const double tau = std::exp(K_hat * cfg.T) + 2.0 * pb.gamma * pb.w0;
  const double expected0 = (tau / (2.0 * pb.gamma) - pb.w0) * mu_hat / var_hat;
  CHECK(run.allocations.front()(0) == doctest::Approx(expected0).epsilon(1e-10));

  // Later steps keep the same moments (the window slides over the same
  // alternating pattern in pairs); check one mid-stream rebalance again.
  const double W10 = run.wealth[10];
  const double expected10 = (tau / (2.0 * pb.gamma) - W10) * mu_hat / var_hat;
  CHECK(run.allocations[10](0) == doctest::Approx(expected10).epsilon(1e-8));
}

TEST_CASE("plug-in with a symmetric zero-mean window never trades") {
  const double dt = 1.0 / 252.0;
  Eigen::MatrixXd rets(63 + 42, 2);
  for (int k = 0; k < rets.rows(); ++k) {
    rets(k, 0) = (k % 2 == 0) ? 0.01 : -0.01;
    rets(k, 1) = (k % 2 == 0) ? -0.005 : 0.005;
  }
  const PricePanel panel = panel_from_returns(rets, dt);
  WindowConfig cfg;
  cfg.window_steps = 64;  // even count keeps the sample mean exactly zero
  cfg.start_step = 64;
  cfg.rebalance_every = 2;
  cfg.tc = 0.003;
  const ExploratoryConfig pb = month_problem();
  const StrategyRun run = run_plugin(panel, cfg, pb);
  for (double t : run.turnover) CHECK(t == 0.0);
  for (double w : run.wealth) CHECK(w == 1.0);
}

TEST_CASE("report and wealth-path writers emit well-formed csv") {
  const PricePanel panel = ingest_prices(data_path("fixture_prices.csv"), 0.0);
  const ExploratoryConfig pb = month_problem();
  const StrategyRun bh = run_buy_hold(panel, pb, 0.003);
  const StrategyRun ix = run_index(panel, pb, 0.003);

  BacktestReport report;
  report.rows.push_back(compute_metrics(bh, 1.5, 0.003, 0.02));
  report.rows.back().name = "bh";
  report.rows.push_back(compute_metrics(ix, 1.5, 0.003, 0.02));
  report.rows.back().name = "index";

  const std::string report_path = scratch_file("report.csv");
  write_report(report, report_path);
  std::ifstream in(report_path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "strategy,mean_monthly,std_monthly,ceq,sr,tr,ceq_tr,sr_tr");
  int rows = 0;
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) ++rows;
  CHECK(rows == 2);

  const std::string wealth_path = scratch_file("wealth.csv");
  write_wealth_paths({bh, ix}, wealth_path);
  const csv::Table t = csv::read_table(wealth_path);
  CHECK(t.header.size() == 3);
  CHECK(t.rows.size() == bh.wealth.size());
}
