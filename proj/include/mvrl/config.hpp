#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>

#include "mvrl/market.hpp"

namespace mvrl {

// Minimal INI-style configuration: "[section]" headers, "key = value" pairs,
// '#' or ';' starting a comment, later duplicate keys overriding earlier
// ones. Parse errors carry file and line context.
struct ConfigFile {
  std::map<std::string, std::map<std::string, std::string>> sections;

  static ConfigFile parse_file(const std::string& path);
  static ConfigFile parse_text(const std::string& text, const std::string& context);

  bool has(const std::string& section, const std::string& key) const;
  std::string get_string(const std::string& section, const std::string& key) const;
  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key) const;
  double get_double(const std::string& section, const std::string& key, double fallback) const;
  int get_int(const std::string& section, const std::string& key, int fallback) const;
  std::uint64_t get_u64(const std::string& section, const std::string& key,
                        std::uint64_t fallback) const;
  // Comma/semicolon-separated list of doubles.
  Eigen::VectorXd get_list(const std::string& section, const std::string& key) const;
};

// Validated run configuration spanning the three workflows. The market block
// either parameterizes a stationary simulated market or points at a price CSV
// (`data`); the learner block carries the algorithm constants; the experiment
// block sizes the run and addresses its outputs.
struct RunConfig {
  // [market]
  int n = 2;
  double r = 0.02;
  Eigen::VectorXd mu;     // annualized total drifts
  Eigen::VectorXd sigma;  // annualized volatilities
  Eigen::MatrixXd rho;    // correlation; a scalar entry fills all off-diagonals
  std::string data;       // optional CSV path used by the backtest workflow

  // [learner]
  double lambda = 1.0;
  double gamma = 1.5;
  int M = 21;  // branch samples per update
  int m = 5;   // steps between online learning cycles
  double eta_phi3 = 2e-4;
  double eta_half_phi3 = 400.0;
  double eta_psi2 = 2e-3;
  double eta_half_psi2 = 400.0;
  double eta_psi_level = 0.05;
  int k_inner = 10;
  double kappa_max = 100.0;
  double tc = 0.003;
  double leverage_cap = 2.0;
  std::uint64_t seed = 1;

  // [experiment]
  int episodes = 3000;
  int months = 2500;       // simulated panel length in months
  int month_steps = 21;    // trading days per month
  int steps_per_year = 252;
  int train_months = 144;  // backtest train/test split
  double w0 = 1.0;
  std::string out = "out";

  double dt() const { return 1.0 / steps_per_year; }
  double horizon_T() const { return static_cast<double>(month_steps) / steps_per_year; }

  // Stationary market from the [market] block; requires mu/sigma/rho.
  MarketModel market_model() const;

  static RunConfig load(const std::string& path);
  static RunConfig from(const ConfigFile& file);
  void validate() const;
};

}  // namespace mvrl
