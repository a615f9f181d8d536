#include "mvrl/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "mvrl/common.hpp"

namespace mvrl {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double_cell(const std::string& cell, const std::string& context) {
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  require(!cell.empty() && end != cell.c_str() && *end == '\0', ErrorCategory::config,
          context + ": not a number: '" + cell + "'");
  return v;
}

}  // namespace

ConfigFile ConfigFile::parse_text(const std::string& text, const std::string& context) {
  ConfigFile file;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto comment = line.find_first_of("#;");
    if (comment != std::string::npos) line.erase(comment);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = context + ":" + std::to_string(line_no);
    if (line.front() == '[') {
      require(line.back() == ']' && line.size() > 2, ErrorCategory::config,
              where + ": malformed section header '" + line + "'");
      section = trim(line.substr(1, line.size() - 2));
      require(!section.empty(), ErrorCategory::config, where + ": empty section name");
      file.sections[section];  // register even if empty
      continue;
    }
    const auto eq = line.find('=');
    require(eq != std::string::npos, ErrorCategory::config,
            where + ": expected 'key = value', got '" + line + "'");
    require(!section.empty(), ErrorCategory::config,
            where + ": key outside of any [section]");
    const std::string key = trim(line.substr(0, eq));
    require(!key.empty(), ErrorCategory::config, where + ": empty key");
    file.sections[section][key] = trim(line.substr(eq + 1));
  }
  return file;
}

ConfigFile ConfigFile::parse_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCategory::io, "cannot open config '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_text(buf.str(), path);
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
  const auto s = sections.find(section);
  return s != sections.end() && s->second.count(key) > 0;
}

std::string ConfigFile::get_string(const std::string& section, const std::string& key) const {
  require(has(section, key), ErrorCategory::config,
          "missing config key [" + section + "] " + key);
  return sections.at(section).at(key);
}

std::string ConfigFile::get_string(const std::string& section, const std::string& key,
                                   const std::string& fallback) const {
  return has(section, key) ? sections.at(section).at(key) : fallback;
}

double ConfigFile::get_double(const std::string& section, const std::string& key) const {
  return parse_double_cell(get_string(section, key), "[" + section + "] " + key);
}

double ConfigFile::get_double(const std::string& section, const std::string& key,
                              double fallback) const {
  return has(section, key) ? get_double(section, key) : fallback;
}

int ConfigFile::get_int(const std::string& section, const std::string& key, int fallback) const {
  if (!has(section, key)) return fallback;
  const double v = get_double(section, key);
  require(v == std::floor(v) && std::abs(v) < 2147483647.0, ErrorCategory::config,
          "[" + section + "] " + key + ": expected an integer");
  return static_cast<int>(v);
}

std::uint64_t ConfigFile::get_u64(const std::string& section, const std::string& key,
                                  std::uint64_t fallback) const {
  if (!has(section, key)) return fallback;
  const std::string cell = get_string(section, key);
  char* end = nullptr;
  const unsigned long long v = std::strtoull(cell.c_str(), &end, 10);
  // strtoull wraps negative inputs around instead of failing, so reject the
  // sign explicitly.
  require(!cell.empty() && cell.find('-') == std::string::npos && end != cell.c_str() &&
              *end == '\0',
          ErrorCategory::config,
          "[" + section + "] " + key + ": expected a non-negative integer, got '" + cell + "'");
  return static_cast<std::uint64_t>(v);
}

Eigen::VectorXd ConfigFile::get_list(const std::string& section, const std::string& key) const {
  const std::string cell = get_string(section, key);
  std::vector<double> values;
  std::string item;
  std::stringstream ss(cell);
  while (std::getline(ss, item, ',')) {
    std::stringstream inner(item);
    std::string sub;
    while (std::getline(inner, sub, ';')) {
      sub = trim(sub);
      if (sub.empty()) continue;
      values.push_back(parse_double_cell(sub, "[" + section + "] " + key));
    }
  }
  require(!values.empty(), ErrorCategory::config,
          "[" + section + "] " + key + ": expected a list of numbers");
  Eigen::VectorXd out(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) out(static_cast<Eigen::Index>(i)) = values[i];
  return out;
}

RunConfig RunConfig::from(const ConfigFile& file) {
  RunConfig cfg;
  cfg.data = file.get_string("market", "data", "");
  cfg.r = file.get_double("market", "r", cfg.r);

  const bool has_mu = file.has("market", "mu");
  if (has_mu) {
    cfg.mu = file.get_list("market", "mu");
    cfg.sigma = file.get_list("market", "sigma");
    cfg.n = file.get_int("market", "n", static_cast<int>(cfg.mu.size()));
    require(cfg.mu.size() == cfg.n && cfg.sigma.size() == cfg.n, ErrorCategory::config,
            "[market] mu/sigma must have n entries");
    const Eigen::VectorXd rho_vals =
        file.has("market", "rho") ? file.get_list("market", "rho")
                                  : Eigen::VectorXd::Zero(1);
    if (rho_vals.size() == 1) {
      cfg.rho = Eigen::MatrixXd::Constant(cfg.n, cfg.n, rho_vals(0));
      cfg.rho.diagonal().setOnes();
    } else {
      require(rho_vals.size() == static_cast<Eigen::Index>(cfg.n) * cfg.n, ErrorCategory::config,
              "[market] rho: expected a scalar or an n*n matrix");
      cfg.rho.resize(cfg.n, cfg.n);
      for (int i = 0; i < cfg.n; ++i)
        for (int j = 0; j < cfg.n; ++j) cfg.rho(i, j) = rho_vals(i * cfg.n + j);
    }
  } else {
    require(!cfg.data.empty(), ErrorCategory::config,
            "[market] needs either mu/sigma/rho or a data path");
    cfg.n = file.get_int("market", "n", 0);  // discovered from the data file when 0
    cfg.mu.resize(0);
    cfg.sigma.resize(0);
    cfg.rho.resize(0, 0);
  }

  cfg.lambda = file.get_double("learner", "lambda", cfg.lambda);
  cfg.gamma = file.get_double("learner", "gamma", cfg.gamma);
  cfg.M = file.get_int("learner", "M", cfg.M);
  cfg.m = file.get_int("learner", "m", cfg.m);
  cfg.eta_phi3 = file.get_double("learner", "eta_phi3", cfg.eta_phi3);
  cfg.eta_half_phi3 = file.get_double("learner", "eta_half_phi3", cfg.eta_half_phi3);
  cfg.eta_psi2 = file.get_double("learner", "eta_psi2", cfg.eta_psi2);
  cfg.eta_half_psi2 = file.get_double("learner", "eta_half_psi2", cfg.eta_half_psi2);
  cfg.eta_psi_level = file.get_double("learner", "eta_psi_level", cfg.eta_psi_level);
  cfg.k_inner = file.get_int("learner", "k_inner", cfg.k_inner);
  cfg.kappa_max = file.get_double("learner", "kappa_max", cfg.kappa_max);
  cfg.tc = file.get_double("learner", "tc", cfg.tc);
  cfg.leverage_cap = file.get_double("learner", "leverage_cap", cfg.leverage_cap);
  cfg.seed = file.get_u64("learner", "seed", cfg.seed);

  cfg.episodes = file.get_int("experiment", "episodes", cfg.episodes);
  cfg.months = file.get_int("experiment", "months", cfg.months);
  cfg.month_steps = file.get_int("experiment", "month_steps", cfg.month_steps);
  cfg.steps_per_year = file.get_int("experiment", "steps_per_year", cfg.steps_per_year);
  cfg.train_months = file.get_int("experiment", "train_months", cfg.train_months);
  cfg.w0 = file.get_double("experiment", "w0", cfg.w0);
  cfg.out = file.get_string("experiment", "out", cfg.out);

  cfg.validate();
  return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
  return from(ConfigFile::parse_file(path));
}

void RunConfig::validate() const {
  require(std::isfinite(r), ErrorCategory::config, "[market] r must be finite");
  if (mu.size() > 0) {
    require(n >= 1, ErrorCategory::config, "[market] n must be positive");
    require((sigma.array() > 0.0).all(), ErrorCategory::config,
            "[market] sigma entries must be positive");
    require(rho.rows() == n && rho.cols() == n, ErrorCategory::config,
            "[market] rho must be n x n");
  }
  require(lambda > 0.0, ErrorCategory::config, "[learner] lambda must be positive");
  require(gamma > 0.0, ErrorCategory::config, "[learner] gamma must be positive");
  require(M >= 1, ErrorCategory::config, "[learner] M must be positive");
  require(m >= 1, ErrorCategory::config, "[learner] m must be positive");
  require(eta_phi3 >= 0.0 && eta_psi2 >= 0.0 && eta_psi_level >= 0.0, ErrorCategory::config,
          "[learner] step sizes must be non-negative");
  require(eta_half_phi3 > 0.0 && eta_half_psi2 > 0.0, ErrorCategory::config,
          "[learner] step-size half-lives must be positive");
  require(k_inner >= 1, ErrorCategory::config, "[learner] k_inner must be positive");
  require(kappa_max > 1.0, ErrorCategory::config, "[learner] kappa_max must exceed 1");
  require(tc >= 0.0, ErrorCategory::config, "[learner] tc must be non-negative");
  require(leverage_cap > 0.0, ErrorCategory::config, "[learner] leverage_cap must be positive");
  require(episodes >= 0, ErrorCategory::config, "[experiment] episodes must be non-negative");
  require(months >= 1, ErrorCategory::config, "[experiment] months must be positive");
  require(month_steps >= 1, ErrorCategory::config, "[experiment] month_steps must be positive");
  require(steps_per_year >= month_steps, ErrorCategory::config,
          "[experiment] steps_per_year must cover at least one month");
  require(train_months >= 1, ErrorCategory::config, "[experiment] train_months must be positive");
  require(w0 > 0.0, ErrorCategory::config, "[experiment] w0 must be positive");
  require(!out.empty(), ErrorCategory::config, "[experiment] out must be set");
}

MarketModel RunConfig::market_model() const {
  require(mu.size() > 0, ErrorCategory::config,
          "[market] mu/sigma/rho are required for a simulated market");
  const double horizon = static_cast<double>(months) * month_steps / steps_per_year;
  return MarketModel::stationary(r, mu, sigma, rho, horizon);
}

}  // namespace mvrl
