#include "mvrl/mv_core.hpp"

#include <cmath>

#include "mvrl/common.hpp"

namespace mvrl {

void PiecewiseScalar::validate() const {
  require(grid.segments() >= 1, ErrorCategory::validation, "curve grid is empty");
  require(static_cast<int>(values.size()) == grid.segments(), ErrorCategory::validation,
          "curve needs one value per grid segment");
}

double PiecewiseScalar::value_at(double t) const {
  if (t <= grid.begin()) return values.front();
  if (t >= grid.end()) return values.back();
  return values[static_cast<std::size_t>(grid.segment_of(t))];
}

double PiecewiseScalar::integral(double a, double b) const {
  require(b >= a, ErrorCategory::validation, "integral bounds out of order");
  double acc = 0.0;
  for (int k = 0; k < grid.segments(); ++k) {
    const double lo = std::max(a, grid.knot(k));
    const double hi = std::min(b, grid.knot(k + 1));
    if (hi > lo) acc += values[static_cast<std::size_t>(k)] * (hi - lo);
  }
  // Constant extension beyond the grid span.
  if (a < grid.begin()) acc += values.front() * (std::min(b, grid.begin()) - a);
  if (b > grid.end()) acc += values.back() * (b - std::max(a, grid.end()));
  return acc;
}

double PiecewiseScalar::average(double a, double b) const {
  require(b > a, ErrorCategory::validation, "average needs a nonempty interval");
  return integral(a, b) / (b - a);
}

double PiecewiseScalar::backward_double_integral(double t, double T) const {
  require(T >= t, ErrorCategory::validation, "integral bounds out of order");
  // int_t^T int_s^T v(r) dr ds, exact for piecewise-constant v: on a segment
  // [lo, hi] with value c and tail integral B = int_hi^T v, the inner integral
  // at s is B + c (hi - s), contributing B (hi - lo) + c (hi - lo)^2 / 2.
  std::vector<double> cut{t, T};
  for (double k : grid.knots())
    if (k > t + 1e-15 && k < T - 1e-15) cut.push_back(k);
  std::sort(cut.begin(), cut.end());
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < cut.size(); ++i) {
    const double lo = cut[i], hi = cut[i + 1];
    const double c = value_at((lo + hi) / 2.0);
    const double tail = integral(hi, T);
    acc += tail * (hi - lo) + 0.5 * c * (hi - lo) * (hi - lo);
  }
  return acc;
}

void MVProblem::validate() const {
  require(gamma > 0.0, ErrorCategory::validation, "risk aversion must be positive");
  require(w0 > 0.0, ErrorCategory::validation, "initial wealth must be positive");
  require(T > 0.0, ErrorCategory::validation, "horizon must be positive");
  model.validate();
}

double profitability_A(const Eigen::VectorXd& mu_minus_r, const Eigen::MatrixXd& Sigma_inv) {
  require(Sigma_inv.rows() == mu_minus_r.size() && Sigma_inv.cols() == mu_minus_r.size(),
          ErrorCategory::validation, "profitability dimension mismatch");
  return mu_minus_r.dot(Sigma_inv * mu_minus_r);
}

Profitability compute_profitability(const MVProblem& problem) {
  problem.validate();
  const MarketModel& m = problem.model;
  Profitability prof;
  prof.T = problem.T;
  prof.A.grid = m.effective_grid(0.0, problem.T);
  prof.A.values.resize(static_cast<std::size_t>(prof.A.grid.segments()));
  for (int k = 0; k < prof.A.grid.segments(); ++k) {
    const double mid = (prof.A.grid.knot(k) + prof.A.grid.knot(k + 1)) / 2.0;
    const Eigen::VectorXd excess = m.excess_at(mid);
    const Eigen::VectorXd& vol = m.sigma_at(mid);
    const Eigen::MatrixXd Sigma = vol.asDiagonal() * m.rho * vol.asDiagonal();
    // Quadratic form by linear solve; no explicit inverse.
    prof.A.values[static_cast<std::size_t>(k)] = excess.dot(Sigma.llt().solve(excess));
  }
  prof.tau = std::exp(prof.A.integral(0.0, problem.T)) + 2.0 * problem.gamma * problem.w0;
  return prof;
}

double average_K(const PiecewiseScalar& A, double t, double T) {
  require(t < T, ErrorCategory::validation, "average profitability needs t < T");
  A.validate();
  return A.average(t, T);
}

double combine_K(const Eigen::VectorXd& per_asset_K, const Eigen::MatrixXd& rho) {
  const Eigen::Index n = per_asset_K.size();
  require(rho.rows() == n && rho.cols() == n, ErrorCategory::validation,
          "combination dimension mismatch");
  require((per_asset_K.array() >= 0.0).all(), ErrorCategory::validation,
          "per-asset profitabilities must be nonnegative");
  const Eigen::VectorXd root = per_asset_K.array().sqrt();
  Eigen::LLT<Eigen::MatrixXd> llt(rho);
  require(llt.info() == Eigen::Success, ErrorCategory::validation,
          "correlation matrix must be positive definite");
  return root.dot(llt.solve(root));
}

Eigen::VectorXd classical_allocation(double w, const MVProblem& problem, const Profitability& prof,
                                     const Eigen::VectorXd& mu_minus_r,
                                     const Eigen::MatrixXd& Sigma_inv) {
  require(Sigma_inv.rows() == mu_minus_r.size() && Sigma_inv.cols() == mu_minus_r.size(),
          ErrorCategory::validation, "allocation dimension mismatch");
  const double gap = prof.tau / (2.0 * problem.gamma) - w;
  return gap * (Sigma_inv * mu_minus_r);
}

}  // namespace mvrl
