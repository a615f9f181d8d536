#include "mvrl/policy.hpp"

#include <cmath>
#include <numbers>

#include "mvrl/common.hpp"

namespace mvrl {

GaussianPolicy::GaussianPolicy(TimeGrid grid, std::vector<PolicySegment> segments)
    : grid_(std::move(grid)), segments_(std::move(segments)) {
  require(static_cast<int>(segments_.size()) == grid_.segments(), ErrorCategory::validation,
          "policy needs one segment record per grid segment");
  validate();
}

GaussianPolicy GaussianPolicy::constant(double a0, Eigen::VectorXd a1, double a2,
                                        Eigen::MatrixXd A3, double t_begin, double t_end) {
  PolicySegment seg;
  seg.a0 = ExpSum::constant(a0);
  seg.a1 = std::move(a1);
  seg.a2_level = a2;
  seg.a2_slope = 0.0;
  seg.A3 = std::move(A3);
  return GaussianPolicy(TimeGrid::single(t_begin, t_end), {std::move(seg)});
}

void GaussianPolicy::validate() const {
  require(!segments_.empty(), ErrorCategory::validation, "policy has no segments");
  const Eigen::Index n = segments_.front().a1.size();
  require(n >= 1, ErrorCategory::validation, "policy needs at least one asset");
  for (const PolicySegment& s : segments_) {
    require(s.a1.size() == n && s.A3.rows() == n && s.A3.cols() == n, ErrorCategory::validation,
            "policy segment dimension mismatch");
    require(s.A3.isApprox(s.A3.transpose(), 1e-10), ErrorCategory::validation,
            "policy shape matrix must be symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(s.A3);
    require(llt.info() == Eigen::Success, ErrorCategory::validation,
            "policy shape matrix must be positive definite");
  }
}

int GaussianPolicy::clamped_segment(double t) const {
  if (t <= grid_.begin()) return 0;
  if (t >= grid_.end()) return grid_.segments() - 1;
  return grid_.segment_of(t);
}

double GaussianPolicy::backward_h(double t, int k) const {
  const double h = grid_.knot(k + 1) - t;
  const double len = grid_.length(k);
  return h < 0.0 ? 0.0 : (h > len ? len : h);
}

double GaussianPolicy::a0_at(double t) const {
  const int k = clamped_segment(t);
  return segments_[static_cast<std::size_t>(k)].a0.value(backward_h(t, k));
}

const Eigen::VectorXd& GaussianPolicy::a1_at(double t) const {
  return segments_[static_cast<std::size_t>(clamped_segment(t))].a1;
}

double GaussianPolicy::a2_at(double t) const {
  const int k = clamped_segment(t);
  const PolicySegment& s = segments_[static_cast<std::size_t>(k)];
  return s.a2_level + s.a2_slope * backward_h(t, k);
}

const Eigen::MatrixXd& GaussianPolicy::A3_at(double t) const {
  return segments_[static_cast<std::size_t>(clamped_segment(t))].A3;
}

double GaussianPolicy::entropy(double t) const {
  const int k = clamped_segment(t);
  const PolicySegment& s = segments_[static_cast<std::size_t>(k)];
  const Eigen::Index n = s.a1.size();
  Eigen::LLT<Eigen::MatrixXd> llt(s.A3);
  require(llt.info() == Eigen::Success, ErrorCategory::validation,
          "policy shape matrix must be positive definite");
  double log_det_A3 = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) log_det_A3 += 2.0 * std::log(llt.matrixL()(i, i));
  // h = n/2 ln(2 pi e) + 1/2 ln|e^{a2} A3|
  return 0.5 * n * std::log(2.0 * std::numbers::pi * std::numbers::e) +
         0.5 * (n * a2_at(t) + log_det_A3);
}

Eigen::VectorXd GaussianPolicy::sample(double t, double w, Rng& rng) const {
  const int k = clamped_segment(t);
  const PolicySegment& s = segments_[static_cast<std::size_t>(k)];
  const Eigen::MatrixXd chol = Eigen::LLT<Eigen::MatrixXd>(s.A3).matrixL();
  const double scale = std::exp(0.5 * a2_at(t));
  return mean(t, w) + scale * (chol * rng.normal_vector(s.a1.size()));
}

}  // namespace mvrl
