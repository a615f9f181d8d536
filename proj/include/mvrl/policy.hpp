#pragma once

#include <Eigen/Dense>

#include "mvrl/expsum.hpp"
#include "mvrl/grid.hpp"
#include "mvrl/rng.hpp"

namespace mvrl {

// One segment of a feedback Gaussian policy. Within the segment, curves are
// parameterized in backward time h = right_knot - t: the intercept a0 is an
// exponential-polynomial mixture, a2 is affine (a2(t) = a2_level + a2_slope*h),
// and the exposure direction a1 / shape matrix A3 are constant. This family
// is exactly closed under the evaluate/improve operators.
struct PolicySegment {
  ExpSum a0;
  Eigen::VectorXd a1;
  double a2_level = 0.0;
  double a2_slope = 0.0;
  Eigen::MatrixXd A3;
};

// Exploratory portfolio selection: action ~ N((a0(t) - w) * a1(t), e^{a2(t)} * A3(t)).
class GaussianPolicy {
 public:
  GaussianPolicy() = default;
  GaussianPolicy(TimeGrid grid, std::vector<PolicySegment> segments);

  // Time-invariant parameters over [t_begin, t_end].
  static GaussianPolicy constant(double a0, Eigen::VectorXd a1, double a2, Eigen::MatrixXd A3,
                                 double t_begin, double t_end);

  const TimeGrid& grid() const { return grid_; }
  int segments() const { return static_cast<int>(segments_.size()); }
  const PolicySegment& segment(int k) const { return segments_[static_cast<std::size_t>(k)]; }
  int assets() const { return static_cast<int>(segments_.front().a1.size()); }

  void validate() const;

  // Curve values at time t; outside the grid span the boundary values extend
  // constantly (matching the market-curve convention).
  double a0_at(double t) const;
  const Eigen::VectorXd& a1_at(double t) const;
  double a2_at(double t) const;
  const Eigen::MatrixXd& A3_at(double t) const;

  Eigen::VectorXd mean(double t, double w) const { return (a0_at(t) - w) * a1_at(t); }
  Eigen::MatrixXd covariance(double t) const { return std::exp(a2_at(t)) * A3_at(t); }
  double entropy(double t) const;
  Eigen::VectorXd sample(double t, double w, Rng& rng) const;

 private:
  int clamped_segment(double t) const;
  double backward_h(double t, int k) const;

  TimeGrid grid_;
  std::vector<PolicySegment> segments_;
};

}  // namespace mvrl
