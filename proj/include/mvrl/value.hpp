#pragma once

#include <vector>

#include "mvrl/common.hpp"
#include "mvrl/expsum.hpp"
#include "mvrl/grid.hpp"

namespace mvrl {

// One segment of a quadratic-in-wealth value function V(t,w) = -I w^2 + H w + G.
// In backward time h = right_knot - t: I(t) = I_end * e^{-q h}, H is a closed
// mixture, and G(t) = G_end + integral over [t, right_knot] of g_integrand.
struct ValueSegment {
  double I_end = 0.0;
  double q = 0.0;
  ExpSum H;
  double G_end = 0.0;
  ExpSum g_integrand;
};

class ValueQuadratic {
 public:
  ValueQuadratic() = default;
  ValueQuadratic(TimeGrid grid, std::vector<ValueSegment> segments, double tauP)
      : grid_(std::move(grid)), segments_(std::move(segments)), tauP_(tauP) {
    require(static_cast<int>(segments_.size()) == grid_.segments(), ErrorCategory::validation,
            "value function needs one segment record per grid segment");
  }

  const TimeGrid& grid() const { return grid_; }
  int segments() const { return static_cast<int>(segments_.size()); }
  const ValueSegment& segment(int k) const { return segments_[static_cast<std::size_t>(k)]; }
  double tauP() const { return tauP_; }

  double I(double t) const {
    const int k = clamped(t);
    const ValueSegment& s = segments_[static_cast<std::size_t>(k)];
    return s.I_end * std::exp(-s.q * backward_h(t, k));
  }
  double H(double t) const {
    const int k = clamped(t);
    return segments_[static_cast<std::size_t>(k)].H.value(backward_h(t, k));
  }
  double G(double t) const {
    const int k = clamped(t);
    const ValueSegment& s = segments_[static_cast<std::size_t>(k)];
    return s.G_end + s.g_integrand.integrate(backward_h(t, k));
  }
  double value(double t, double w) const { return -I(t) * w * w + H(t) * w + G(t); }

 private:
  int clamped(double t) const {
    if (t <= grid_.begin()) return 0;
    if (t >= grid_.end()) return grid_.segments() - 1;
    return grid_.segment_of(t);
  }
  double backward_h(double t, int k) const {
    const double h = grid_.knot(k + 1) - t;
    const double len = grid_.length(k);
    return h < 0.0 ? 0.0 : (h > len ? len : h);
  }

  TimeGrid grid_;
  std::vector<ValueSegment> segments_;
  double tauP_ = 0.0;
};

}  // namespace mvrl
