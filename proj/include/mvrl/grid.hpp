#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "mvrl/common.hpp"

namespace mvrl {

// Strictly increasing knot vector t_0 < t_1 < ... < t_S defining S segments.
// Piecewise-constant model coefficients live on segments [t_k, t_{k+1});
// the final segment is closed on the right so t = t_S maps to segment S-1.
class TimeGrid {
 public:
  TimeGrid() = default;

  explicit TimeGrid(std::vector<double> knots) : knots_(std::move(knots)) {
    require(knots_.size() >= 2, ErrorCategory::validation, "time grid needs at least two knots");
    for (std::size_t i = 1; i < knots_.size(); ++i)
      require(knots_[i] > knots_[i - 1] + 1e-14, ErrorCategory::validation,
              "time grid knots must be strictly increasing");
  }

  static TimeGrid single(double t_begin, double t_end) { return TimeGrid({t_begin, t_end}); }

  int segments() const { return static_cast<int>(knots_.size()) - 1; }
  double begin() const { return knots_.front(); }
  double end() const { return knots_.back(); }
  double knot(int k) const { return knots_[static_cast<std::size_t>(k)]; }
  double length(int k) const { return knots_[static_cast<std::size_t>(k) + 1] - knots_[static_cast<std::size_t>(k)]; }
  const std::vector<double>& knots() const { return knots_; }

  int segment_of(double t) const {
    require(t >= begin() - 1e-12 && t <= end() + 1e-12, ErrorCategory::validation,
            "time outside grid span");
    auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
    int k = static_cast<int>(it - knots_.begin()) - 1;
    return std::clamp(k, 0, segments() - 1);
  }

  // Union of the two knot sets (spans must agree); near-duplicates collapse.
  TimeGrid merged_with(const TimeGrid& other) const {
    require(std::abs(begin() - other.begin()) < 1e-12 && std::abs(end() - other.end()) < 1e-12,
            ErrorCategory::validation, "cannot merge time grids with different spans");
    std::vector<double> all = knots_;
    all.insert(all.end(), other.knots_.begin(), other.knots_.end());
    std::sort(all.begin(), all.end());
    std::vector<double> dedup;
    for (double t : all)
      if (dedup.empty() || t > dedup.back() + 1e-12) dedup.push_back(t);
    return TimeGrid(std::move(dedup));
  }

  // Knots clipped to [a, b], with a and b inserted as boundary knots.
  TimeGrid restricted(double a, double b) const {
    require(b > a, ErrorCategory::validation, "empty restriction span");
    require(a >= begin() - 1e-12 && b <= end() + 1e-12, ErrorCategory::validation,
            "restriction outside grid span");
    std::vector<double> out{a};
    for (double t : knots_)
      if (t > a + 1e-12 && t < b - 1e-12) out.push_back(t);
    out.push_back(b);
    return TimeGrid(std::move(out));
  }

 private:
  std::vector<double> knots_;
};

}  // namespace mvrl
