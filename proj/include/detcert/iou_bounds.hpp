// Copyright 2026 The detcert Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "detcert/box_geometry.hpp"
#include "detcert/interval.hpp"

namespace detcert {

/// Sound bounds on IoU(predicted box, ground truth), 0 <= lo <= hi <= 1.
struct IoUInterval {
  double lo = 0.0;
  double hi = 1.0;

  double width() const { return hi - lo; }
  bool contains(double v, double slack = 0.0) const { return v >= lo - slack && v <= hi + slack; }
};

enum class CriticalKind { corner, gt_intersection, gt_corner };

/// A candidate (z_lo, z_hi) pair in one coordinate plane: (z0, z2) for x,
/// (z1, z3) for y.
struct CriticalPoint {
  double z_lo = 0.0;
  double z_hi = 0.0;
  CriticalKind kind = CriticalKind::corner;
};

/// Candidate extremum locations in one plane. At most 13 points: the four
/// region corners, the eight crossings of the lines z_lo = g_lo and
/// z_hi = g_hi with the region borders, and (g_lo, g_hi) itself. Points are
/// not filtered for feasibility.
struct CriticalPointSet {
  std::vector<CriticalPoint> points;
};

/// `sum` bounds z_lo + z_hi and `diff` bounds z_hi - z_lo.
CriticalPointSet critical_points_plane(const Interval& sum, const Interval& diff, double g_lo, double g_hi);

class InfeasibleRegion : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Slack used when checking candidate points against region constraints.
inline constexpr double kFeasibilitySlack = 1e-9;

/// Exact IoU range over the region, found by enumerating every feasible and
/// valid combination of x-plane and y-plane critical points.
IoUInterval optimal_iou_bounds(const ConstraintRegion& region, const GroundTruth& g);

/// Number of (x, y) critical point combinations examined, and how many of
/// them were feasible and valid. Exposed for diagnostics.
struct CandidateCensus {
  std::size_t x_points = 0;
  std::size_t y_points = 0;
  std::size_t combined = 0;
  std::size_t feasible = 0;
};
CandidateCensus candidate_census(const ConstraintRegion& region, const GroundTruth& g);

/// Interval-arithmetic IoU over independent corner-coordinate intervals
/// (the comparison baseline). Always sound, usually loose.
IoUInterval baseline_iou_bounds(const std::array<Interval, 4>& corners, const GroundTruth& g);

}  // namespace detcert
