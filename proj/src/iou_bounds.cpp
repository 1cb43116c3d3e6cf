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

#include "detcert/iou_bounds.hpp"

#include <algorithm>

namespace detcert {

CriticalPointSet critical_points_plane(const Interval& sum, const Interval& diff, double g_lo, double g_hi) {
  const double L0 = sum.lo(), U0 = sum.hi();
  const double L2 = diff.lo(), U2 = diff.hi();
  CriticalPointSet set;
  set.points.reserve(13);
  auto add = [&](double a, double b, CriticalKind k) { set.points.push_back({a, b, k}); };

  add((U0 - U2) / 2, (U0 + U2) / 2, CriticalKind::corner);
  add((U0 - L2) / 2, (U0 + L2) / 2, CriticalKind::corner);
  add((L0 - U2) / 2, (L0 + U2) / 2, CriticalKind::corner);
  add((L0 - L2) / 2, (L0 + L2) / 2, CriticalKind::corner);

  add(g_lo, U0 - g_lo, CriticalKind::gt_intersection);
  add(g_lo, L0 - g_lo, CriticalKind::gt_intersection);
  add(g_lo, U2 + g_lo, CriticalKind::gt_intersection);
  add(g_lo, L2 + g_lo, CriticalKind::gt_intersection);
  add(U0 - g_hi, g_hi, CriticalKind::gt_intersection);
  add(L0 - g_hi, g_hi, CriticalKind::gt_intersection);
  add(g_hi - U2, g_hi, CriticalKind::gt_intersection);
  add(g_hi - L2, g_hi, CriticalKind::gt_intersection);

  add(g_lo, g_hi, CriticalKind::gt_corner);
  return set;
}

namespace {

bool plane_feasible(const CriticalPoint& p, const Interval& sum, const Interval& diff) {
  return p.z_lo < p.z_hi && sum.contains(p.z_lo + p.z_hi, kFeasibilitySlack) &&
         diff.contains(p.z_hi - p.z_lo, kFeasibilitySlack);
}

std::vector<CriticalPoint> feasible_points(const Interval& sum, const Interval& diff, double g_lo, double g_hi) {
  std::vector<CriticalPoint> out;
  for (const CriticalPoint& p : critical_points_plane(sum, diff, g_lo, g_hi).points) {
    if (plane_feasible(p, sum, diff)) out.push_back(p);
  }
  return out;
}

}  // namespace

CandidateCensus candidate_census(const ConstraintRegion& r, const GroundTruth& g) {
  const auto xs = critical_points_plane(r.sum_x, r.diff_x, g.box.z0, g.box.z2).points;
  const auto ys = critical_points_plane(r.sum_y, r.diff_y, g.box.z1, g.box.z3).points;
  CandidateCensus c;
  c.x_points = xs.size();
  c.y_points = ys.size();
  for (const auto& px : xs) {
    for (const auto& py : ys) {
      ++c.combined;
      if (plane_feasible(px, r.sum_x, r.diff_x) && plane_feasible(py, r.sum_y, r.diff_y)) ++c.feasible;
    }
  }
  return c;
}

IoUInterval optimal_iou_bounds(const ConstraintRegion& region, const GroundTruth& g) {
  validate_ground_truth(g);
  const auto xs = feasible_points(region.sum_x, region.diff_x, g.box.z0, g.box.z2);
  const auto ys = feasible_points(region.sum_y, region.diff_y, g.box.z1, g.box.z3);
  if (xs.empty() || ys.empty()) throw InfeasibleRegion("no feasible valid critical point in the region");

  double lo = 1.0, hi = 0.0;
  for (const auto& px : xs) {
    for (const auto& py : ys) {
      const double v = iou(CornerBox{px.z_lo, py.z_lo, px.z_hi, py.z_hi}, g.box);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  return {lo, hi};
}

IoUInterval baseline_iou_bounds(const std::array<Interval, 4>& z, const GroundTruth& g) {
  validate_ground_truth(g);
  const CornerBox& gb = g.box;
  auto clamp0 = [](double v) { return std::max(v, 0.0); };

  // Intersection rectangle: [max(z0,g0), min(z2,g2)] x [max(z1,g1), min(z3,g3)].
  auto overlap = [&](const Interval& a, const Interval& b, double ga, double gb_) {
    const double left_lo = std::max(a.lo(), ga), left_hi = std::max(a.hi(), ga);
    const double right_lo = std::min(b.lo(), gb_), right_hi = std::min(b.hi(), gb_);
    return Interval(clamp0(right_lo - left_hi), clamp0(right_hi - left_lo));
  };
  const Interval iw = overlap(z[0], z[2], gb.z0, gb.z2);
  const Interval ih = overlap(z[1], z[3], gb.z1, gb.z3);
  const Interval inter = iv_mul(iw, ih);

  const Interval pw(clamp0(z[2].lo() - z[0].hi()), clamp0(z[2].hi() - z[0].lo()));
  const Interval ph(clamp0(z[3].lo() - z[1].hi()), clamp0(z[3].hi() - z[1].lo()));
  const Interval pred_area = iv_mul(pw, ph);

  const double ga = area(gb);
  // The union always covers the ground truth box.
  const double union_lo = std::max(pred_area.lo() + ga - inter.hi(), ga);
  const double union_hi = std::max(pred_area.hi() + ga - inter.lo(), union_lo);

  const double lo = std::clamp(inter.lo() / union_hi, 0.0, 1.0);
  const double hi = std::clamp(inter.hi() / union_lo, 0.0, 1.0);
  return {std::min(lo, hi), hi};
}

}  // namespace detcert
