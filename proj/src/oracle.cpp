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

#include "detcert/oracle.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

namespace detcert::oracle {

std::vector<double> grid_axis(const Interval& range, std::size_t resolution, const std::vector<double>& extra) {
  if (resolution < 2) throw std::invalid_argument("grid resolution must be at least 2");
  std::vector<double> axis;
  if (range.degenerate()) return {range.lo()};
  axis.reserve(resolution + extra.size());
  const double lo = range.lo(), hi = range.hi();
  for (std::size_t i = 0; i < resolution; ++i) {
    axis.push_back(i + 1 == resolution ? hi : lo + (hi - lo) * static_cast<double>(i) / (resolution - 1));
  }
  for (double v : extra) {
    if (v >= lo && v <= hi) axis.push_back(v);
  }
  std::sort(axis.begin(), axis.end());
  axis.erase(std::unique(axis.begin(), axis.end()), axis.end());
  return axis;
}

namespace {

struct PlanePoint {
  double z_lo, z_hi;
  double width;  // the grid's diff value
  double overlap;
};

std::vector<PlanePoint> plane_grid(const Interval& sum, const Interval& diff, double g_lo, double g_hi,
                                   std::size_t res) {
  const double L0 = sum.lo(), U0 = sum.hi(), L2 = diff.lo(), U2 = diff.hi();
  const auto sums = grid_axis(sum, res, {g_lo + g_hi, 2 * g_lo + L2, 2 * g_lo + U2, 2 * g_hi - L2, 2 * g_hi - U2});
  const auto diffs = grid_axis(diff, res, {g_hi - g_lo, U0 - 2 * g_lo, L0 - 2 * g_lo, 2 * g_hi - U0, 2 * g_hi - L0});
  std::vector<PlanePoint> pts;
  pts.reserve(sums.size() * diffs.size());
  for (double d : diffs) {
    for (double s : sums) {
      const double lo = (s - d) / 2, hi = (s + d) / 2;
      if (!(lo < hi)) continue;
      pts.push_back({lo, hi, d, std::max(0.0, std::min(hi, g_hi) - std::max(lo, g_lo))});
    }
  }
  return pts;
}

double cross(const PlanePoint& o, const PlanePoint& a, const PlanePoint& b) {
  return (a.width - o.width) * (b.overlap - o.overlap) - (a.overlap - o.overlap) * (b.width - o.width);
}

// Convex hull of the (width, overlap) cloud, collinear boundary points kept.
std::vector<PlanePoint> hull(std::vector<PlanePoint> pts) {
  std::sort(pts.begin(), pts.end(), [](const PlanePoint& a, const PlanePoint& b) {
    return a.width != b.width ? a.width < b.width : a.overlap < b.overlap;
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const PlanePoint& a, const PlanePoint& b) {
                          return a.width == b.width && a.overlap == b.overlap;
                        }),
            pts.end());
  if (pts.size() < 3) return pts;
  std::vector<PlanePoint> h(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(h[k - 2], h[k - 1], p) < 0) --k;
    h[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(h[k - 2], h[k - 1], pts[i]) < 0) --k;
    h[k++] = pts[i];
  }
  h.resize(k - 1);
  return h;
}

// Per width column only the largest and smallest overlap can be hull vertices.
std::vector<PlanePoint> column_extremes(const std::vector<PlanePoint>& pts) {
  std::vector<PlanePoint> out;
  std::size_t i = 0;
  while (i < pts.size()) {
    std::size_t j = i;
    const PlanePoint* best = &pts[i];
    const PlanePoint* worst = &pts[i];
    while (j < pts.size() && pts[j].width == pts[i].width) {
      if (pts[j].overlap > best->overlap) best = &pts[j];
      if (pts[j].overlap < worst->overlap) worst = &pts[j];
      ++j;
    }
    out.push_back(*best);
    out.push_back(*worst);
    i = j;
  }
  return out;
}

Extrema sweep(const std::vector<PlanePoint>& xs, const std::vector<PlanePoint>& ys, const CornerBox& g) {
  Extrema e;
  for (const auto& px : xs) {
    for (const auto& py : ys) {
      const double v = iou(CornerBox{px.z_lo, py.z_lo, px.z_hi, py.z_hi}, g);
      e.min = std::min(e.min, v);
      e.max = std::max(e.max, v);
    }
  }
  return e;
}

std::pair<std::vector<PlanePoint>, std::vector<PlanePoint>> planes(const ConstraintRegion& r, const GroundTruth& g,
                                                                   const GridSpec& grid) {
  validate_ground_truth(g);
  auto xs = plane_grid(r.sum_x, r.diff_x, g.box.z0, g.box.z2, grid.resolution_per_plane);
  auto ys = plane_grid(r.sum_y, r.diff_y, g.box.z1, g.box.z3, grid.resolution_per_plane);
  if (xs.empty() || ys.empty()) throw std::invalid_argument("region contains no valid box");
  return {std::move(xs), std::move(ys)};
}

}  // namespace

Extrema grid_iou_extrema(const ConstraintRegion& region, const GroundTruth& g, const GridSpec& grid) {
  auto [xs, ys] = planes(region, g, grid);
  // plane_grid emits points grouped by diff, i.e. by width.
  return sweep(hull(column_extremes(xs)), hull(column_extremes(ys)), g.box);
}

Extrema grid_iou_extrema_exhaustive(const ConstraintRegion& region, const GroundTruth& g, const GridSpec& grid) {
  auto [xs, ys] = planes(region, g, grid);
  return sweep(xs, ys, g.box);
}

std::vector<double> sample_parameters(const Interval& t, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("sample count must be positive");
  std::vector<double> out{t.lo()};
  if (n >= 2) out.push_back(t.hi());
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(t.lo(), t.hi());
  while (out.size() < n) out.push_back(t.degenerate() ? t.lo() : dist(rng));
  return out;
}

IntervalTensor sample_outputs(const ModelBundle& model, const InputSet& set, std::size_t n, std::uint64_t seed) {
  std::vector<double> lo, hi;
  for (double t : sample_parameters(set.t_range, n, seed)) {
    const auto y = forward(model, set.realize(t));
    if (lo.empty()) {
      lo = y;
      hi = y;
      continue;
    }
    for (std::size_t i = 0; i < y.size(); ++i) {
      lo[i] = std::min(lo[i], y[i]);
      hi[i] = std::max(hi[i], y[i]);
    }
  }
  const std::size_t size = lo.size();
  return IntervalTensor({size}, std::move(lo), std::move(hi));
}

std::optional<Counterexample> falsify(const VerificationQuery& query, std::size_t n, std::uint64_t seed) {
  validate_query(query);
  const InputSet set = build_input_set(query.image, query.perturbation);
  for (double t : sample_parameters(set.t_range, n, seed)) {
    Tensor image = set.realize(t);
    const Violation v = check_image(query, image);
    if (v != Violation::none) return Counterexample{t, std::move(image), v, ""};
  }
  return std::nullopt;
}

}  // namespace detcert::oracle
