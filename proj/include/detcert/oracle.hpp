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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "detcert/box_geometry.hpp"
#include "detcert/interval.hpp"
#include "detcert/model.hpp"
#include "detcert/perturbation.hpp"
#include "detcert/verifier.hpp"

// Brute-force reference implementations. Slow and simple on purpose; used by
// tests and by the `falsify` command.

namespace detcert::oracle {

struct GridSpec {
  std::size_t resolution_per_plane = 400;  // samples per axis, >= 2
  std::uint64_t seed = 0;                  // unused by the regular sweep
};

struct Extrema {
  double min = 1.0;
  double max = 0.0;
};

/// Sample values along one axis: `resolution` evenly spaced points including
/// both endpoints, plus any `extra` values lying inside the interval.
std::vector<double> grid_axis(const Interval& range, std::size_t resolution, const std::vector<double>& extra = {});

/// Sampled IoU range over the region on a (sum, diff) grid per plane. Each
/// axis also carries the lines through the region corners and every
/// crossing of a border with z_lo = g_lo or z_hi = g_hi.
///
/// For a fixed y-plane point IoU is linear-fractional in (width_x,
/// overlap_x), so only convex-hull vertices of the x-plane's (width,
/// overlap) samples can be extreme; the sweep evaluates hull_x x hull_y
/// instead of the full product. The result equals the full sweep.
Extrema grid_iou_extrema(const ConstraintRegion& region, const GroundTruth& g, const GridSpec& grid);

/// The same sweep evaluated over every pair of grid points. Quadratic in the
/// per-plane point count; only for small grids.
Extrema grid_iou_extrema_exhaustive(const ConstraintRegion& region, const GroundTruth& g, const GridSpec& grid);

/// Parameter values for sampling: the endpoints first, then uniform draws.
std::vector<double> sample_parameters(const Interval& t_range, std::size_t n, std::uint64_t seed);

/// Per-output envelope of forward() over n sampled parameter values.
IntervalTensor sample_outputs(const ModelBundle& model, const InputSet& set, std::size_t n, std::uint64_t seed);

/// First sampled parameter value whose realised image breaks correctness.
std::optional<Counterexample> falsify(const VerificationQuery& query, std::size_t n, std::uint64_t seed);

}  // namespace detcert::oracle
