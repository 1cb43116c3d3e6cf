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
#include <stdexcept>
#include <string_view>

#include "detcert/interval.hpp"

namespace detcert {

/// Corner-format box in pixels: (z0, z1) top-left, (z2, z3) bottom-right.
struct CornerBox {
  double z0 = 0.0, z1 = 0.0, z2 = 0.0, z3 = 0.0;

  bool valid() const { return z0 < z2 && z1 < z3; }
  friend bool operator==(const CornerBox&, const CornerBox&) = default;
};

/// Centre-format box in pixels.
struct CenterBox {
  double cx = 0.0, cy = 0.0, w = 0.0, h = 0.0;
  friend bool operator==(const CenterBox&, const CenterBox&) = default;
};

struct GroundTruth {
  CornerBox box;
  int class_id = 0;
};

/// Throws std::invalid_argument unless the ground-truth box has positive area.
void validate_ground_truth(const GroundTruth& g);

double area(const CornerBox& b);
double intersection(const CornerBox& a, const CornerBox& b);
double iou(const CornerBox& a, const CornerBox& b);

CornerBox h_map(const CenterBox& c);
CenterBox h_inverse(const CornerBox& b);

enum class DecoderKind { ssd, yolov2, yolov3 };

std::string_view to_string(DecoderKind kind);
DecoderKind decoder_kind_from_string(std::string_view name);

/// Prior box for one output slot.
///
/// For SSD, (p0, p1, p2, p3) is the centre-format prior in pixels and `scale`
/// is unused. For YOLO, (p0, p1) is the grid cell, (p2, p3) the anchor
/// width/height in cell units, and `scale` the grid stride in pixels.
struct Anchor {
  double p0 = 0.0, p1 = 0.0, p2 = 1.0, p3 = 1.0;
  double scale = 1.0;
};

/// SSD variances; ignored by the YOLO decoders.
struct DecoderVars {
  double var1 = 0.1;
  double var2 = 0.2;
};

class DecoderError : public std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Throws DecoderError if the anchor, scale or variances break the
/// positivity conditions that make the decoder strictly increasing.
void check_decoder_preconditions(DecoderKind kind, const Anchor& anchor, const DecoderVars& vars);

using Offsets = std::array<double, 4>;

/// Per-coordinate decoder components. Each is strictly increasing in its offset.
double decode_cx(DecoderKind kind, double o0, const Anchor& a, const DecoderVars& v);
double decode_cy(DecoderKind kind, double o1, const Anchor& a, const DecoderVars& v);
double decode_w(DecoderKind kind, double o2, const Anchor& a, const DecoderVars& v);
double decode_h(DecoderKind kind, double o3, const Anchor& a, const DecoderVars& v);

CenterBox decode(DecoderKind kind, const Offsets& o, const Anchor& anchor, const DecoderVars& vars);

/// Feasible corner boxes for given offset bounds, as bounds on
/// z0+z2, z1+z3, z2-z0 and z3-z1.
struct ConstraintRegion {
  Interval sum_x;
  Interval sum_y;
  Interval diff_x;
  Interval diff_y;

  /// True iff `b` satisfies all four constraints within `slack`.
  bool contains(const CornerBox& b, double slack = 0.0) const;
};

using OffsetBounds = std::array<Interval, 4>;

ConstraintRegion offset_interval_to_region(DecoderKind kind, const OffsetBounds& o,
                                           const Anchor& anchor, const DecoderVars& vars);

/// Independent corner-coordinate intervals obtained by interval evaluation of
/// the decoder followed by h. Looser than the region: it forgets that z0 and
/// z2 share the same centre and width.
std::array<Interval, 4> offset_interval_to_corners(DecoderKind kind, const OffsetBounds& o,
                                                   const Anchor& anchor, const DecoderVars& vars);

double sigmoid(double x);

}  // namespace detcert
