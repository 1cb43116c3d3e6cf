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

#include "detcert/box_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace detcert {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void validate_ground_truth(const GroundTruth& g) {
  if (!(area(g.box) > 0.0) || !g.box.valid()) {
    throw std::invalid_argument("ground truth box must have positive area");
  }
}

double area(const CornerBox& b) { return (b.z3 - b.z1) * (b.z2 - b.z0); }

double intersection(const CornerBox& a, const CornerBox& b) {
  const double w = std::min(a.z2, b.z2) - std::max(a.z0, b.z0);
  const double h = std::min(a.z3, b.z3) - std::max(a.z1, b.z1);
  return std::max(w, 0.0) * std::max(h, 0.0);
}

double iou(const CornerBox& a, const CornerBox& b) {
  const double i = intersection(a, b);
  const double u = area(a) + area(b) - i;
  if (u <= 0.0) return 0.0;
  return std::clamp(i / u, 0.0, 1.0);
}

CornerBox h_map(const CenterBox& c) {
  return {c.cx - c.w / 2, c.cy - c.h / 2, c.cx + c.w / 2, c.cy + c.h / 2};
}

CenterBox h_inverse(const CornerBox& b) {
  return {(b.z0 + b.z2) / 2, (b.z1 + b.z3) / 2, b.z2 - b.z0, b.z3 - b.z1};
}

std::string_view to_string(DecoderKind kind) {
  switch (kind) {
    case DecoderKind::ssd: return "ssd";
    case DecoderKind::yolov2: return "yolov2";
    case DecoderKind::yolov3: return "yolov3";
  }
  return "?";
}

DecoderKind decoder_kind_from_string(std::string_view name) {
  if (name == "ssd") return DecoderKind::ssd;
  if (name == "yolov2") return DecoderKind::yolov2;
  if (name == "yolov3") return DecoderKind::yolov3;
  throw std::invalid_argument("unknown decoder kind '" + std::string(name) + "'");
}

void check_decoder_preconditions(DecoderKind kind, const Anchor& a, const DecoderVars& v) {
  if (!(a.p2 > 0.0) || !(a.p3 > 0.0)) {
    throw DecoderError("anchor width/height must be positive");
  }
  if (kind == DecoderKind::ssd) {
    if (!(v.var1 > 0.0) || !(v.var2 > 0.0)) throw DecoderError("SSD variances must be positive");
  } else if (!(a.scale > 0.0)) {
    throw DecoderError("YOLO grid stride must be positive");
  }
}

double decode_cx(DecoderKind kind, double o0, const Anchor& a, const DecoderVars& v) {
  switch (kind) {
    case DecoderKind::ssd: return a.p0 + o0 * v.var1 * a.p2;
    case DecoderKind::yolov2: return (sigmoid(o0) + a.p0) * a.scale;
    case DecoderKind::yolov3: return (2.0 * sigmoid(o0) - 0.5 + a.p0) * a.scale;
  }
  return 0.0;
}

double decode_cy(DecoderKind kind, double o1, const Anchor& a, const DecoderVars& v) {
  switch (kind) {
    case DecoderKind::ssd: return a.p1 + o1 * v.var1 * a.p3;
    case DecoderKind::yolov2: return (sigmoid(o1) + a.p1) * a.scale;
    case DecoderKind::yolov3: return (2.0 * sigmoid(o1) - 0.5 + a.p1) * a.scale;
  }
  return 0.0;
}

namespace {

double decode_extent(DecoderKind kind, double o, double prior, double scale, const DecoderVars& v) {
  switch (kind) {
    case DecoderKind::ssd: return prior * std::exp(o * v.var2);
    case DecoderKind::yolov2: return prior * std::exp(o) * scale;
    case DecoderKind::yolov3: {
      const double s = 2.0 * sigmoid(o);
      return s * s * prior * scale;
    }
  }
  return 0.0;
}

}  // namespace

double decode_w(DecoderKind kind, double o2, const Anchor& a, const DecoderVars& v) {
  return decode_extent(kind, o2, a.p2, a.scale, v);
}

double decode_h(DecoderKind kind, double o3, const Anchor& a, const DecoderVars& v) {
  return decode_extent(kind, o3, a.p3, a.scale, v);
}

CenterBox decode(DecoderKind kind, const Offsets& o, const Anchor& anchor, const DecoderVars& vars) {
  check_decoder_preconditions(kind, anchor, vars);
  return {decode_cx(kind, o[0], anchor, vars), decode_cy(kind, o[1], anchor, vars),
          decode_w(kind, o[2], anchor, vars), decode_h(kind, o[3], anchor, vars)};
}

bool ConstraintRegion::contains(const CornerBox& b, double slack) const {
  return sum_x.contains(b.z0 + b.z2, slack) && sum_y.contains(b.z1 + b.z3, slack) &&
         diff_x.contains(b.z2 - b.z0, slack) && diff_y.contains(b.z3 - b.z1, slack);
}

ConstraintRegion offset_interval_to_region(DecoderKind kind, const OffsetBounds& o,
                                           const Anchor& a, const DecoderVars& v) {
  check_decoder_preconditions(kind, a, v);
  const auto inc = Monotonicity::increasing;
  auto twice_cx = [&](double x) { return 2.0 * decode_cx(kind, x, a, v); };
  auto twice_cy = [&](double x) { return 2.0 * decode_cy(kind, x, a, v); };
  auto w = [&](double x) { return decode_w(kind, x, a, v); };
  auto h = [&](double x) { return decode_h(kind, x, a, v); };
  return {iv_monotone(twice_cx, inc, o[0]), iv_monotone(twice_cy, inc, o[1]),
          iv_monotone(w, inc, o[2]), iv_monotone(h, inc, o[3])};
}

std::array<Interval, 4> offset_interval_to_corners(DecoderKind kind, const OffsetBounds& o,
                                                   const Anchor& a, const DecoderVars& v) {
  check_decoder_preconditions(kind, a, v);
  const auto inc = Monotonicity::increasing;
  const Interval cx = iv_monotone([&](double x) { return decode_cx(kind, x, a, v); }, inc, o[0]);
  const Interval cy = iv_monotone([&](double x) { return decode_cy(kind, x, a, v); }, inc, o[1]);
  const Interval w = iv_monotone([&](double x) { return decode_w(kind, x, a, v); }, inc, o[2]);
  const Interval h = iv_monotone([&](double x) { return decode_h(kind, x, a, v); }, inc, o[3]);
  return {Interval(cx.lo() - w.hi() / 2, cx.hi() - w.lo() / 2),
          Interval(cy.lo() - h.hi() / 2, cy.hi() - h.lo() / 2),
          Interval(cx.lo() + w.lo() / 2, cx.hi() + w.hi() / 2),
          Interval(cy.lo() + h.lo() / 2, cy.hi() + h.hi() / 2)};
}

}  // namespace detcert
