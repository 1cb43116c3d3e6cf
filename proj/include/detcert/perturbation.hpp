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

#include <string_view>
#include <utility>
#include <vector>

#include "detcert/interval.hpp"
#include "detcert/tensor.hpp"

namespace detcert {

enum class PerturbationKind { brightness, contrast, motionblur };

std::string_view to_string(PerturbationKind kind);
PerturbationKind perturbation_kind_from_string(std::string_view name);

struct PerturbationSpec {
  PerturbationKind kind = PerturbationKind::brightness;
  double epsilon = 0.0;
  double angle_deg = 0.0;  // motion blur only: 0, 45, 90 or 135
  int kernel_size = 5;     // motion blur only: odd and positive
};

/// One-parameter affine image family x(t) = base + t * direction, t in t_range.
struct InputSet {
  Tensor base;
  Tensor direction;
  Interval t_range;

  Tensor realize(double t) const;
};

/// Normalised k x k line kernel through the centre at the given angle.
/// Angles are measured counter-clockwise from the +x axis with image rows
/// growing downwards, so 45 degrees runs bottom-left to top-right.
std::vector<double> motion_blur_kernel(int kernel_size, double angle_deg);

/// Per-channel zero-padded correlation with a k x k kernel.
Tensor convolve_same(const Tensor& image, const std::vector<double>& kernel, int kernel_size);

/// Brightness: direction all ones, t in [-eps, eps].
/// Contrast: direction (0.5 - image), t in [0, eps] (eps = 1 is uniform grey).
/// Motion blur: direction (K * image - image), t in [0, eps].
/// Pixels are not clamped. Throws std::invalid_argument for pixels outside
/// [0,1], negative eps, unsupported angles or even kernel sizes.
InputSet build_input_set(const Tensor& image, const PerturbationSpec& spec);

/// Per-pixel box enclosing the family over its t range.
IntervalTensor concretize(const InputSet& set);

/// Splits the t range at its midpoint; lower half first.
std::pair<InputSet, InputSet> bisect(const InputSet& set);

}  // namespace detcert
