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

#include "detcert/perturbation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace detcert {

std::string_view to_string(PerturbationKind kind) {
  switch (kind) {
    case PerturbationKind::brightness: return "brightness";
    case PerturbationKind::contrast: return "contrast";
    case PerturbationKind::motionblur: return "motionblur";
  }
  return "?";
}

PerturbationKind perturbation_kind_from_string(std::string_view name) {
  if (name == "brightness") return PerturbationKind::brightness;
  if (name == "contrast") return PerturbationKind::contrast;
  if (name == "motionblur") return PerturbationKind::motionblur;
  throw std::invalid_argument("unknown perturbation kind '" + std::string(name) + "'");
}

Tensor InputSet::realize(double t) const {
  Tensor out = base;
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += t * direction.data[i];
  return out;
}

std::vector<double> motion_blur_kernel(int k, double angle_deg) {
  if (k <= 0 || k % 2 == 0) throw std::invalid_argument("motion blur kernel size must be odd and positive");
  int dx = 0, dy = 0;  // step along the line, dy in image rows
  if (angle_deg == 0.0) {
    dx = 1;
  } else if (angle_deg == 45.0) {
    dx = 1;
    dy = -1;
  } else if (angle_deg == 90.0) {
    dy = 1;
  } else if (angle_deg == 135.0) {
    dx = 1;
    dy = 1;
  } else {
    throw std::invalid_argument("unsupported motion blur angle " + std::to_string(angle_deg));
  }
  std::vector<double> kernel(static_cast<std::size_t>(k * k), 0.0);
  const int r = k / 2;
  for (int s = -r; s <= r; ++s) {
    kernel[static_cast<std::size_t>((r + s * dy) * k + (r + s * dx))] = 1.0 / k;
  }
  return kernel;
}

Tensor convolve_same(const Tensor& image, const std::vector<double>& kernel, int k) {
  const int r = k / 2;
  const auto H = static_cast<int>(image.height()), W = static_cast<int>(image.width());
  Tensor out = Tensor::filled(image.shape, 0.0);
  for (std::size_t c = 0; c < image.channels(); ++c) {
    for (int y = 0; y < H; ++y) {
      for (int x = 0; x < W; ++x) {
        double acc = 0.0;
        for (int ky = 0; ky < k; ++ky) {
          const int iy = y + ky - r;
          if (iy < 0 || iy >= H) continue;
          for (int kx = 0; kx < k; ++kx) {
            const int ix = x + kx - r;
            if (ix < 0 || ix >= W) continue;
            acc += kernel[static_cast<std::size_t>(ky * k + kx)] *
                   image.at(c, static_cast<std::size_t>(iy), static_cast<std::size_t>(ix));
          }
        }
        out.at(c, static_cast<std::size_t>(y), static_cast<std::size_t>(x)) = acc;
      }
    }
  }
  return out;
}

InputSet build_input_set(const Tensor& image, const PerturbationSpec& spec) {
  if (!(spec.epsilon >= 0.0)) throw std::invalid_argument("perturbation epsilon must be non-negative");
  for (double v : image.data) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("image pixels must lie in [0,1]");
  }
  InputSet set{image, Tensor::filled(image.shape, 0.0), Interval(0.0, spec.epsilon)};
  switch (spec.kind) {
    case PerturbationKind::brightness:
      std::fill(set.direction.data.begin(), set.direction.data.end(), 1.0);
      set.t_range = Interval(-spec.epsilon, spec.epsilon);
      break;
    case PerturbationKind::contrast:
      for (std::size_t i = 0; i < image.size(); ++i) set.direction.data[i] = 0.5 - image.data[i];
      break;
    case PerturbationKind::motionblur: {
      const auto kernel = motion_blur_kernel(spec.kernel_size, spec.angle_deg);
      const Tensor blurred = convolve_same(image, kernel, spec.kernel_size);
      for (std::size_t i = 0; i < image.size(); ++i) set.direction.data[i] = blurred.data[i] - image.data[i];
      break;
    }
  }
  return set;
}

IntervalTensor concretize(const InputSet& set) {
  const std::size_t n = set.base.size();
  std::vector<double> lo(n), hi(n);
  const double a = set.t_range.lo(), b = set.t_range.hi();
  for (std::size_t i = 0; i < n; ++i) {
    const double va = set.base.data[i] + a * set.direction.data[i];
    const double vb = set.base.data[i] + b * set.direction.data[i];
    lo[i] = std::min(va, vb);
    hi[i] = std::max(va, vb);
  }
  return IntervalTensor({set.base.shape.begin(), set.base.shape.end()}, std::move(lo), std::move(hi));
}

std::pair<InputSet, InputSet> bisect(const InputSet& set) {
  if (set.t_range.degenerate()) throw std::invalid_argument("cannot bisect a degenerate parameter interval");
  const double mid = set.t_range.mid();
  InputSet lower = set, upper = set;
  lower.t_range = Interval(set.t_range.lo(), mid);
  upper.t_range = Interval(mid, set.t_range.hi());
  return {std::move(lower), std::move(upper)};
}

}  // namespace detcert
