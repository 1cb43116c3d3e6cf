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

#include "detcert/interval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace detcert {

Interval::Interval(double lo, double hi) : lo_(lo), hi_(hi) {
  // Also rejects NaN endpoints.
  if (!(lo <= hi)) {
    throw std::invalid_argument("inverted interval [" + std::to_string(lo) + ", " +
                                std::to_string(hi) + "]");
  }
}

Interval iv_add(const Interval& a, const Interval& b) {
  return Interval(a.lo() + b.lo(), a.hi() + b.hi());
}

Interval iv_mul(const Interval& a, const Interval& b) {
  const double p[4] = {a.lo() * b.lo(), a.lo() * b.hi(), a.hi() * b.lo(), a.hi() * b.hi()};
  auto [mn, mx] = std::minmax_element(std::begin(p), std::end(p));
  return Interval(*mn, *mx);
}

Interval iv_scale(double k, const Interval& a) {
  return k >= 0.0 ? Interval(k * a.lo(), k * a.hi()) : Interval(k * a.hi(), k * a.lo());
}

std::size_t shape_size(const std::vector<std::size_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

IntervalTensor::IntervalTensor(std::vector<std::size_t> shape, std::vector<double> lo,
                               std::vector<double> hi)
    : shape_(std::move(shape)), lo_(std::move(lo)), hi_(std::move(hi)) {
  for (std::size_t d : shape_) {
    if (d == 0) throw std::invalid_argument("IntervalTensor: zero-sized dimension");
  }
  const std::size_t n = shape_size(shape_);
  if (lo_.size() != n || hi_.size() != n) {
    throw std::invalid_argument("IntervalTensor: data length does not match shape");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!(lo_[i] <= hi_[i])) {
      throw std::invalid_argument("IntervalTensor: inverted bounds at element " +
                                  std::to_string(i));
    }
  }
}

IntervalTensor IntervalTensor::point(std::vector<std::size_t> shape, std::vector<double> values) {
  std::vector<double> copy = values;
  return IntervalTensor(std::move(shape), std::move(values), std::move(copy));
}

IntervalTensor IntervalTensor::reshaped(std::vector<std::size_t> shape) const {
  if (shape_size(shape) != size()) {
    throw std::invalid_argument("IntervalTensor::reshaped: element count mismatch");
  }
  return IntervalTensor(std::move(shape), lo_, hi_);
}

bool IntervalTensor::contains(const IntervalTensor& other, double slack) const {
  if (other.size() != size()) return false;
  for (std::size_t i = 0; i < size(); ++i) {
    if (other.lo_[i] < lo_[i] - slack || other.hi_[i] > hi_[i] + slack) return false;
  }
  return true;
}

bool IntervalTensor::contains(std::span<const double> values, double slack) const {
  if (values.size() != size()) return false;
  for (std::size_t i = 0; i < size(); ++i) {
    if (values[i] < lo_[i] - slack || values[i] > hi_[i] + slack) return false;
  }
  return true;
}

IntervalTensor iv_affine(std::span<const double> weights, std::size_t rows,
                         std::span<const double> bias, const IntervalTensor& x) {
  const std::size_t cols = x.size();
  if (weights.size() != rows * cols) {
    throw std::invalid_argument("iv_affine: weight matrix has " + std::to_string(weights.size()) +
                                " entries, expected " + std::to_string(rows) + "x" +
                                std::to_string(cols));
  }
  if (bias.size() != rows) throw std::invalid_argument("iv_affine: bias length mismatch");

  std::vector<double> lo(rows), hi(rows);
  for (std::size_t j = 0; j < rows; ++j) {
    double l = bias[j], h = bias[j];
    const double* w = weights.data() + j * cols;
    for (std::size_t i = 0; i < cols; ++i) {
      if (w[i] >= 0.0) {
        l += w[i] * x.lo(i);
        h += w[i] * x.hi(i);
      } else {
        l += w[i] * x.hi(i);
        h += w[i] * x.lo(i);
      }
    }
    lo[j] = l;
    hi[j] = h;
  }
  return IntervalTensor({rows}, std::move(lo), std::move(hi));
}

}  // namespace detcert
