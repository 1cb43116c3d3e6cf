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
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace detcert {

/// Closed real interval [lo, hi]. Degenerate intervals (lo == hi) are allowed.
class Interval {
 public:
  Interval() = default;
  Interval(double lo, double hi);

  static Interval point(double v) { return Interval(v, v); }

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double width() const { return hi_ - lo_; }
  double mid() const { return 0.5 * (lo_ + hi_); }
  bool degenerate() const { return lo_ == hi_; }
  bool contains(double v, double slack = 0.0) const {
    return v >= lo_ - slack && v <= hi_ + slack;
  }
  bool contains(const Interval& other, double slack = 0.0) const {
    return other.lo_ >= lo_ - slack && other.hi_ <= hi_ + slack;
  }

  friend bool operator==(const Interval&, const Interval&) = default;

 private:
  double lo_ = 0.0;
  double hi_ = 0.0;
};

enum class Monotonicity { increasing, decreasing };

Interval iv_add(const Interval& a, const Interval& b);
Interval iv_mul(const Interval& a, const Interval& b);
Interval iv_scale(double k, const Interval& a);

/// Image of `x` under a map that is monotone on [x.lo, x.hi].
template <typename F>
Interval iv_monotone(F&& f, Monotonicity direction, const Interval& x) {
  const double a = f(x.lo());
  const double b = f(x.hi());
  return direction == Monotonicity::increasing ? Interval(a, b) : Interval(b, a);
}

/// Shaped array of intervals, stored row-major as two flat arrays.
class IntervalTensor {
 public:
  IntervalTensor() = default;
  IntervalTensor(std::vector<std::size_t> shape, std::vector<double> lo, std::vector<double> hi);

  static IntervalTensor point(std::vector<std::size_t> shape, std::vector<double> values);

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t size() const { return lo_.size(); }
  std::span<const double> lo() const { return lo_; }
  std::span<const double> hi() const { return hi_; }
  double lo(std::size_t i) const { return lo_[i]; }
  double hi(std::size_t i) const { return hi_[i]; }
  Interval at(std::size_t i) const { return Interval(lo_[i], hi_[i]); }

  /// Same data under a new shape with equal element count.
  IntervalTensor reshaped(std::vector<std::size_t> shape) const;

  bool contains(const IntervalTensor& other, double slack = 0.0) const;
  bool contains(std::span<const double> values, double slack = 0.0) const;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> lo_;
  std::vector<double> hi_;
};

std::size_t shape_size(const std::vector<std::size_t>& shape);

/// Interval image of x -> W x + b. `weights` is rows x cols, row-major,
/// with cols == x.size(). The result has shape {rows}.
IntervalTensor iv_affine(std::span<const double> weights, std::size_t rows,
                         std::span<const double> bias, const IntervalTensor& x);

}  // namespace detcert
