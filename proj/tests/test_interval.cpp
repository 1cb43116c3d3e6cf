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

#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "detcert/interval.hpp"
#include "support.hpp"

using namespace detcert;
using detcert::testing::uniform;

TEST_CASE("interval construction") {
  CHECK_THROWS_AS(Interval(1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(Interval(std::nan(""), 1.0), std::invalid_argument);
  const Interval p = Interval::point(2.5);
  CHECK(p.degenerate());
  CHECK(p.width() == 0.0);
  const Interval a(-1.0, 3.0);
  CHECK(a.mid() == 1.0);
  CHECK(a.contains(3.0));
  CHECK_FALSE(a.contains(3.1));
  CHECK(a.contains(3.0 + 1e-12, 1e-9));
  CHECK(a.contains(Interval(0.0, 2.0)));
  CHECK_FALSE(a.contains(Interval(0.0, 4.0)));
}

TEST_CASE("interval arithmetic") {
  CHECK(iv_add(Interval(1, 2), Interval(-3, 5)) == Interval(-2, 7));
  CHECK(iv_mul(Interval(-2, 3), Interval(-1, 4)) == Interval(-8, 12));
  CHECK(iv_mul(Interval(2, 3), Interval(4, 5)) == Interval(8, 15));
  CHECK(iv_mul(Interval(-3, -2), Interval(4, 5)) == Interval(-15, -8));
  CHECK(iv_scale(-2.0, Interval(1, 3)) == Interval(-6, -2));
  const Interval e = iv_monotone([](double x) { return std::exp(x); }, Monotonicity::increasing, Interval(0, 1));
  CHECK(e.lo() == 1.0);
  CHECK(e.hi() == doctest::Approx(std::exp(1.0)));
  const Interval n = iv_monotone([](double x) { return -x; }, Monotonicity::decreasing, Interval(1, 2));
  CHECK(n == Interval(-2, -1));
}

TEST_CASE("interval multiplication encloses sampled products") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 2000; ++trial) {
    const double a0 = uniform(rng, -3, 3), b0 = uniform(rng, -3, 3);
    const Interval a(a0, a0 + uniform(rng, 0, 2)), b(b0, b0 + uniform(rng, 0, 2));
    const Interval p = iv_mul(a, b);
    for (int s = 0; s < 10; ++s) {
      CHECK(p.contains(uniform(rng, a.lo(), a.hi()) * uniform(rng, b.lo(), b.hi()), 1e-12));
    }
  }
}

TEST_CASE("interval tensor validation") {
  CHECK_THROWS(IntervalTensor({2}, {0.0, 1.0}, {1.0, 0.5}));
  CHECK_THROWS(IntervalTensor({3}, {0.0, 1.0}, {1.0, 2.0}));
  CHECK_THROWS(IntervalTensor({2, 0}, {}, {}));
  const IntervalTensor t({2, 2}, {0, 1, 2, 3}, {1, 2, 3, 4});
  CHECK(t.size() == 4);
  CHECK(t.at(2) == Interval(2, 3));
  CHECK(t.reshaped({4}).shape() == std::vector<std::size_t>{4});
  CHECK_THROWS(t.reshaped({3}));
  const std::vector<double> inside{0.5, 1.5, 2.5, 3.5}, outside{0.5, 1.5, 2.5, 4.5};
  CHECK(t.contains(inside));
  CHECK_FALSE(t.contains(outside));
  const IntervalTensor p = IntervalTensor::point({2}, {1.0, 2.0});
  CHECK(p.lo(1) == p.hi(1));
}

TEST_CASE("affine image is exact per row") {
  // The row extremum of W x + b over a box sits at a vertex; enumerate them.
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 5, rows = 3;
    std::vector<double> lo(n), hi(n);
    for (std::size_t i = 0; i < n; ++i) {
      lo[i] = uniform(rng, -1, 1);
      hi[i] = lo[i] + uniform(rng, 0, 1);
    }
    const auto w = detcert::testing::random_values(rng, rows * n, 2.0);
    const auto b = detcert::testing::random_values(rng, rows, 1.0);
    const IntervalTensor y = iv_affine(w, rows, b, IntervalTensor({n}, lo, hi));
    for (std::size_t r = 0; r < rows; ++r) {
      double best = -std::numeric_limits<double>::infinity(), worst = std::numeric_limits<double>::infinity();
      for (unsigned mask = 0; mask < (1u << n); ++mask) {
        double v = b[r];
        for (std::size_t i = 0; i < n; ++i) v += w[r * n + i] * ((mask >> i) & 1u ? hi[i] : lo[i]);
        best = std::max(best, v);
        worst = std::min(worst, v);
      }
      CHECK(y.hi(r) == doctest::Approx(best).epsilon(1e-12));
      CHECK(y.lo(r) == doctest::Approx(worst).epsilon(1e-12));
    }
  }
}

TEST_CASE("affine image rejects mismatched shapes") {
  const std::vector<double> w{1, 2, 3, 4}, b{0, 0};
  CHECK_THROWS(iv_affine(w, 2, b, IntervalTensor::point({3}, {1, 2, 3})));
  CHECK_THROWS(iv_affine(w, 2, std::vector<double>{0}, IntervalTensor::point({2}, {1, 2})));
}
