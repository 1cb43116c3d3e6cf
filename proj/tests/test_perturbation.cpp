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

#include <numeric>
#include <random>

#include "detcert/perturbation.hpp"
#include "support.hpp"

using namespace detcert;
using detcert::testing::uniform;

namespace {

Tensor random_image(std::mt19937_64& rng, std::array<std::size_t, 3> shape) {
  Tensor t = Tensor::filled(shape, 0.0);
  for (double& v : t.data) v = uniform(rng, 0, 1);
  return t;
}

// Indices (row, col) holding a nonzero tap.
std::vector<std::pair<int, int>> taps(const std::vector<double>& k, int size) {
  std::vector<std::pair<int, int>> out;
  for (int r = 0; r < size; ++r) {
    for (int c = 0; c < size; ++c) {
      if (k[static_cast<std::size_t>(r * size + c)] != 0.0) out.emplace_back(r, c);
    }
  }
  return out;
}

}  // namespace

TEST_CASE("motion blur kernels") {
  using P = std::vector<std::pair<int, int>>;
  CHECK(taps(motion_blur_kernel(3, 0), 3) == P{{1, 0}, {1, 1}, {1, 2}});
  CHECK(taps(motion_blur_kernel(3, 90), 3) == P{{0, 1}, {1, 1}, {2, 1}});
  CHECK(taps(motion_blur_kernel(3, 45), 3) == P{{0, 2}, {1, 1}, {2, 0}});
  CHECK(taps(motion_blur_kernel(3, 135), 3) == P{{0, 0}, {1, 1}, {2, 2}});
  for (double angle : {0.0, 45.0, 90.0, 135.0}) {
    const auto k = motion_blur_kernel(5, angle);
    CHECK(std::accumulate(k.begin(), k.end(), 0.0) == doctest::Approx(1.0));
    CHECK(taps(k, 5).size() == 5);
  }
  CHECK_THROWS(motion_blur_kernel(4, 0));
  CHECK_THROWS(motion_blur_kernel(3, 30));
}

TEST_CASE("blurring an impulse reproduces the line") {
  Tensor img = Tensor::filled({1, 7, 7}, 0.0);
  img.at(0, 3, 3) = 1.0;
  const auto k = motion_blur_kernel(3, 45);
  const Tensor out = convolve_same(img, k, 3);
  CHECK(out.at(0, 3, 3) == doctest::Approx(1.0 / 3));
  CHECK(out.at(0, 2, 4) == doctest::Approx(1.0 / 3));
  CHECK(out.at(0, 4, 2) == doctest::Approx(1.0 / 3));
  CHECK(out.at(0, 2, 2) == 0.0);
  double total = 0.0;
  for (double v : out.data) total += v;
  CHECK(total == doctest::Approx(1.0));
}

TEST_CASE("zero padding darkens the border") {
  const Tensor img = Tensor::filled({1, 4, 4}, 1.0);
  const Tensor out = convolve_same(img, motion_blur_kernel(3, 0), 3);
  CHECK(out.at(0, 1, 0) == doctest::Approx(2.0 / 3));
  CHECK(out.at(0, 1, 1) == doctest::Approx(1.0));
}

TEST_CASE("brightness family") {
  std::mt19937_64 rng(71);
  const Tensor img = random_image(rng, {1, 3, 3});
  const InputSet set = build_input_set(img, {PerturbationKind::brightness, 0.2});
  CHECK(set.t_range == Interval(-0.2, 0.2));
  const Tensor moved = set.realize(0.1);
  for (std::size_t i = 0; i < img.size(); ++i) CHECK(moved.data[i] == doctest::Approx(img.data[i] + 0.1));
}

TEST_CASE("contrast family ends at uniform grey") {
  std::mt19937_64 rng(73);
  const Tensor img = random_image(rng, {2, 3, 3});
  const InputSet set = build_input_set(img, {PerturbationKind::contrast, 1.0});
  CHECK(set.t_range == Interval(0, 1));
  for (double v : set.realize(1.0).data) CHECK(v == doctest::Approx(0.5));
  CHECK(set.realize(0.0).data == img.data);
}

TEST_CASE("motion blur family ends at the blurred image") {
  std::mt19937_64 rng(79);
  const Tensor img = random_image(rng, {1, 5, 5});
  PerturbationSpec spec{PerturbationKind::motionblur, 1.0, 90, 3};
  const InputSet set = build_input_set(img, spec);
  const Tensor blurred = convolve_same(img, motion_blur_kernel(3, 90), 3);
  const Tensor end = set.realize(1.0);
  for (std::size_t i = 0; i < img.size(); ++i) CHECK(end.data[i] == doctest::Approx(blurred.data[i]));
}

TEST_CASE("invalid perturbations are rejected") {
  const Tensor img = Tensor::filled({1, 2, 2}, 0.5);
  CHECK_THROWS(build_input_set(img, {PerturbationKind::brightness, -0.1}));
  CHECK_THROWS(build_input_set(img, {PerturbationKind::motionblur, 0.1, 10, 3}));
  CHECK_THROWS(build_input_set(img, {PerturbationKind::motionblur, 0.1, 0, 2}));
  Tensor bad = img;
  bad.data[0] = 1.5;
  CHECK_THROWS(build_input_set(bad, {PerturbationKind::contrast, 0.1}));
  CHECK(perturbation_kind_from_string("motionblur") == PerturbationKind::motionblur);
  CHECK_THROWS(perturbation_kind_from_string("rotation"));
}

TEST_CASE("concretized box encloses every member") {
  std::mt19937_64 rng(83);
  for (auto kind : {PerturbationKind::brightness, PerturbationKind::contrast, PerturbationKind::motionblur}) {
    const Tensor img = random_image(rng, {1, 6, 6});
    const InputSet set = build_input_set(img, {kind, 0.4, 135, 5});
    const IntervalTensor box = concretize(set);
    for (int s = 0; s < 200; ++s) {
      CHECK(box.contains(set.realize(uniform(rng, set.t_range.lo(), set.t_range.hi())).data));
    }
    CHECK(box.contains(set.realize(set.t_range.lo()).data));
    CHECK(box.contains(set.realize(set.t_range.hi()).data));
  }
}

TEST_CASE("bisection splits at the midpoint") {
  const Tensor img = Tensor::filled({1, 2, 2}, 0.3);
  const InputSet set = build_input_set(img, {PerturbationKind::brightness, 0.5});
  const auto [lower, upper] = bisect(set);
  CHECK(lower.t_range == Interval(-0.5, 0.0));
  CHECK(upper.t_range == Interval(0.0, 0.5));
  CHECK(lower.base.data == set.base.data);
  const InputSet point = build_input_set(img, {PerturbationKind::contrast, 0.0});
  CHECK(point.t_range.degenerate());
  CHECK_THROWS(bisect(point));
}
