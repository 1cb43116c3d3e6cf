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

#include <algorithm>
#include <random>

#include "detcert/oracle.hpp"
#include "detcert/propagation.hpp"
#include "support.hpp"

using namespace detcert;
using detcert::testing::toy_query;
using detcert::testing::uniform;

TEST_CASE("grid axes") {
  const auto a = oracle::grid_axis(Interval(0, 1), 5);
  CHECK(a == std::vector<double>{0, 0.25, 0.5, 0.75, 1});
  const auto b = oracle::grid_axis(Interval(0, 1), 3, {0.3, 2.0, -1.0, 0.5});
  CHECK(b == std::vector<double>{0, 0.3, 0.5, 1});
  CHECK(oracle::grid_axis(Interval::point(2), 10) == std::vector<double>{2});
  CHECK_THROWS(oracle::grid_axis(Interval(0, 1), 1));
}

TEST_CASE("hull sweep equals the exhaustive sweep") {
  std::mt19937_64 rng(97);
  for (int i = 0; i < 200; ++i) {
    const double sx = uniform(rng, 0, 30), sy = uniform(rng, 0, 30);
    const ConstraintRegion r{Interval(sx, sx + uniform(rng, 0, 10)), Interval(sy, sy + uniform(rng, 0, 10)),
                             Interval(1, 1 + uniform(rng, 0, 8)), Interval(1, 1 + uniform(rng, 0, 8))};
    const double x0 = uniform(rng, 0, 15), y0 = uniform(rng, 0, 15);
    const GroundTruth g{CornerBox{x0, y0, x0 + uniform(rng, 1, 8), y0 + uniform(rng, 1, 8)}, 0};
    const oracle::GridSpec spec{30, 0};
    const auto hull = oracle::grid_iou_extrema(r, g, spec);
    const auto full = oracle::grid_iou_extrema_exhaustive(r, g, spec);
    CHECK(hull.min == doctest::Approx(full.min).epsilon(1e-12));
    CHECK(hull.max == doctest::Approx(full.max).epsilon(1e-12));
  }
}

TEST_CASE("grid sweep of simple regions") {
  const GroundTruth g{CornerBox{1, 1, 3, 4}, 0};
  SUBCASE("point region") {
    const CornerBox b{0, 2, 2, 5};
    const ConstraintRegion r{Interval::point(2), Interval::point(7), Interval::point(2), Interval::point(3)};
    const auto e = oracle::grid_iou_extrema(r, g, {50, 0});
    CHECK(e.min == doctest::Approx(iou(b, g.box)));
    CHECK(e.max == doctest::Approx(iou(b, g.box)));
  }
  SUBCASE("region containing the ground truth") {
    // The extra lines put the ground truth itself on the grid.
    const ConstraintRegion r{Interval(3.3, 4.9), Interval(4.1, 5.7), Interval(1.1, 2.9), Interval(2.2, 3.3)};
    CHECK(oracle::grid_iou_extrema(r, g, {7, 0}).max == doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("region with no valid box") {
    const ConstraintRegion r{Interval(0, 1), Interval(0, 1), Interval(-2, -1), Interval(1, 2)};
    CHECK_THROWS(oracle::grid_iou_extrema(r, g, {10, 0}));
  }
}

TEST_CASE("parameter sampling") {
  const auto t = oracle::sample_parameters(Interval(-0.5, 0.25), 100, 7);
  REQUIRE(t.size() == 100);
  CHECK(t[0] == -0.5);
  CHECK(t[1] == 0.25);
  CHECK(std::all_of(t.begin(), t.end(), [](double v) { return v >= -0.5 && v <= 0.25; }));
  CHECK(oracle::sample_parameters(Interval(-0.5, 0.25), 100, 7) == t);
  CHECK(oracle::sample_parameters(Interval(-0.5, 0.25), 100, 8) != t);
  CHECK(oracle::sample_parameters(Interval(0, 1), 1, 0) == std::vector<double>{0});
  CHECK_THROWS(oracle::sample_parameters(Interval(0, 1), 0, 0));
}

TEST_CASE("sampled outputs lie inside the propagated bounds") {
  const VerificationQuery q = toy_query(2, PerturbationKind::motionblur, 0.7, 90);
  const InputSet set = build_input_set(q.image, q.perturbation);
  const IntervalTensor samples = oracle::sample_outputs(*q.model, set, 500, 3);
  const IntervalTensor box = concretize(set);
  for (PropagationMethod m : {PropagationMethod::ibp, PropagationMethod::backsub}) {
    const IntervalTensor bounds = output_bounds(*q.model, box, m);
    REQUIRE(bounds.size() == samples.size());
    for (std::size_t i = 0; i < bounds.size(); ++i) {
      CHECK(samples.lo(i) >= bounds.lo(i) - 1e-9);
      CHECK(samples.hi(i) <= bounds.hi(i) + 1e-9);
    }
  }
}

TEST_CASE("falsification") {
  CHECK_FALSE(oracle::falsify(toy_query(0, PerturbationKind::brightness, 0.0), 50, 1).has_value());
  CHECK_FALSE(oracle::falsify(toy_query(0, PerturbationKind::brightness, 0.05), 200, 1).has_value());
  const VerificationQuery q = toy_query(3, PerturbationKind::contrast, 1.0);
  const auto cex = oracle::falsify(q, 200, 1);
  REQUIRE(cex.has_value());
  CHECK(cex->violation != Violation::none);
  CHECK(check_image(q, cex->image) == cex->violation);
  CHECK(cex->image.data == build_input_set(q.image, q.perturbation).realize(cex->t).data);
  VerificationQuery bad = q;
  bad.ground_truth.class_id = 1;
  CHECK_THROWS_AS(oracle::falsify(bad, 10, 1), QueryRejected);
}
