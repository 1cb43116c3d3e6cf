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
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "detcert/box_geometry.hpp"
#include "detcert/model.hpp"
#include "detcert/perturbation.hpp"
#include "detcert/verifier.hpp"

namespace detcert::testing {

inline std::filesystem::path data_dir() { return DETCERT_TEST_DATA; }
inline std::filesystem::path toy_dir() { return data_dir() / "toy_detector"; }

inline double uniform(std::mt19937_64& rng, double a, double b) {
  return std::uniform_real_distribution<double>(a, b)(rng);
}

inline int uniform_int(std::mt19937_64& rng, int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng); }

inline std::vector<double> random_values(std::mt19937_64& rng, std::size_t n, double scale) {
  std::vector<double> v(n);
  for (double& x : v) x = uniform(rng, -scale, scale);
  return v;
}

/// Small random detector-shaped network: up to four affine layers of width
/// at most 64, mixing relu, leakyrelu and average pooling.
ModelBundle random_network(std::mt19937_64& rng);

/// Ground truth boxes of the toy detector images, indexed like image_<i>.json.
GroundTruth toy_ground_truth(std::size_t image);
constexpr std::size_t kToyImages = 6;

VerificationQuery toy_query(std::size_t image, PerturbationKind kind, double epsilon, double angle = 0.0);

/// Reference forward pass written independently of the engine: plain loops
/// over the layer definitions.
std::vector<double> reference_forward(const ModelBundle& model, const std::vector<double>& input);

}  // namespace detcert::testing
