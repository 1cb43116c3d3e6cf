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
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "detcert/box_geometry.hpp"
#include "detcert/iou_bounds.hpp"
#include "detcert/model.hpp"
#include "detcert/perturbation.hpp"
#include "detcert/verifier.hpp"

namespace detcert::cli {

inline constexpr const char* kEngineVersion = "0.1.0";
inline constexpr int kReportSchemaVersion = 1;

enum ExitCode : int {
  kExitRobust = 0,
  kExitNonRobust = 1,
  kExitUnknown = 2,
  kExitError = 3,
};

class QueryFileError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SolverOptions {
  BoundingMethod bounding = BoundingMethod::optimal;
  PropagationMethod propagation = PropagationMethod::backsub;
  int max_depth = 12;
  double timeout_s = 1800.0;
  std::uint64_t seed = 0;
};

struct QueryImage {
  std::string name;  // path as written in the query file
  Tensor image;
  GroundTruth ground_truth;
};

/// Parsed and schema-checked query file. Paths are resolved relative to the
/// file's directory.
struct QueryFile {
  std::shared_ptr<const ModelBundle> model;
  std::vector<QueryImage> images;
  double tau_iou = 0.5;
  double tau_class = 0.15;
  std::vector<PerturbationSpec> perturbations;  // epsilon unset; taken from budgets
  std::vector<double> budgets;
  SolverOptions solver;
};

/// Throws QueryFileError for schema violations and ParseError /
/// ValidationError from the model and image loaders.
QueryFile load_query_file(const std::filesystem::path& path);

/// One row per (image, perturbation, budget), in that nesting order.
struct QueryRow {
  std::string image;
  VerificationQuery query;
};
std::vector<QueryRow> expand_rows(const QueryFile& file);

struct TightnessInstance {
  DecoderKind decoder = DecoderKind::yolov2;
  Anchor anchor;
  DecoderVars vars;
  OffsetBounds offsets;
  GroundTruth ground_truth;
};

/// Random anchor, offset box with per-offset widths in [width_min,
/// width_max], and a ground truth placed near the decoded box.
TightnessInstance sample_tightness_instance(std::mt19937_64& rng, DecoderKind decoder, double width_min,
                                            double width_max);

struct TightnessBucket {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
  double improvement_pct = 0.0;  // mean of (w_base - w_opt) / w_base * 100
};

struct TightnessReport {
  std::size_t instances = 0;
  std::size_t dominance_violations = 0;
  std::vector<TightnessBucket> buckets;  // baseline width ranges 0.01-0.10, 0.10-0.20, ..., 0.90-0.99
  TightnessBucket below;                 // baseline width < 0.01
  TightnessBucket above;                 // baseline width >= 0.99
  double mean_improvement_pct = 0.0;
};

/// Instances cycle through the decoders ssd, yolov2, yolov3.
TightnessReport run_tightness(std::size_t n, std::uint64_t seed, double width_min, double width_max);

/// Entry point of the `detcert` executable.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace detcert::cli
