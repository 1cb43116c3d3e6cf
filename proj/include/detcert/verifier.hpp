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
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "detcert/box_geometry.hpp"
#include "detcert/iou_bounds.hpp"
#include "detcert/model.hpp"
#include "detcert/perturbation.hpp"
#include "detcert/propagation.hpp"

namespace detcert {

enum class Status { robust, nonrobust, unknown };
enum class BoundingMethod { optimal, baseline };
enum class ClassVerdict { agree, provably_wrong, ambiguous };

std::string_view to_string(Status s);
std::string_view to_string(BoundingMethod m);
std::string_view to_string(PropagationMethod m);
BoundingMethod bounding_method_from_string(std::string_view name);
PropagationMethod propagation_method_from_string(std::string_view name);

/// Candidate count above which IoU bounding is skipped and the node is split.
inline constexpr std::size_t kMaxCandidates = 32;

struct VerificationQuery {
  std::shared_ptr<const ModelBundle> model;
  Tensor image;
  GroundTruth ground_truth;
  double tau_iou = 0.5;
  double tau_class = 0.15;
  PerturbationSpec perturbation;
  int max_depth = 12;
  double timeout_s = 1800.0;
  BoundingMethod bounding = BoundingMethod::optimal;
  PropagationMethod propagation = PropagationMethod::backsub;
};

class QueryRejected : public std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Rejects malformed queries and images the model already gets wrong.
void validate_query(const VerificationQuery& query);

struct CandidateBox {
  std::size_t box_index = 0;
  Interval conf_bounds;
  std::vector<Interval> class_bounds;
  OffsetBounds offset_bounds;
  IoUInterval iou_bounds;
  /// Class this box provably predicts, if one dominates all others.
  std::optional<int> proven_class;
};

struct HighestBox {
  IoUInterval iou;
  Interval score;
  ClassVerdict class_verdict = ClassVerdict::ambiguous;
  std::vector<CandidateBox> candidates;
  /// Set when the candidate count exceeded kMaxCandidates; `iou` is then [0, 1].
  bool iou_skipped = false;
};

/// Indices b with conf_hi(b) >= max over b' of conf_lo(b').
std::vector<std::size_t> select_candidates(std::span<const Interval> conf_bounds);

HighestBox get_highest_box(const DetectorHead& head, const IntervalTensor& output_bounds, const GroundTruth& g,
                           BoundingMethod bounding, std::size_t max_candidates = kMaxCandidates);

Status decide(const IoUInterval& iou, const Interval& score, ClassVerdict class_verdict, double tau_iou,
              double tau_class);

struct Counterexample {
  double t = 0.0;
  Tensor image;
  Violation violation = Violation::none;
  std::string branch_path;
};

struct BranchRecord {
  std::string path;  // "" for the root, then 'L'/'U' per split
  int depth = 0;
  Interval t_range;
  Status status = Status::unknown;
  std::size_t candidates = 0;
  double propagation_s = 0.0;
  double bounding_s = 0.0;
};

struct Verdict {
  Status status = Status::unknown;
  std::size_t branches_explored = 0;
  int max_depth_reached = 0;
  double wall_time_s = 0.0;
  bool timed_out = false;
  std::optional<Counterexample> counterexample;
  std::vector<BranchRecord> branches;
};

/// Depth-first input-splitting branch and bound over the perturbation
/// parameter. Throws QueryRejected for invalid queries.
Verdict verify(const VerificationQuery& query);

/// Concrete correctness check of one realised image.
Violation check_image(const VerificationQuery& query, const Tensor& image);

}  // namespace detcert
