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

#include "detcert/verifier.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

namespace detcert {

std::string_view to_string(Status s) {
  switch (s) {
    case Status::robust: return "ROBUST";
    case Status::nonrobust: return "NONROBUST";
    case Status::unknown: return "UNKNOWN";
  }
  return "?";
}

std::string_view to_string(BoundingMethod m) { return m == BoundingMethod::optimal ? "optimal" : "baseline"; }

std::string_view to_string(PropagationMethod m) { return m == PropagationMethod::ibp ? "ibp" : "backsub"; }

BoundingMethod bounding_method_from_string(std::string_view name) {
  if (name == "optimal") return BoundingMethod::optimal;
  if (name == "baseline") return BoundingMethod::baseline;
  throw std::invalid_argument("unknown bounding method '" + std::string(name) + "'");
}

PropagationMethod propagation_method_from_string(std::string_view name) {
  if (name == "ibp") return PropagationMethod::ibp;
  if (name == "backsub") return PropagationMethod::backsub;
  throw std::invalid_argument("unknown propagation method '" + std::string(name) + "'");
}

Violation check_image(const VerificationQuery& query, const Tensor& image) {
  return check_prediction(predict(*query.model, image, query.tau_class), query.ground_truth, query.tau_iou);
}

void validate_query(const VerificationQuery& query) {
  if (!query.model) throw QueryRejected("query has no model");
  const ModelBundle& model = *query.model;
  if (query.image.shape != model.input_shape) throw QueryRejected("image shape does not match the model input shape");
  if (!(query.tau_iou > 0.0 && query.tau_iou <= 1.0)) throw QueryRejected("tau_iou must lie in (0, 1]");
  if (!(query.tau_class > 0.0 && query.tau_class < 1.0)) throw QueryRejected("tau_class must lie in (0, 1)");
  if (query.max_depth < 0) throw QueryRejected("max_depth must be non-negative");
  if (!(query.timeout_s > 0.0)) throw QueryRejected("timeout must be positive");
  const int gc = query.ground_truth.class_id;
  if (gc < 0 || static_cast<std::size_t>(gc) >= model.head.n_classes) {
    throw QueryRejected("ground-truth class " + std::to_string(gc) + " is outside the model's classes");
  }
  try {
    validate_ground_truth(query.ground_truth);
    build_input_set(query.image, query.perturbation);
  } catch (const std::invalid_argument& e) {
    throw QueryRejected(e.what());
  }
  const Violation v = check_image(query, query.image);
  if (v != Violation::none) {
    throw QueryRejected("model does not detect the ground truth on the clean image (" +
                        std::string(to_string(v)) + ")");
  }
}

std::vector<std::size_t> select_candidates(std::span<const Interval> conf) {
  std::vector<std::size_t> out;
  if (conf.empty()) return out;
  double max_lower = conf[0].lo();
  for (const Interval& c : conf) max_lower = std::max(max_lower, c.lo());
  for (std::size_t b = 0; b < conf.size(); ++b) {
    if (conf[b].hi() >= max_lower) out.push_back(b);
  }
  return out;
}

namespace {

Interval sigmoid_bounds(const IntervalTensor& t, std::size_t i) {
  return iv_monotone([](double x) { return sigmoid(x); }, Monotonicity::increasing, t.at(i));
}

std::optional<int> dominant_class(const std::vector<Interval>& cls) {
  for (std::size_t c = 0; c < cls.size(); ++c) {
    bool dominates = true;
    for (std::size_t o = 0; o < cls.size() && dominates; ++o) {
      if (o != c && !(cls[c].lo() > cls[o].hi())) dominates = false;
    }
    if (dominates) return static_cast<int>(c);
  }
  return std::nullopt;
}

}  // namespace

HighestBox get_highest_box(const DetectorHead& head, const IntervalTensor& out, const GroundTruth& g,
                           BoundingMethod bounding, std::size_t max_candidates) {
  if (out.size() != head.output_size()) {
    throw std::invalid_argument("output bounds do not match the detector head layout");
  }
  const std::size_t n = head.n_boxes();
  std::vector<Interval> conf(n);
  for (std::size_t b = 0; b < n; ++b) conf[b] = sigmoid_bounds(out, head.layout[b].obj);

  HighestBox result;
  double score_lo = conf[0].lo(), score_hi = conf[0].hi();
  for (const Interval& c : conf) {
    score_lo = std::max(score_lo, c.lo());
    score_hi = std::max(score_hi, c.hi());
  }
  result.score = Interval(score_lo, score_hi);

  const auto indices = select_candidates(conf);
  result.iou_skipped = indices.size() > max_candidates;

  bool all_agree = true, all_wrong = true;
  double iou_lo = 1.0, iou_hi = 0.0;
  for (std::size_t b : indices) {
    const BoxLayout& slots = head.layout[b];
    CandidateBox cand;
    cand.box_index = b;
    cand.conf_bounds = conf[b];
    for (std::size_t k = 0; k < 4; ++k) cand.offset_bounds[k] = out.at(slots.offsets[k]);
    for (std::size_t c : slots.classes) cand.class_bounds.push_back(sigmoid_bounds(out, c));
    cand.proven_class = dominant_class(cand.class_bounds);

    if (!result.iou_skipped) {
      const Anchor& anchor = head.anchors[b];
      if (bounding == BoundingMethod::optimal) {
        cand.iou_bounds = optimal_iou_bounds(
            offset_interval_to_region(head.decoder, cand.offset_bounds, anchor, head.vars), g);
      } else {
        cand.iou_bounds = baseline_iou_bounds(
            offset_interval_to_corners(head.decoder, cand.offset_bounds, anchor, head.vars), g);
      }
    }
    iou_lo = std::min(iou_lo, cand.iou_bounds.lo);
    iou_hi = std::max(iou_hi, cand.iou_bounds.hi);

    const bool agrees = cand.proven_class && *cand.proven_class == g.class_id;
    const bool wrong = cand.proven_class && *cand.proven_class != g.class_id;
    all_agree = all_agree && agrees;
    all_wrong = all_wrong && wrong;
    result.candidates.push_back(std::move(cand));
  }
  result.iou = result.iou_skipped ? IoUInterval{0.0, 1.0} : IoUInterval{iou_lo, iou_hi};
  result.class_verdict = all_agree ? ClassVerdict::agree : all_wrong ? ClassVerdict::provably_wrong : ClassVerdict::ambiguous;
  return result;
}

Status decide(const IoUInterval& iou, const Interval& score, ClassVerdict class_verdict, double tau_iou,
              double tau_class) {
  if (iou.lo >= tau_iou && score.lo() >= tau_class && class_verdict == ClassVerdict::agree) return Status::robust;
  if (iou.hi < tau_iou || score.hi() < tau_class || class_verdict == ClassVerdict::provably_wrong) {
    return Status::nonrobust;
  }
  return Status::unknown;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Node {
  InputSet set;
  std::string path;
  int depth = 0;
};

// Looks for a concrete failure at the midpoint, then the two endpoints.
std::optional<Counterexample> probe(const VerificationQuery& query, const Node& node) {
  const Interval& t = node.set.t_range;
  for (double candidate : {t.mid(), t.lo(), t.hi()}) {
    Tensor image = node.set.realize(candidate);
    const Violation v = check_image(query, image);
    if (v != Violation::none) return Counterexample{candidate, std::move(image), v, node.path};
  }
  return std::nullopt;
}

}  // namespace

Verdict verify(const VerificationQuery& query) {
  validate_query(query);
  const auto start = Clock::now();
  const ModelBundle& model = *query.model;

  Verdict verdict;
  std::vector<Node> stack;
  stack.push_back({build_input_set(query.image, query.perturbation), "", 0});
  bool unresolved = false;

  while (!stack.empty()) {
    if (seconds_since(start) > query.timeout_s) {
      verdict.timed_out = true;
      unresolved = true;
      break;
    }
    Node node = std::move(stack.back());
    stack.pop_back();
    ++verdict.branches_explored;
    verdict.max_depth_reached = std::max(verdict.max_depth_reached, node.depth);

    BranchRecord record;
    record.path = node.path;
    record.depth = node.depth;
    record.t_range = node.set.t_range;

    auto t0 = Clock::now();
    const IntervalTensor bounds = output_bounds(model, concretize(node.set), query.propagation);
    record.propagation_s = seconds_since(t0);
    t0 = Clock::now();
    const HighestBox top = get_highest_box(model.head, bounds, query.ground_truth, query.bounding);
    record.bounding_s = seconds_since(t0);
    record.candidates = top.candidates.size();
    record.status = decide(top.iou, top.score, top.class_verdict, query.tau_iou, query.tau_class);
    verdict.branches.push_back(record);

    if (record.status == Status::robust) continue;

    const bool can_split = node.depth < query.max_depth && !node.set.t_range.degenerate();
    if (record.status == Status::nonrobust || !can_split) {
      // A NONROBUST node should fail everywhere; a leaf that is still
      // UNKNOWN is probed in case it hides a concrete failure.
      if (auto cex = probe(query, node)) {
        verdict.status = Status::nonrobust;
        verdict.counterexample = std::move(cex);
        verdict.wall_time_s = seconds_since(start);
        return verdict;
      }
      if (!can_split) {
        unresolved = true;
        continue;
      }
    }
    auto [lower, upper] = bisect(node.set);
    stack.push_back({std::move(upper), node.path + "U", node.depth + 1});
    stack.push_back({std::move(lower), node.path + "L", node.depth + 1});
  }

  verdict.status = unresolved ? Status::unknown : Status::robust;
  verdict.wall_time_s = seconds_since(start);
  return verdict;
}

}  // namespace detcert
