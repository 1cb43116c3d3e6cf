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

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "detcert/box_geometry.hpp"
#include "detcert/tensor.hpp"

namespace detcert {

using Shape = std::vector<std::size_t>;

struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> weights;  // out x in, row-major
  std::vector<double> bias;     // out
};

struct Conv2dLayer {
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t kernel_h = 0;
  std::size_t kernel_w = 0;
  std::size_t stride = 1;
  std::size_t padding = 0;      // zero padding on every side
  std::vector<double> weights;  // [out_ch, in_ch, kh, kw]
  std::vector<double> bias;     // out_ch
};

struct AvgPool2dLayer {
  std::size_t window = 2;
  std::size_t stride = 2;
};

struct FlattenLayer {};

/// max(alpha * x, x); plain ReLU is alpha == 0 with `relu` set so the
/// interchange file round-trips.
struct LeakyReluLayer {
  double alpha = 0.0;
  bool relu = false;
};

using LayerParams = std::variant<DenseLayer, Conv2dLayer, AvgPool2dLayer, FlattenLayer, LeakyReluLayer>;

struct LayerSpec {
  LayerParams params;
  /// Name of the sibling weight blob; empty means weights are inline JSON.
  std::string blob;
};

std::string layer_kind_name(const LayerSpec& layer);
bool is_activation(const LayerSpec& layer);

/// Output slot fields of one predicted box in the flat network output.
struct BoxLayout {
  std::array<std::size_t, 4> offsets{};
  std::size_t obj = 0;
  std::vector<std::size_t> classes;
};

struct DetectorHead {
  DecoderKind decoder = DecoderKind::yolov2;
  std::size_t n_classes = 1;
  DecoderVars vars;
  std::vector<Anchor> anchors;
  std::vector<BoxLayout> layout;
  /// True when the layout was given as the compact box-major form
  /// [o0 o1 o2 o3 obj c0 .. c{n-1}] per box.
  bool box_major = true;

  std::size_t n_boxes() const { return anchors.size(); }
  std::size_t output_size() const { return n_boxes() * (5 + n_classes); }
};

std::vector<BoxLayout> box_major_layout(std::size_t n_boxes, std::size_t n_classes);

struct ModelBundle {
  std::array<std::size_t, 3> input_shape{};
  std::vector<LayerSpec> layers;
  DetectorHead head;
  /// shapes[k] is the input shape of layer k; shapes.back() is the output shape.
  std::vector<Shape> shapes;

  std::size_t input_size() const { return input_shape[0] * input_shape[1] * input_shape[2]; }
};

/// Checks every structural invariant and fills `shapes`. Throws ValidationError.
void validate_model(ModelBundle& model);

ModelBundle load_model(const std::filesystem::path& path);
/// Writes `model.json` (and any weight blobs) into `dir`.
void save_model(const ModelBundle& model, const std::filesystem::path& dir);

std::string model_to_json_string(const ModelBundle& model);

/// Output shape of `layer` applied to `in`; throws ValidationError on mismatch.
Shape layer_output_shape(const LayerSpec& layer, const Shape& in);

/// Concrete evaluation of one layer.
std::vector<double> apply_layer(const LayerSpec& layer, const Shape& in_shape,
                                std::span<const double> x);

/// Activations after every layer; element 0 is the input itself.
std::vector<std::vector<double>> forward_layers(const ModelBundle& model, const Tensor& image);

/// Raw output logits in head-layout order.
std::vector<double> forward(const ModelBundle& model, const Tensor& image);

struct Detection {
  std::size_t box_index = 0;
  CornerBox box;
  int class_id = 0;
  double confidence = 0.0;
};

/// Highest-confidence box (confidence = sigmoid of the objectness logit),
/// returned only if that confidence reaches `tau_class`. Ties go to the
/// lowest box index, as do ties between class scores.
std::optional<Detection> predict_from_logits(const DetectorHead& head, std::span<const double> logits,
                                             double tau_class);
std::optional<Detection> predict(const ModelBundle& model, const Tensor& image, double tau_class);

CornerBox decode_box(const DetectorHead& head, std::size_t box, std::span<const double> logits);

/// Which correctness condition a prediction breaks, if any.
enum class Violation { none, no_detection, wrong_class, low_iou };

std::string_view to_string(Violation v);

Violation check_prediction(const std::optional<Detection>& det, const GroundTruth& g, double tau_iou);

}  // namespace detcert
