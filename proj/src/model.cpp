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

#include "detcert/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

namespace detcert {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string shape_str(const Shape& s) {
  std::string out = "(";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s[i]);
  }
  return out + ")";
}

}  // namespace

std::string layer_kind_name(const LayerSpec& layer) {
  return std::visit(overloaded{[](const DenseLayer&) { return std::string("dense"); },
                               [](const Conv2dLayer&) { return std::string("conv2d"); },
                               [](const AvgPool2dLayer&) { return std::string("avgpool2d"); },
                               [](const FlattenLayer&) { return std::string("flatten"); },
                               [](const LeakyReluLayer& a) {
                                 return std::string(a.relu ? "relu" : "leakyrelu");
                               }},
                    layer.params);
}

bool is_activation(const LayerSpec& layer) {
  return std::holds_alternative<LeakyReluLayer>(layer.params);
}

std::vector<BoxLayout> box_major_layout(std::size_t n_boxes, std::size_t n_classes) {
  std::vector<BoxLayout> out(n_boxes);
  const std::size_t stride = 5 + n_classes;
  for (std::size_t i = 0; i < n_boxes; ++i) {
    const std::size_t base = i * stride;
    out[i].offsets = {base, base + 1, base + 2, base + 3};
    out[i].obj = base + 4;
    for (std::size_t c = 0; c < n_classes; ++c) out[i].classes.push_back(base + 5 + c);
  }
  return out;
}

Shape layer_output_shape(const LayerSpec& layer, const Shape& in) {
  const std::size_t n_in = shape_size(in);
  return std::visit(
      overloaded{
          [&](const DenseLayer& d) -> Shape {
            if (d.in != n_in) {
              throw ValidationError("dense layer expects " + std::to_string(d.in) +
                                    " inputs but receives " + shape_str(in));
            }
            return {d.out};
          },
          [&](const Conv2dLayer& c) -> Shape {
            if (in.size() != 3 || in[0] != c.in_channels) {
              throw ValidationError("conv2d expects " + std::to_string(c.in_channels) +
                                    " input channels but receives " + shape_str(in));
            }
            if (c.kernel_h == 0 || c.kernel_w == 0 || c.stride == 0) {
              throw ValidationError("conv2d kernel and stride must be positive");
            }
            const std::size_t hp = in[1] + 2 * c.padding, wp = in[2] + 2 * c.padding;
            if (hp < c.kernel_h || wp < c.kernel_w) throw ValidationError("conv2d kernel larger than input");
            return {c.out_channels, (hp - c.kernel_h) / c.stride + 1, (wp - c.kernel_w) / c.stride + 1};
          },
          [&](const AvgPool2dLayer& p) -> Shape {
            if (in.size() != 3) throw ValidationError("avgpool2d expects a C x H x W input");
            if (p.window == 0 || p.stride == 0) throw ValidationError("avgpool2d window and stride must be positive");
            if (in[1] < p.window || in[2] < p.window) throw ValidationError("avgpool2d window larger than input");
            return {in[0], (in[1] - p.window) / p.stride + 1, (in[2] - p.window) / p.stride + 1};
          },
          [&](const FlattenLayer&) -> Shape { return {n_in}; },
          [&](const LeakyReluLayer&) -> Shape { return in; }},
      layer.params);
}

void validate_model(ModelBundle& model) {
  for (std::size_t d : model.input_shape) {
    if (d == 0) throw ValidationError("input_shape entries must be positive");
  }
  model.shapes.clear();
  model.shapes.push_back({model.input_shape.begin(), model.input_shape.end()});
  for (std::size_t k = 0; k < model.layers.size(); ++k) {
    const LayerSpec& layer = model.layers[k];
    const std::string where = "layer " + std::to_string(k) + " (" + layer_kind_name(layer) + "): ";
    if (const auto* d = std::get_if<DenseLayer>(&layer.params)) {
      if (d->weights.size() != d->in * d->out || d->bias.size() != d->out) {
        throw ValidationError(where + "weight/bias sizes do not match in/out");
      }
    } else if (const auto* c = std::get_if<Conv2dLayer>(&layer.params)) {
      if (c->weights.size() != c->out_channels * c->in_channels * c->kernel_h * c->kernel_w ||
          c->bias.size() != c->out_channels) {
        throw ValidationError(where + "weight/bias sizes do not match kernel shape");
      }
    } else if (const auto* a = std::get_if<LeakyReluLayer>(&layer.params)) {
      if (!(a->alpha >= 0.0 && a->alpha <= 1.0)) throw ValidationError(where + "alpha must lie in [0,1]");
      if (a->relu && a->alpha != 0.0) throw ValidationError(where + "relu must have alpha 0");
    }
    try {
      model.shapes.push_back(layer_output_shape(layer, model.shapes.back()));
    } catch (const ValidationError& e) {
      throw ValidationError(where + e.what());
    }
  }

  DetectorHead& head = model.head;
  if (head.n_classes == 0) throw ValidationError("head: n_classes must be positive");
  if (head.anchors.empty()) throw ValidationError("head: at least one anchor is required");
  for (std::size_t i = 0; i < head.anchors.size(); ++i) {
    try {
      check_decoder_preconditions(head.decoder, head.anchors[i], head.vars);
    } catch (const DecoderError& e) {
      throw ValidationError("head: anchor " + std::to_string(i) + ": " + e.what());
    }
  }
  if (head.box_major) head.layout = box_major_layout(head.n_boxes(), head.n_classes);
  if (head.layout.size() != head.n_boxes()) throw ValidationError("head: layout must list one entry per anchor");

  const std::size_t n_out = shape_size(model.shapes.back());
  if (n_out != head.output_size()) {
    throw ValidationError("final layer produces " + std::to_string(n_out) + " values but the head expects " +
                          std::to_string(head.output_size()));
  }
  std::vector<int> seen(n_out, 0);
  auto mark = [&](std::size_t idx) {
    if (idx >= n_out || seen[idx]++) throw ValidationError("head: layout is not a bijection onto the output");
  };
  for (const BoxLayout& b : head.layout) {
    if (b.classes.size() != head.n_classes) throw ValidationError("head: layout class count mismatch");
    for (std::size_t idx : b.offsets) mark(idx);
    mark(b.obj);
    for (std::size_t idx : b.classes) mark(idx);
  }
}

// ---------------------------------------------------------------------------
// Interchange format

namespace {

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

template <typename T>
T field(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ParseError(where + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(where + ": field '" + key + "': " + e.what());
  }
}

std::size_t count_field(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j.at(key).is_number_integer() || j.at(key).get<long long>() < 0) {
    throw ParseError(where + ": field '" + key + "' must be a non-negative integer");
  }
  return j.at(key).get<std::size_t>();
}

// Weights followed by bias, either inline or from the named blob.
void read_weights(const json& j, const std::filesystem::path& dir, std::size_t n_weights,
                  std::size_t n_bias, std::vector<double>& weights, std::vector<double>& bias,
                  std::string& blob, const std::string& where) {
  if (j.value("inline", false)) {
    weights = field<std::vector<double>>(j, "weights", where);
    bias = field<std::vector<double>>(j, "bias", where);
    return;
  }
  blob = field<std::string>(j, "blob", where);
  const auto values = read_f32_blob(dir / blob);
  if (values.size() != n_weights + n_bias) {
    throw ValidationError(where + ": blob " + blob + " holds " + std::to_string(values.size()) +
                          " floats, expected " + std::to_string(n_weights + n_bias));
  }
  weights.assign(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(n_weights));
  bias.assign(values.begin() + static_cast<std::ptrdiff_t>(n_weights), values.end());
}

LayerSpec parse_layer(const json& j, const std::filesystem::path& dir, std::size_t idx) {
  const std::string where = "layers[" + std::to_string(idx) + "]";
  if (!j.is_object()) throw ParseError(where + ": expected an object");
  const auto kind = field<std::string>(j, "kind", where);
  LayerSpec spec;
  if (kind == "dense") {
    DenseLayer d;
    d.in = count_field(j, "in", where);
    d.out = count_field(j, "out", where);
    read_weights(j, dir, d.in * d.out, d.out, d.weights, d.bias, spec.blob, where);
    spec.params = std::move(d);
  } else if (kind == "conv2d") {
    Conv2dLayer c;
    c.in_channels = count_field(j, "in_channels", where);
    c.out_channels = count_field(j, "out_channels", where);
    const auto kernel = field<std::vector<std::size_t>>(j, "kernel", where);
    if (kernel.size() != 2) throw ParseError(where + ": kernel must be [kh, kw]");
    c.kernel_h = kernel[0];
    c.kernel_w = kernel[1];
    c.stride = j.contains("stride") ? count_field(j, "stride", where) : 1;
    c.padding = j.contains("padding") ? count_field(j, "padding", where) : 0;
    read_weights(j, dir, c.out_channels * c.in_channels * c.kernel_h * c.kernel_w, c.out_channels,
                 c.weights, c.bias, spec.blob, where);
    spec.params = std::move(c);
  } else if (kind == "avgpool2d") {
    AvgPool2dLayer p;
    p.window = count_field(j, "window", where);
    p.stride = j.contains("stride") ? count_field(j, "stride", where) : p.window;
    spec.params = p;
  } else if (kind == "flatten") {
    spec.params = FlattenLayer{};
  } else if (kind == "relu") {
    spec.params = LeakyReluLayer{0.0, true};
  } else if (kind == "leakyrelu") {
    spec.params = LeakyReluLayer{field<double>(j, "alpha", where), false};
  } else {
    throw ValidationError(where + ": unsupported layer kind '" + kind + "'");
  }
  return spec;
}

DetectorHead parse_head(const json& j) {
  const std::string where = "head";
  if (!j.is_object()) throw ParseError("missing 'head' object");
  DetectorHead head;
  try {
    head.decoder = decoder_kind_from_string(field<std::string>(j, "decoder", where));
  } catch (const std::invalid_argument& e) {
    throw ValidationError(std::string("head: ") + e.what());
  }
  head.n_classes = count_field(j, "n_classes", where);
  if (head.decoder == DecoderKind::ssd) {
    head.vars.var1 = field<double>(j, "var1", where);
    head.vars.var2 = field<double>(j, "var2", where);
  }
  const json& anchors = j.contains("anchors") ? j.at("anchors") : json();
  if (!anchors.is_array()) throw ParseError("head: 'anchors' must be an array");
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    const std::string aw = where + ".anchors[" + std::to_string(i) + "]";
    const auto p = field<std::vector<double>>(anchors[i], "p", aw);
    if (p.size() != 4) throw ParseError(aw + ": 'p' must hold four numbers");
    Anchor a{p[0], p[1], p[2], p[3], 1.0};
    if (head.decoder != DecoderKind::ssd) a.scale = field<double>(anchors[i], "stride", aw);
    head.anchors.push_back(a);
  }
  const json layout = j.value("layout", json{{"kind", "box_major"}});
  const auto lk = field<std::string>(layout, "kind", "head.layout");
  if (lk == "box_major") {
    head.box_major = true;
  } else if (lk == "explicit") {
    head.box_major = false;
    const json& boxes = layout.contains("boxes") ? layout.at("boxes") : json();
    if (!boxes.is_array()) throw ParseError("head.layout: 'boxes' must be an array");
    for (const json& b : boxes) {
      BoxLayout bl;
      const auto off = field<std::vector<std::size_t>>(b, "offsets", "head.layout");
      if (off.size() != 4) throw ParseError("head.layout: 'offsets' must hold four indices");
      std::copy(off.begin(), off.end(), bl.offsets.begin());
      bl.obj = field<std::size_t>(b, "obj", "head.layout");
      bl.classes = field<std::vector<std::size_t>>(b, "classes", "head.layout");
      head.layout.push_back(std::move(bl));
    }
  } else {
    throw ParseError("head.layout: unknown kind '" + lk + "'");
  }
  return head;
}

}  // namespace

ModelBundle load_model(const std::filesystem::path& path) {
  const json j = read_json_file(path);
  if (!j.is_object()) throw ParseError(path.string() + ": expected a JSON object");
  const auto dir = path.parent_path();
  ModelBundle model;
  const auto in_shape = field<std::vector<std::size_t>>(j, "input_shape", "model");
  if (in_shape.size() != 3) throw ValidationError("input_shape must be [C,H,W]");
  std::copy(in_shape.begin(), in_shape.end(), model.input_shape.begin());
  const json& layers = j.contains("layers") ? j.at("layers") : json();
  if (!layers.is_array()) throw ParseError("model: 'layers' must be an array");
  for (std::size_t k = 0; k < layers.size(); ++k) model.layers.push_back(parse_layer(layers[k], dir, k));
  model.head = parse_head(j.contains("head") ? j.at("head") : json());
  validate_model(model);
  return model;
}

namespace {

ordered_json layer_to_json(const LayerSpec& layer) {
  ordered_json j;
  j["kind"] = layer_kind_name(layer);
  auto put_weights = [&](const std::vector<double>& w, const std::vector<double>& b) {
    if (layer.blob.empty()) {
      j["inline"] = true;
      j["weights"] = w;
      j["bias"] = b;
    } else {
      j["blob"] = layer.blob;
    }
  };
  std::visit(overloaded{[&](const DenseLayer& d) {
                          j["in"] = d.in;
                          j["out"] = d.out;
                          put_weights(d.weights, d.bias);
                        },
                        [&](const Conv2dLayer& c) {
                          j["in_channels"] = c.in_channels;
                          j["out_channels"] = c.out_channels;
                          j["kernel"] = {c.kernel_h, c.kernel_w};
                          j["stride"] = c.stride;
                          j["padding"] = c.padding;
                          put_weights(c.weights, c.bias);
                        },
                        [&](const AvgPool2dLayer& p) {
                          j["window"] = p.window;
                          j["stride"] = p.stride;
                        },
                        [&](const FlattenLayer&) {},
                        [&](const LeakyReluLayer& a) {
                          if (!a.relu) j["alpha"] = a.alpha;
                        }},
             layer.params);
  return j;
}

ordered_json model_to_json(const ModelBundle& model) {
  ordered_json j;
  j["format_version"] = 1;
  j["input_shape"] = model.input_shape;
  j["layers"] = ordered_json::array();
  for (const auto& layer : model.layers) j["layers"].push_back(layer_to_json(layer));
  const DetectorHead& h = model.head;
  ordered_json head;
  head["decoder"] = std::string(to_string(h.decoder));
  head["n_classes"] = h.n_classes;
  if (h.decoder == DecoderKind::ssd) {
    head["var1"] = h.vars.var1;
    head["var2"] = h.vars.var2;
  }
  head["anchors"] = ordered_json::array();
  for (const Anchor& a : h.anchors) {
    ordered_json aj;
    aj["p"] = {a.p0, a.p1, a.p2, a.p3};
    if (h.decoder != DecoderKind::ssd) aj["stride"] = a.scale;
    head["anchors"].push_back(aj);
  }
  if (h.box_major) {
    head["layout"] = {{"kind", "box_major"}};
  } else {
    ordered_json boxes = ordered_json::array();
    for (const BoxLayout& b : h.layout) {
      boxes.push_back({{"offsets", b.offsets}, {"obj", b.obj}, {"classes", b.classes}});
    }
    head["layout"] = {{"kind", "explicit"}, {"boxes", boxes}};
  }
  j["head"] = head;
  return j;
}

}  // namespace

std::string model_to_json_string(const ModelBundle& model) { return model_to_json(model).dump(2); }

void save_model(const ModelBundle& model, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& layer : model.layers) {
    if (layer.blob.empty()) continue;
    std::vector<double> values;
    std::visit(overloaded{[&](const DenseLayer& d) {
                            values = d.weights;
                            values.insert(values.end(), d.bias.begin(), d.bias.end());
                          },
                          [&](const Conv2dLayer& c) {
                            values = c.weights;
                            values.insert(values.end(), c.bias.begin(), c.bias.end());
                          },
                          [](const auto&) {}},
               layer.params);
    write_f32_blob(dir / layer.blob, values);
  }
  std::ofstream out(dir / "model.json");
  if (!out) throw ParseError("cannot write " + (dir / "model.json").string());
  out << model_to_json_string(model) << '\n';
}

// ---------------------------------------------------------------------------
// Reference forward pass

std::vector<double> apply_layer(const LayerSpec& layer, const Shape& in_shape, std::span<const double> x) {
  return std::visit(
      overloaded{
          [&](const DenseLayer& d) {
            std::vector<double> y(d.out);
            for (std::size_t j = 0; j < d.out; ++j) {
              double acc = d.bias[j];
              const double* w = d.weights.data() + j * d.in;
              for (std::size_t i = 0; i < d.in; ++i) acc += w[i] * x[i];
              y[j] = acc;
            }
            return y;
          },
          [&](const Conv2dLayer& c) {
            const Shape out = layer_output_shape(layer, in_shape);
            const std::size_t H = in_shape[1], W = in_shape[2];
            std::vector<double> y(shape_size(out));
            for (std::size_t oc = 0; oc < out[0]; ++oc) {
              for (std::size_t oy = 0; oy < out[1]; ++oy) {
                for (std::size_t ox = 0; ox < out[2]; ++ox) {
                  double acc = c.bias[oc];
                  for (std::size_t ic = 0; ic < c.in_channels; ++ic) {
                    for (std::size_t ky = 0; ky < c.kernel_h; ++ky) {
                      const long iy = static_cast<long>(oy * c.stride + ky) - static_cast<long>(c.padding);
                      if (iy < 0 || iy >= static_cast<long>(H)) continue;
                      for (std::size_t kx = 0; kx < c.kernel_w; ++kx) {
                        const long ix = static_cast<long>(ox * c.stride + kx) - static_cast<long>(c.padding);
                        if (ix < 0 || ix >= static_cast<long>(W)) continue;
                        const double w =
                            c.weights[((oc * c.in_channels + ic) * c.kernel_h + ky) * c.kernel_w + kx];
                        acc += w * x[(ic * H + static_cast<std::size_t>(iy)) * W + static_cast<std::size_t>(ix)];
                      }
                    }
                  }
                  y[(oc * out[1] + oy) * out[2] + ox] = acc;
                }
              }
            }
            return y;
          },
          [&](const AvgPool2dLayer& p) {
            const Shape out = layer_output_shape(layer, in_shape);
            const std::size_t H = in_shape[1], W = in_shape[2];
            const double inv = 1.0 / static_cast<double>(p.window * p.window);
            std::vector<double> y(shape_size(out));
            for (std::size_t c = 0; c < out[0]; ++c) {
              for (std::size_t oy = 0; oy < out[1]; ++oy) {
                for (std::size_t ox = 0; ox < out[2]; ++ox) {
                  double acc = 0.0;
                  for (std::size_t ky = 0; ky < p.window; ++ky) {
                    for (std::size_t kx = 0; kx < p.window; ++kx) {
                      acc += x[(c * H + oy * p.stride + ky) * W + ox * p.stride + kx];
                    }
                  }
                  y[(c * out[1] + oy) * out[2] + ox] = acc * inv;
                }
              }
            }
            return y;
          },
          [&](const FlattenLayer&) { return std::vector<double>(x.begin(), x.end()); },
          [&](const LeakyReluLayer& a) {
            std::vector<double> y(x.begin(), x.end());
            for (double& v : y) v = v >= 0.0 ? v : a.alpha * v;
            return y;
          }},
      layer.params);
}

std::vector<std::vector<double>> forward_layers(const ModelBundle& model, const Tensor& image) {
  if (image.shape != model.input_shape) {
    throw ValidationError("image shape does not match the model input shape");
  }
  std::vector<std::vector<double>> acts;
  acts.reserve(model.layers.size() + 1);
  acts.push_back(image.data);
  for (std::size_t k = 0; k < model.layers.size(); ++k) {
    acts.push_back(apply_layer(model.layers[k], model.shapes[k], acts.back()));
  }
  return acts;
}

std::vector<double> forward(const ModelBundle& model, const Tensor& image) {
  return std::move(forward_layers(model, image).back());
}

CornerBox decode_box(const DetectorHead& head, std::size_t box, std::span<const double> logits) {
  const BoxLayout& l = head.layout[box];
  const Offsets o{logits[l.offsets[0]], logits[l.offsets[1]], logits[l.offsets[2]], logits[l.offsets[3]]};
  return h_map(decode(head.decoder, o, head.anchors[box], head.vars));
}

std::optional<Detection> predict_from_logits(const DetectorHead& head, std::span<const double> logits,
                                             double tau_class) {
  std::size_t best = 0;
  double best_conf = -1.0;
  for (std::size_t i = 0; i < head.n_boxes(); ++i) {
    const double conf = sigmoid(logits[head.layout[i].obj]);
    if (conf > best_conf) {
      best_conf = conf;
      best = i;
    }
  }
  if (best_conf < tau_class) return std::nullopt;
  const BoxLayout& l = head.layout[best];
  int cls = 0;
  double cls_score = -1.0;
  for (std::size_t c = 0; c < l.classes.size(); ++c) {
    const double s = sigmoid(logits[l.classes[c]]);
    if (s > cls_score) {
      cls_score = s;
      cls = static_cast<int>(c);
    }
  }
  return Detection{best, decode_box(head, best, logits), cls, best_conf};
}

std::optional<Detection> predict(const ModelBundle& model, const Tensor& image, double tau_class) {
  return predict_from_logits(model.head, forward(model, image), tau_class);
}

std::string_view to_string(Violation v) {
  switch (v) {
    case Violation::none: return "none";
    case Violation::no_detection: return "no_detection";
    case Violation::wrong_class: return "wrong_class";
    case Violation::low_iou: return "low_iou";
  }
  return "?";
}

Violation check_prediction(const std::optional<Detection>& det, const GroundTruth& g, double tau_iou) {
  if (!det) return Violation::no_detection;
  if (det->class_id != g.class_id) return Violation::wrong_class;
  if (iou(det->box, g.box) < tau_iou) return Violation::low_iou;
  return Violation::none;
}

}  // namespace detcert
