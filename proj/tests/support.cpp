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

#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <variant>

namespace detcert::testing {

namespace {

LayerSpec activation(std::mt19937_64& rng) {
  if (uniform_int(rng, 0, 1) == 0) return {LeakyReluLayer{0.0, true}, ""};
  return {LeakyReluLayer{uniform(rng, 0.01, 0.3), false}, ""};
}

LayerSpec dense(std::mt19937_64& rng, std::size_t in, std::size_t out) {
  const double scale = 1.5 / std::sqrt(static_cast<double>(in));
  return {DenseLayer{in, out, random_values(rng, in * out, scale), random_values(rng, out, 0.5)}, ""};
}

}  // namespace

ModelBundle random_network(std::mt19937_64& rng) {
  ModelBundle m;
  const std::size_t n_boxes = static_cast<std::size_t>(uniform_int(rng, 1, 3));
  const std::size_t n_out = n_boxes * 6;
  std::size_t flat = 0;
  switch (uniform_int(rng, 0, 2)) {
    case 0: {  // conv -> act -> avgpool -> flatten -> dense -> act -> dense
      const std::size_t c = static_cast<std::size_t>(uniform_int(rng, 1, 2));
      const std::size_t hw = uniform_int(rng, 0, 1) ? 4 : 6;
      const std::size_t oc = static_cast<std::size_t>(uniform_int(rng, 1, 3));
      m.input_shape = {c, hw, hw};
      m.layers.push_back({Conv2dLayer{c, oc, 3, 3, 1, 1, random_values(rng, oc * c * 9, 0.6),
                                      random_values(rng, oc, 0.3)},
                          ""});
      m.layers.push_back(activation(rng));
      m.layers.push_back({AvgPool2dLayer{2, 2}, ""});
      m.layers.push_back({FlattenLayer{}, ""});
      flat = oc * (hw / 2) * (hw / 2);
      const std::size_t h = static_cast<std::size_t>(uniform_int(rng, 4, 64));
      m.layers.push_back(dense(rng, flat, h));
      m.layers.push_back(activation(rng));
      m.layers.push_back(dense(rng, h, n_out));
      break;
    }
    case 1: {  // flatten -> dense -> act -> dense -> act -> dense
      m.input_shape = {1, 3, 3};
      m.layers.push_back({FlattenLayer{}, ""});
      const std::size_t h1 = static_cast<std::size_t>(uniform_int(rng, 4, 64));
      const std::size_t h2 = static_cast<std::size_t>(uniform_int(rng, 4, 64));
      m.layers.push_back(dense(rng, 9, h1));
      m.layers.push_back(activation(rng));
      m.layers.push_back(dense(rng, h1, h2));
      m.layers.push_back(activation(rng));
      m.layers.push_back(dense(rng, h2, n_out));
      break;
    }
    default: {  // conv -> act -> strided conv -> act -> flatten -> dense
      m.input_shape = {1, 6, 6};
      const std::size_t oc = static_cast<std::size_t>(uniform_int(rng, 1, 3));
      m.layers.push_back({Conv2dLayer{1, oc, 3, 3, 1, 0, random_values(rng, oc * 9, 0.6), random_values(rng, oc, 0.3)},
                          ""});
      m.layers.push_back(activation(rng));
      m.layers.push_back({Conv2dLayer{oc, 2, 2, 2, 2, 0, random_values(rng, 2 * oc * 4, 0.6),
                                      random_values(rng, 2, 0.3)},
                          ""});
      m.layers.push_back(activation(rng));
      m.layers.push_back({FlattenLayer{}, ""});
      m.layers.push_back(dense(rng, 2 * 2 * 2, n_out));
      break;
    }
  }
  m.head.decoder = DecoderKind::yolov2;
  m.head.n_classes = 1;
  m.head.anchors.assign(n_boxes, Anchor{0.0, 0.0, 1.0, 1.0, 1.0});
  m.head.layout = box_major_layout(n_boxes, 1);
  validate_model(m);
  return m;
}

GroundTruth toy_ground_truth(std::size_t image) {
  static const double origin[kToyImages][2] = {{0, 0}, {4, 0}, {0, 4}, {4, 4}, {0, 0}, {4, 4}};
  const double x0 = origin[image][0], y0 = origin[image][1];
  return {CornerBox{x0, y0, x0 + 4, y0 + 4}, 0};
}

VerificationQuery toy_query(std::size_t image, PerturbationKind kind, double epsilon, double angle) {
  static const auto model = std::make_shared<const ModelBundle>(load_model(toy_dir() / "model.json"));
  VerificationQuery q;
  q.model = model;
  q.image = load_image(toy_dir() / ("image_" + std::to_string(image) + ".json"));
  q.ground_truth = toy_ground_truth(image);
  q.tau_iou = 0.5;
  q.tau_class = 0.15;
  q.perturbation.kind = kind;
  q.perturbation.epsilon = epsilon;
  q.perturbation.angle_deg = angle;
  q.perturbation.kernel_size = 5;
  q.max_depth = 10;
  q.timeout_s = 60;
  return q;
}

std::vector<double> reference_forward(const ModelBundle& model, const std::vector<double>& input) {
  std::vector<double> x = input;
  std::size_t C = model.input_shape[0], H = model.input_shape[1], W = model.input_shape[2];
  for (const LayerSpec& layer : model.layers) {
    std::vector<double> y;
    if (const auto* d = std::get_if<DenseLayer>(&layer.params)) {
      y.assign(d->out, 0.0);
      for (std::size_t j = 0; j < d->out; ++j) {
        double acc = d->bias[j];
        for (std::size_t i = 0; i < d->in; ++i) acc += d->weights[j * d->in + i] * x[i];
        y[j] = acc;
      }
      C = d->out;
      H = W = 1;
    } else if (const auto* c = std::get_if<Conv2dLayer>(&layer.params)) {
      const std::size_t oh = (H + 2 * c->padding - c->kernel_h) / c->stride + 1;
      const std::size_t ow = (W + 2 * c->padding - c->kernel_w) / c->stride + 1;
      y.assign(c->out_channels * oh * ow, 0.0);
      for (std::size_t o = 0; o < c->out_channels; ++o) {
        for (std::size_t r = 0; r < oh; ++r) {
          for (std::size_t q = 0; q < ow; ++q) {
            double acc = c->bias[o];
            for (std::size_t i = 0; i < c->in_channels; ++i) {
              for (std::size_t a = 0; a < c->kernel_h; ++a) {
                for (std::size_t b = 0; b < c->kernel_w; ++b) {
                  const long yy = static_cast<long>(r * c->stride + a) - static_cast<long>(c->padding);
                  const long xx = static_cast<long>(q * c->stride + b) - static_cast<long>(c->padding);
                  if (yy < 0 || xx < 0 || yy >= static_cast<long>(H) || xx >= static_cast<long>(W)) continue;
                  acc += c->weights[((o * c->in_channels + i) * c->kernel_h + a) * c->kernel_w + b] *
                         x[(i * H + static_cast<std::size_t>(yy)) * W + static_cast<std::size_t>(xx)];
                }
              }
            }
            y[(o * oh + r) * ow + q] = acc;
          }
        }
      }
      C = c->out_channels;
      H = oh;
      W = ow;
    } else if (const auto* p = std::get_if<AvgPool2dLayer>(&layer.params)) {
      const std::size_t oh = (H - p->window) / p->stride + 1, ow = (W - p->window) / p->stride + 1;
      y.assign(C * oh * ow, 0.0);
      for (std::size_t ch = 0; ch < C; ++ch) {
        for (std::size_t r = 0; r < oh; ++r) {
          for (std::size_t q = 0; q < ow; ++q) {
            double acc = 0.0;
            for (std::size_t a = 0; a < p->window; ++a) {
              for (std::size_t b = 0; b < p->window; ++b) acc += x[(ch * H + r * p->stride + a) * W + q * p->stride + b];
            }
            y[(ch * oh + r) * ow + q] = acc / static_cast<double>(p->window * p->window);
          }
        }
      }
      H = oh;
      W = ow;
    } else if (const auto* a = std::get_if<LeakyReluLayer>(&layer.params)) {
      y = x;
      for (double& v : y) v = v >= 0 ? v : a->alpha * v;
    } else {
      y = x;
      C = x.size();
      H = W = 1;
    }
    x = std::move(y);
  }
  return x;
}

}  // namespace detcert::testing
