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

#include "detcert/propagation.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <variant>

namespace detcert {

LinearRelaxation relax_leakyrelu(double l, double u, double alpha) {
  if (!(l <= u)) throw std::invalid_argument("relax_leakyrelu: l > u");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("relax_leakyrelu: alpha outside [0,1]");
  if (u <= 0.0) return {alpha, 0.0, alpha, 0.0};
  if (l >= 0.0) return {1.0, 0.0, 1.0, 0.0};
  LinearRelaxation r;
  r.upper_slope = (u - alpha * l) / (u - l);
  r.upper_intercept = (alpha - 1.0) * l * u / (u - l);
  r.lower_slope = u < -l ? alpha : 1.0;
  r.lower_intercept = 0.0;
  return r;
}

double relaxation_area(double l, double u, double alpha, double lower_slope) {
  if (!(l < 0.0 && u > 0.0)) throw std::invalid_argument("relaxation_area: requires l < 0 < u");
  if (!(lower_slope >= alpha && lower_slope <= 1.0)) {
    throw std::invalid_argument("relaxation_area: lower slope outside [alpha, 1]");
  }
  const double upper = -0.5 * l * u * (1.0 - alpha);
  return upper + 0.5 * l * l * (lower_slope - alpha) + 0.5 * u * u * (1.0 - lower_slope);
}

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

IntervalTensor ibp_layer(const LayerSpec& layer, const Shape& in_shape, const IntervalTensor& x) {
  const Shape out_shape = layer_output_shape(layer, in_shape);
  return std::visit(
      overloaded{
          [&](const DenseLayer& d) { return iv_affine(d.weights, d.out, d.bias, x); },
          [&](const Conv2dLayer& c) {
            const std::size_t H = in_shape[1], W = in_shape[2];
            const std::size_t n = shape_size(out_shape);
            std::vector<double> lo(n), hi(n);
            for (std::size_t oc = 0; oc < out_shape[0]; ++oc) {
              for (std::size_t oy = 0; oy < out_shape[1]; ++oy) {
                for (std::size_t ox = 0; ox < out_shape[2]; ++ox) {
                  double l = c.bias[oc], h = c.bias[oc];
                  for (std::size_t ic = 0; ic < c.in_channels; ++ic) {
                    for (std::size_t ky = 0; ky < c.kernel_h; ++ky) {
                      const long iy = static_cast<long>(oy * c.stride + ky) - static_cast<long>(c.padding);
                      if (iy < 0 || iy >= static_cast<long>(H)) continue;
                      for (std::size_t kx = 0; kx < c.kernel_w; ++kx) {
                        const long ix = static_cast<long>(ox * c.stride + kx) - static_cast<long>(c.padding);
                        if (ix < 0 || ix >= static_cast<long>(W)) continue;
                        const double w =
                            c.weights[((oc * c.in_channels + ic) * c.kernel_h + ky) * c.kernel_w + kx];
                        const std::size_t idx =
                            (ic * H + static_cast<std::size_t>(iy)) * W + static_cast<std::size_t>(ix);
                        if (w >= 0.0) {
                          l += w * x.lo(idx);
                          h += w * x.hi(idx);
                        } else {
                          l += w * x.hi(idx);
                          h += w * x.lo(idx);
                        }
                      }
                    }
                  }
                  const std::size_t o = (oc * out_shape[1] + oy) * out_shape[2] + ox;
                  lo[o] = l;
                  hi[o] = h;
                }
              }
            }
            return IntervalTensor(out_shape, std::move(lo), std::move(hi));
          },
          [&](const AvgPool2dLayer&) {
            // Non-negative weights: the lower (upper) image is the pooled lower (upper) bound.
            return IntervalTensor(out_shape, apply_layer(layer, in_shape, x.lo()),
                                  apply_layer(layer, in_shape, x.hi()));
          },
          [&](const FlattenLayer&) { return x.reshaped(out_shape); },
          [&](const LeakyReluLayer& a) {
            std::vector<double> lo(x.size()), hi(x.size());
            auto f = [alpha = a.alpha](double v) { return v >= 0.0 ? v : alpha * v; };
            for (std::size_t i = 0; i < x.size(); ++i) {
              const Interval r = iv_monotone(f, Monotonicity::increasing, x.at(i));
              lo[i] = r.lo();
              hi[i] = r.hi();
            }
            return IntervalTensor(out_shape, std::move(lo), std::move(hi));
          }},
      layer.params);
}

}  // namespace

std::vector<IntervalTensor> ibp_forward(const ModelBundle& model, const IntervalTensor& input) {
  if (input.size() != model.input_size()) {
    throw std::invalid_argument("ibp_forward: input box has " + std::to_string(input.size()) +
                                " elements, model expects " + std::to_string(model.input_size()));
  }
  std::vector<IntervalTensor> bounds;
  bounds.reserve(model.layers.size() + 1);
  bounds.push_back(input.reshaped(model.shapes.front()));
  for (std::size_t k = 0; k < model.layers.size(); ++k) {
    bounds.push_back(ibp_layer(model.layers[k], model.shapes[k], bounds.back()));
  }
  return bounds;
}

IntervalTensor SymbolicBounds::concretize(const IntervalTensor& input) const {
  const auto n_in = static_cast<Eigen::Index>(input.size());
  if (lower_coeffs.cols() != n_in) throw std::invalid_argument("SymbolicBounds::concretize: input size mismatch");
  const Eigen::Map<const Eigen::VectorXd> xl(input.lo().data(), n_in);
  const Eigen::Map<const Eigen::VectorXd> xu(input.hi().data(), n_in);
  const Eigen::VectorXd lo = lower_coeffs.cwiseMax(0.0) * xl + lower_coeffs.cwiseMin(0.0) * xu + lower_offset;
  const Eigen::VectorXd hi = upper_coeffs.cwiseMax(0.0) * xu + upper_coeffs.cwiseMin(0.0) * xl + upper_offset;
  std::vector<double> l(lo.data(), lo.data() + lo.size()), h(hi.data(), hi.data() + hi.size());
  // Rounding can invert a zero-width row by an ulp.
  for (std::size_t i = 0; i < l.size(); ++i) {
    if (l[i] > h[i]) std::swap(l[i], h[i]);
  }
  const std::size_t n = l.size();
  return IntervalTensor({n}, std::move(l), std::move(h));
}

void layer_as_affine(const LayerSpec& layer, const Shape& in_shape, Eigen::MatrixXd& weights,
                     Eigen::VectorXd& bias) {
  const std::size_t n_in = shape_size(in_shape);
  const std::size_t n_out = shape_size(layer_output_shape(layer, in_shape));
  weights.setZero(static_cast<Eigen::Index>(n_out), static_cast<Eigen::Index>(n_in));
  bias.setZero(static_cast<Eigen::Index>(n_out));
  std::visit(overloaded{[&](const DenseLayer& d) {
                          for (std::size_t j = 0; j < d.out; ++j) {
                            for (std::size_t i = 0; i < d.in; ++i) {
                              weights(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) =
                                  d.weights[j * d.in + i];
                            }
                            bias(static_cast<Eigen::Index>(j)) = d.bias[j];
                          }
                        },
                        [&](const LeakyReluLayer&) {
                          throw std::invalid_argument("layer_as_affine: activation layers are not affine");
                        },
                        [&](const Conv2dLayer& c) {
                          const Shape out = layer_output_shape(layer, in_shape);
                          const std::size_t H = in_shape[1], Wd = in_shape[2];
                          for (std::size_t oc = 0; oc < out[0]; ++oc) {
                            for (std::size_t oy = 0; oy < out[1]; ++oy) {
                              for (std::size_t ox = 0; ox < out[2]; ++ox) {
                                const auto row = static_cast<Eigen::Index>((oc * out[1] + oy) * out[2] + ox);
                                bias(row) = c.bias[oc];
                                for (std::size_t ic = 0; ic < c.in_channels; ++ic) {
                                  for (std::size_t ky = 0; ky < c.kernel_h; ++ky) {
                                    const long iy = static_cast<long>(oy * c.stride + ky) - static_cast<long>(c.padding);
                                    if (iy < 0 || iy >= static_cast<long>(H)) continue;
                                    for (std::size_t kx = 0; kx < c.kernel_w; ++kx) {
                                      const long ix = static_cast<long>(ox * c.stride + kx) - static_cast<long>(c.padding);
                                      if (ix < 0 || ix >= static_cast<long>(Wd)) continue;
                                      const auto col = static_cast<Eigen::Index>(
                                          (ic * H + static_cast<std::size_t>(iy)) * Wd + static_cast<std::size_t>(ix));
                                      weights(row, col) +=
                                          c.weights[((oc * c.in_channels + ic) * c.kernel_h + ky) * c.kernel_w + kx];
                                    }
                                  }
                                }
                              }
                            }
                          }
                        },
                        [&](const AvgPool2dLayer& p) {
                          const Shape out = layer_output_shape(layer, in_shape);
                          const std::size_t H = in_shape[1], Wd = in_shape[2];
                          const double inv = 1.0 / static_cast<double>(p.window * p.window);
                          for (std::size_t c = 0; c < out[0]; ++c) {
                            for (std::size_t oy = 0; oy < out[1]; ++oy) {
                              for (std::size_t ox = 0; ox < out[2]; ++ox) {
                                const auto row = static_cast<Eigen::Index>((c * out[1] + oy) * out[2] + ox);
                                for (std::size_t ky = 0; ky < p.window; ++ky) {
                                  for (std::size_t kx = 0; kx < p.window; ++kx) {
                                    const auto col =
                                        static_cast<Eigen::Index>((c * H + oy * p.stride + ky) * Wd + ox * p.stride + kx);
                                    weights(row, col) += inv;
                                  }
                                }
                              }
                            }
                          }
                        },
                        [&](const FlattenLayer&) { weights.setIdentity(); }},
             layer.params);
}

SymbolicBounds backsubstitute_symbolic(const ModelBundle& model, const std::vector<IntervalTensor>& layer_bounds) {
  if (layer_bounds.size() != model.layers.size() + 1) {
    throw std::invalid_argument("backsubstitute: need bounds for every layer input");
  }
  const auto n_out = static_cast<Eigen::Index>(shape_size(model.shapes.back()));
  Eigen::MatrixXd Au = Eigen::MatrixXd::Identity(n_out, n_out);
  Eigen::MatrixXd Al = Au;
  Eigen::VectorXd cu = Eigen::VectorXd::Zero(n_out);
  Eigen::VectorXd cl = cu;

  Eigen::MatrixXd W;
  Eigen::VectorXd b;
  for (std::size_t k = model.layers.size(); k-- > 0;) {
    const LayerSpec& layer = model.layers[k];
    if (const auto* act = std::get_if<LeakyReluLayer>(&layer.params)) {
      const IntervalTensor& pre = layer_bounds[k];
      for (Eigen::Index j = 0; j < Au.cols(); ++j) {
        const auto idx = static_cast<std::size_t>(j);
        const LinearRelaxation r = relax_leakyrelu(pre.lo(idx), pre.hi(idx), act->alpha);
        for (Eigen::Index i = 0; i < n_out; ++i) {
          const double au = Au(i, j);
          if (au >= 0.0) {
            cu(i) += au * r.upper_intercept;
            Au(i, j) = au * r.upper_slope;
          } else {
            cu(i) += au * r.lower_intercept;
            Au(i, j) = au * r.lower_slope;
          }
          const double al = Al(i, j);
          if (al >= 0.0) {
            cl(i) += al * r.lower_intercept;
            Al(i, j) = al * r.lower_slope;
          } else {
            cl(i) += al * r.upper_intercept;
            Al(i, j) = al * r.upper_slope;
          }
        }
      }
    } else if (std::holds_alternative<FlattenLayer>(layer.params)) {
      continue;
    } else {
      layer_as_affine(layer, model.shapes[k], W, b);
      cu += Au * b;
      cl += Al * b;
      Au = Au * W;
      Al = Al * W;
    }
  }
  return {std::move(Al), std::move(cl), std::move(Au), std::move(cu)};
}

IntervalTensor backsubstitute(const ModelBundle& model, const IntervalTensor& input) {
  const auto bounds = ibp_forward(model, input);
  const SymbolicBounds sym = backsubstitute_symbolic(model, bounds);
  const IntervalTensor flat_in = input.reshaped({input.size()});
  return sym.concretize(flat_in).reshaped(model.shapes.back());
}

IntervalTensor output_bounds(const ModelBundle& model, const IntervalTensor& input, PropagationMethod method) {
  if (method == PropagationMethod::ibp) return ibp_forward(model, input).back();
  return backsubstitute(model, input);
}

}  // namespace detcert
