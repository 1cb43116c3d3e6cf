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

#include <vector>

#include <Eigen/Dense>

#include "detcert/interval.hpp"
#include "detcert/model.hpp"

namespace detcert {

/// Linear envelope of a LeakyReLU over a concrete input interval:
/// lower_slope * x + lower_intercept <= f(x) <= upper_slope * x + upper_intercept.
struct LinearRelaxation {
  double lower_slope = 1.0;
  double lower_intercept = 0.0;
  double upper_slope = 1.0;
  double upper_intercept = 0.0;
};

/// Area-minimising relaxation of max(alpha x, x) on [l, u].
///
/// Stable neurons are exact. For l < 0 < u the upper line is the chord
/// through (l, alpha l) and (u, u), and the lower line passes through the
/// origin with slope alpha when u < |l| and slope 1 otherwise (ties take 1).
LinearRelaxation relax_leakyrelu(double l, double u, double alpha);

/// Area enclosed between the relaxation lines (lower slope `lower_slope`)
/// over [l, u] for a neuron with l < 0 < u.
double relaxation_area(double l, double u, double alpha, double lower_slope);

/// Bounds after every layer; element 0 is the input box.
std::vector<IntervalTensor> ibp_forward(const ModelBundle& model, const IntervalTensor& input);

/// Lower/upper linear functions of the network input bounding every output:
/// lower_coeffs * x + lower_offset <= y <= upper_coeffs * x + upper_offset.
struct SymbolicBounds {
  Eigen::MatrixXd lower_coeffs;
  Eigen::VectorXd lower_offset;
  Eigen::MatrixXd upper_coeffs;
  Eigen::VectorXd upper_offset;

  /// Concrete bounds over the input box (shape {rows}).
  IntervalTensor concretize(const IntervalTensor& input) const;
};

/// Dense matrix form (W, b) of a linear layer (dense, conv2d, avgpool2d,
/// flatten) acting on inputs of `in_shape`. Throws for activations.
void layer_as_affine(const LayerSpec& layer, const Shape& in_shape, Eigen::MatrixXd& weights,
                     Eigen::VectorXd& bias);

/// Back-substitution of the output layer to the input, with activation
/// relaxations instantiated from the supplied per-layer interval bounds
/// (as returned by ibp_forward).
SymbolicBounds backsubstitute_symbolic(const ModelBundle& model,
                                       const std::vector<IntervalTensor>& layer_bounds);

/// Output bounds by back-substitution using IBP intermediate bounds.
IntervalTensor backsubstitute(const ModelBundle& model, const IntervalTensor& input);

enum class PropagationMethod { ibp, backsub };

/// Output-layer bounds with the chosen propagator.
IntervalTensor output_bounds(const ModelBundle& model, const IntervalTensor& input, PropagationMethod method);

}  // namespace detcert
