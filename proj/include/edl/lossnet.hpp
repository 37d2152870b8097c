// Copyright 2026 The EDL Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// The learned loss network L(p, y) = MLP([p, e_y]).
//
// Architecture: 2C -> 10 -> 20 -> 20 -> 1, Softplus after every layer
// (including the output head, so L >= 0).
//
// Flat parameter layout, layer by layer:
//   W_l  row-major, shape (out, in): W_l[o][i] at offset + o * in + i
//   b_l  length out
// Every other component (mutation, checkpoints, gradients) relies on this
// order.

#ifndef EDL_LOSSNET_HPP_
#define EDL_LOSSNET_HPP_

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "edl/probspace.hpp"
#include "edl/rng.hpp"

namespace edl {

inline constexpr const char* kActivationName = "softplus";

/// Overflow-safe softplus: max(x, 0) + log1p(exp(-|x|)).
inline double softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

/// d/dx softplus(x) = sigmoid(x), computed without overflow.
inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

struct LossNetParams {
  std::size_t class_count = 0;
  std::vector<std::size_t> layer_dims;
  std::vector<double> flat;

  std::size_t layer_count() const { return layer_dims.size() - 1; }
  /// Offset of W_l in `flat`; b_l follows at weight_offset(l) + out * in.
  std::size_t weight_offset(std::size_t layer) const;
};

struct LossGradients {
  std::vector<double> d_params;
  std::vector<double> d_input;  // length 2C: [d/dp, d/de_y]
};

/// Standard layer widths for a class count: {2C, 10, 20, 20, 1}.
std::vector<std::size_t> default_layer_dims(std::size_t c);

/// Number of weights and biases implied by the layer widths.
std::size_t param_count(std::span<const std::size_t> dims);

/// All-zero network (constant output softplus(0) = ln 2).
LossNetParams zero_params(std::size_t c);

/// Weights ~ N(0, (scale / sqrt(fan_in))^2), biases zero.
LossNetParams init_params(std::size_t c, Rng& rng, double scale = 1.0);

/// Throws std::invalid_argument if the shape invariants do not hold.
void validate(const LossNetParams& params);

double forward(const LossNetParams& params, const ProbLabelPair& pair);

/// Exact gradients of upstream * forward(params, pair).
LossGradients backward(const LossNetParams& params, const ProbLabelPair& pair,
                       double upstream);

/// Same gradients, added into caller-owned buffers. `d_input` may be empty.
void accumulate_backward(const LossNetParams& params, const ProbLabelPair& pair, double upstream,
                         std::span<double> d_params, std::span<double> d_input = {});

/// Per-layer weight matrix and bias views of a flat vector.
struct LayerView {
  std::span<const double> weights;  // out x in, row-major
  std::span<const double> bias;
  std::size_t in = 0;
  std::size_t out = 0;
};
std::vector<LayerView> unflatten(const LossNetParams& params);

/// Inverse of unflatten: concatenates per-layer (weights, bias) blocks.
std::vector<double> flatten(std::span<const LayerView> layers);

}  // namespace edl

#endif  // EDL_LOSSNET_HPP_
