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

#include "edl/lossnet.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace edl {

namespace {

void check_pair(const LossNetParams& params, const ProbLabelPair& pair) {
  if (pair.class_count() != params.class_count) {
    throw std::invalid_argument("class count mismatch: network expects " +
                                std::to_string(params.class_count) + ", pair has " +
                                std::to_string(pair.class_count()));
  }
  if (pair.y >= pair.class_count()) throw std::invalid_argument("label out of range");
}

// First-layer pre-activation. The one-hot half of the input selects a single
// weight column, so only the p half needs a dot product.
void first_layer(const LossNetParams& params, const ProbLabelPair& pair,
                 std::span<double> z) {
  const std::size_t in = params.layer_dims[0];
  const std::size_t out = params.layer_dims[1];
  const std::size_t c = params.class_count;
  const double* w = params.flat.data();
  const double* b = w + out * in;
  const double* p = pair.p.data();
  for (std::size_t o = 0; o < out; ++o) {
    const double* row = w + o * in;
    double s = b[o] + row[c + pair.y];
    for (std::size_t i = 0; i < c; ++i) s += row[i] * p[i];
    z[o] = s;
  }
}

}  // namespace

std::size_t LossNetParams::weight_offset(std::size_t layer) const {
  std::size_t off = 0;
  for (std::size_t l = 0; l < layer; ++l) {
    off += layer_dims[l] * layer_dims[l + 1] + layer_dims[l + 1];
  }
  return off;
}

std::vector<std::size_t> default_layer_dims(std::size_t c) {
  return {2 * c, 10, 20, 20, 1};
}

std::size_t param_count(std::span<const std::size_t> dims) {
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) n += dims[l] * dims[l + 1] + dims[l + 1];
  return n;
}

LossNetParams zero_params(std::size_t c) {
  if (c < 2) throw std::invalid_argument("class count must be at least 2");
  LossNetParams params;
  params.class_count = c;
  params.layer_dims = default_layer_dims(c);
  params.flat.assign(param_count(params.layer_dims), 0.0);
  return params;
}

LossNetParams init_params(std::size_t c, Rng& rng, double scale) {
  if (!(scale > 0.0)) throw std::invalid_argument("init scale must be positive");
  LossNetParams params = zero_params(c);
  std::size_t off = 0;
  for (std::size_t l = 0; l < params.layer_count(); ++l) {
    const std::size_t in = params.layer_dims[l];
    const std::size_t out = params.layer_dims[l + 1];
    const double sd = scale / std::sqrt(static_cast<double>(in));
    for (std::size_t k = 0; k < in * out; ++k) params.flat[off + k] = sd * standard_normal(rng);
    off += in * out + out;
  }
  return params;
}

void validate(const LossNetParams& params) {
  const auto& dims = params.layer_dims;
  if (params.class_count < 2) throw std::invalid_argument("class_count must be at least 2");
  if (dims.size() < 2) throw std::invalid_argument("layer_dims needs at least two entries");
  if (dims.front() != 2 * params.class_count) {
    throw std::invalid_argument("layer_dims[0] must equal 2 * class_count");
  }
  if (dims.back() != 1) throw std::invalid_argument("last layer width must be 1");
  if (std::find(dims.begin(), dims.end(), std::size_t{0}) != dims.end()) {
    throw std::invalid_argument("layer widths must be positive");
  }
  if (params.flat.size() != param_count(dims)) {
    throw std::invalid_argument("flat length " + std::to_string(params.flat.size()) +
                                " does not match layer_dims (expected " +
                                std::to_string(param_count(dims)) + ")");
  }
}

double forward(const LossNetParams& params, const ProbLabelPair& pair) {
  check_pair(params, pair);
  thread_local std::vector<double> cur, next;
  const auto& dims = params.layer_dims;

  cur.resize(dims[1]);
  first_layer(params, pair, cur);
  for (double& v : cur) v = softplus(v);

  std::size_t off = dims[0] * dims[1] + dims[1];
  for (std::size_t l = 1; l < params.layer_count(); ++l) {
    const std::size_t in = dims[l];
    const std::size_t out = dims[l + 1];
    const double* w = params.flat.data() + off;
    const double* b = w + in * out;
    next.resize(out);
    for (std::size_t o = 0; o < out; ++o) {
      const double* row = w + o * in;
      double s = b[o];
      for (std::size_t i = 0; i < in; ++i) s += row[i] * cur[i];
      next[o] = softplus(s);
    }
    cur.swap(next);
    off += in * out + out;
  }
  return cur[0];
}

void accumulate_backward(const LossNetParams& params, const ProbLabelPair& pair, double upstream,
                         std::span<double> d_params, std::span<double> d_input) {
  check_pair(params, pair);
  if (d_params.size() != params.flat.size()) {
    throw std::invalid_argument("accumulate_backward: gradient buffer has the wrong length");
  }
  const auto& dims = params.layer_dims;
  const std::size_t n_layers = params.layer_count();
  const std::size_t c = params.class_count;

  // acts[l] is the input to layer l; pre[l] its pre-activation output.
  thread_local std::vector<std::vector<double>> acts, pre;
  thread_local std::vector<std::size_t> offsets;
  thread_local std::vector<double> delta, grad_in;
  acts.resize(n_layers + 1);
  pre.resize(n_layers);
  offsets.resize(n_layers);
  acts[0].assign(2 * c, 0.0);
  std::copy(pair.p.begin(), pair.p.end(), acts[0].begin());
  acts[0][c + pair.y] = 1.0;

  std::size_t off = 0;
  for (std::size_t l = 0; l < n_layers; ++l) {
    offsets[l] = off;
    const std::size_t in = dims[l];
    const std::size_t out = dims[l + 1];
    const double* w = params.flat.data() + off;
    const double* b = w + in * out;
    pre[l].resize(out);
    acts[l + 1].resize(out);
    for (std::size_t o = 0; o < out; ++o) {
      double s = b[o];
      for (std::size_t i = 0; i < in; ++i) s += w[o * in + i] * acts[l][i];
      pre[l][o] = s;
      acts[l + 1][o] = softplus(s);
    }
    off += in * out + out;
  }

  delta.assign(1, upstream * sigmoid(pre[n_layers - 1][0]));
  for (std::size_t l = n_layers; l-- > 0;) {
    const std::size_t in = dims[l];
    const std::size_t out = dims[l + 1];
    const double* w = params.flat.data() + offsets[l];
    double* dw = d_params.data() + offsets[l];
    double* db = dw + in * out;
    grad_in.assign(in, 0.0);
    for (std::size_t o = 0; o < out; ++o) {
      db[o] += delta[o];
      for (std::size_t i = 0; i < in; ++i) {
        dw[o * in + i] += delta[o] * acts[l][i];
        grad_in[i] += w[o * in + i] * delta[o];
      }
    }
    if (l == 0) {
      for (std::size_t i = 0; i < std::min(in, d_input.size()); ++i) d_input[i] += grad_in[i];
    } else {
      delta.resize(in);
      for (std::size_t i = 0; i < in; ++i) delta[i] = grad_in[i] * sigmoid(pre[l - 1][i]);
    }
  }
}

LossGradients backward(const LossNetParams& params, const ProbLabelPair& pair,
                       double upstream) {
  LossGradients grads;
  grads.d_params.assign(params.flat.size(), 0.0);
  grads.d_input.assign(2 * params.class_count, 0.0);
  accumulate_backward(params, pair, upstream, grads.d_params, grads.d_input);
  return grads;
}

std::vector<LayerView> unflatten(const LossNetParams& params) {
  std::vector<LayerView> layers;
  std::span<const double> flat(params.flat);
  std::size_t off = 0;
  for (std::size_t l = 0; l < params.layer_count(); ++l) {
    LayerView v;
    v.in = params.layer_dims[l];
    v.out = params.layer_dims[l + 1];
    v.weights = flat.subspan(off, v.in * v.out);
    v.bias = flat.subspan(off + v.in * v.out, v.out);
    off += v.in * v.out + v.out;
    layers.push_back(v);
  }
  return layers;
}

std::vector<double> flatten(std::span<const LayerView> layers) {
  std::vector<double> flat;
  for (const LayerView& v : layers) {
    flat.insert(flat.end(), v.weights.begin(), v.weights.end());
    flat.insert(flat.end(), v.bias.begin(), v.bias.end());
  }
  return flat;
}

}  // namespace edl
