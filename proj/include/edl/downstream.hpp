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

// Small downstream check for a learned loss: a linear softmax classifier on
// Gaussian blobs, trained either through the frozen loss network or through
// cross-entropy.
//
// For the learned loss the logit gradient is the chain rule through softmax,
//   dL/dz = p * (g - <p, g>),   g = dL/dp  (the p block of d_input),
// with the one-hot label block held constant.

#ifndef EDL_DOWNSTREAM_HPP_
#define EDL_DOWNSTREAM_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "edl/lossnet.hpp"
#include "edl/rng.hpp"

namespace edl {

struct BlobConfig {
  std::size_t class_count = 10;
  std::size_t dim = 10;
  std::size_t points_per_class = 200;
  double mean_scale = 4.0;  // class means ~ N(0, mean_scale^2 I)
  double spread = 1.0;      // isotropic std around each mean
  std::uint64_t seed = 0;
};

struct BlobDataset {
  std::size_t class_count = 0;
  std::size_t dim = 0;
  std::vector<std::vector<double>> features;
  std::vector<std::size_t> labels;
  std::vector<std::vector<double>> means;
  std::vector<double> spreads;
  std::uint64_t seed = 0;

  std::size_t size() const { return labels.size(); }
};

BlobDataset make_blobs(const BlobConfig& cfg);

struct LinearClassifier {
  std::size_t dim = 0;
  std::size_t class_count = 0;
  std::vector<double> weights;  // dim x class_count, row-major
  std::vector<double> bias;

  std::vector<double> logits(std::span<const double> x) const;
};

/// Cross-entropy when `learned` is empty, otherwise the frozen loss network.
struct TrainingLoss {
  std::optional<LossNetParams> learned;

  static TrainingLoss cross_entropy() { return {}; }
  static TrainingLoss from_params(LossNetParams params) { return {std::move(params)}; }
  std::string name() const { return learned ? "edl" : "cross_entropy"; }
};

struct TrainConfig {
  std::size_t epochs = 30;
  double learning_rate = 0.1;
  std::size_t batch_size = 32;
};

struct TrainHistory {
  LinearClassifier model;
  std::vector<double> epoch_accuracy;  // train accuracy after each epoch
  std::vector<double> epoch_loss;      // mean loss over the epoch's steps
  double initial_accuracy = 0.0;
};

std::vector<double> softmax(std::span<const double> z);

struct LogitLoss {
  double loss = 0.0;
  std::vector<double> d_logits;
};

/// Loss of one example and its gradient with respect to the logits.
LogitLoss loss_and_logit_grad(const TrainingLoss& loss, std::span<const double> z,
                              std::size_t y);

double accuracy(const LinearClassifier& model, const BlobDataset& data);

/// Minibatch gradient descent from a zero-initialized classifier; `rng`
/// drives the per-epoch shuffle. Throws std::runtime_error naming the epoch
/// and step when the loss or gradient becomes non-finite.
TrainHistory train_with_loss(const BlobDataset& data, const TrainingLoss& loss,
                             const TrainConfig& cfg, Rng& rng);

struct LossSummary {
  std::string loss_name;
  std::vector<double> final_accuracy;  // one per seed
  std::vector<TrainHistory> histories;
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation across seeds
};

inline constexpr std::size_t kMinComparisonSeeds = 3;

/// Trains with cross-entropy and with `learned` over the same seeds.
std::vector<LossSummary> compare_losses(const BlobDataset& data, const LossNetParams& learned,
                                        const TrainConfig& cfg, std::size_t seeds,
                                        std::uint64_t base_seed);

}  // namespace edl

#endif  // EDL_DOWNSTREAM_HPP_
