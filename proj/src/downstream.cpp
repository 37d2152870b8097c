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

#include "edl/downstream.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace edl {

namespace {

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

std::size_t argmax(std::span<const double> v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace

BlobDataset make_blobs(const BlobConfig& cfg) {
  if (cfg.class_count < 2) throw std::invalid_argument("blobs: class_count must be at least 2");
  if (cfg.dim < 1) throw std::invalid_argument("blobs: dim must be at least 1");
  if (cfg.points_per_class < 1) throw std::invalid_argument("blobs: points_per_class must be >= 1");
  if (!(cfg.spread > 0.0)) throw std::invalid_argument("blobs: spread must be positive");

  Rng rng = make_rng(cfg.seed, {0xB10B});
  BlobDataset data;
  data.class_count = cfg.class_count;
  data.dim = cfg.dim;
  data.seed = cfg.seed;
  data.spreads.assign(cfg.class_count, cfg.spread);
  for (std::size_t c = 0; c < cfg.class_count; ++c) {
    std::vector<double> mean(cfg.dim);
    for (double& m : mean) m = cfg.mean_scale * standard_normal(rng);
    data.means.push_back(std::move(mean));
  }
  for (std::size_t c = 0; c < cfg.class_count; ++c) {
    for (std::size_t i = 0; i < cfg.points_per_class; ++i) {
      std::vector<double> x(cfg.dim);
      for (std::size_t k = 0; k < cfg.dim; ++k) {
        x[k] = data.means[c][k] + cfg.spread * standard_normal(rng);
      }
      data.features.push_back(std::move(x));
      data.labels.push_back(c);
    }
  }
  return data;
}

std::vector<double> LinearClassifier::logits(std::span<const double> x) const {
  std::vector<double> z(bias);
  for (std::size_t i = 0; i < dim; ++i) {
    const double* row = weights.data() + i * class_count;
    for (std::size_t c = 0; c < class_count; ++c) z[c] += x[i] * row[c];
  }
  return z;
}

std::vector<double> softmax(std::span<const double> z) {
  const double zmax = *std::max_element(z.begin(), z.end());
  std::vector<double> p(z.size());
  double total = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    p[i] = std::exp(z[i] - zmax);
    total += p[i];
  }
  for (double& v : p) v /= total;
  return p;
}

LogitLoss loss_and_logit_grad(const TrainingLoss& loss, std::span<const double> z,
                              std::size_t y) {
  LogitLoss out;
  std::vector<double> p = softmax(z);
  if (!loss.learned) {
    const double zmax = *std::max_element(z.begin(), z.end());
    double lse = 0.0;
    for (double v : z) lse += std::exp(v - zmax);
    out.loss = zmax + std::log(lse) - z[y];
    out.d_logits = p;
    out.d_logits[y] -= 1.0;
    return out;
  }

  const LossNetParams& net = *loss.learned;
  ProbLabelPair pair{std::move(p), y};
  out.loss = forward(net, pair);
  const LossGradients g = backward(net, pair, 1.0);
  const std::size_t c = pair.p.size();
  double dot = 0.0;
  for (std::size_t i = 0; i < c; ++i) dot += pair.p[i] * g.d_input[i];
  out.d_logits.resize(c);
  for (std::size_t i = 0; i < c; ++i) out.d_logits[i] = pair.p[i] * (g.d_input[i] - dot);
  return out;
}

double accuracy(const LinearClassifier& model, const BlobDataset& data) {
  std::size_t correct = 0;
  for (std::size_t n = 0; n < data.size(); ++n) {
    if (argmax(model.logits(data.features[n])) == data.labels[n]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

TrainHistory train_with_loss(const BlobDataset& data, const TrainingLoss& loss,
                             const TrainConfig& cfg, Rng& rng) {
  if (loss.learned && loss.learned->class_count != data.class_count) {
    throw std::invalid_argument("class count mismatch: loss expects " +
                                std::to_string(loss.learned->class_count) + " classes, dataset has " +
                                std::to_string(data.class_count));
  }
  if (cfg.batch_size < 1) throw std::invalid_argument("batch_size must be at least 1");

  TrainHistory hist;
  LinearClassifier& model = hist.model;
  model.dim = data.dim;
  model.class_count = data.class_count;
  model.weights.assign(data.dim * data.class_count, 0.0);
  model.bias.assign(data.class_count, 0.0);
  hist.initial_accuracy = accuracy(model, data);

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> grad_w(model.weights.size());
  std::vector<double> grad_b(model.bias.size());

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    std::size_t step = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size, ++step) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      const double scale = 1.0 / static_cast<double>(end - start);
      std::fill(grad_w.begin(), grad_w.end(), 0.0);
      std::fill(grad_b.begin(), grad_b.end(), 0.0);
      double batch_loss = 0.0;
      for (std::size_t k = start; k < end; ++k) {
        const auto& x = data.features[order[k]];
        const LogitLoss ll = loss_and_logit_grad(loss, model.logits(x), data.labels[order[k]]);
        batch_loss += ll.loss * scale;
        for (std::size_t i = 0; i < model.dim; ++i) {
          for (std::size_t c = 0; c < model.class_count; ++c) {
            grad_w[i * model.class_count + c] += x[i] * ll.d_logits[c] * scale;
          }
        }
        for (std::size_t c = 0; c < model.class_count; ++c) grad_b[c] += ll.d_logits[c] * scale;
      }
      if (!std::isfinite(batch_loss) || !all_finite(grad_w) || !all_finite(grad_b)) {
        throw std::runtime_error("non-finite loss or gradient at epoch " + std::to_string(epoch) +
                                 ", step " + std::to_string(step));
      }
      for (std::size_t k = 0; k < grad_w.size(); ++k) model.weights[k] -= cfg.learning_rate * grad_w[k];
      for (std::size_t k = 0; k < grad_b.size(); ++k) model.bias[k] -= cfg.learning_rate * grad_b[k];
      loss_sum += batch_loss;
    }
    hist.epoch_loss.push_back(loss_sum / static_cast<double>(std::max<std::size_t>(step, 1)));
    hist.epoch_accuracy.push_back(accuracy(model, data));
  }
  return hist;
}

std::vector<LossSummary> compare_losses(const BlobDataset& data, const LossNetParams& learned,
                                        const TrainConfig& cfg, std::size_t seeds,
                                        std::uint64_t base_seed) {
  if (seeds < kMinComparisonSeeds) {
    throw std::invalid_argument("compare_losses needs at least " +
                                std::to_string(kMinComparisonSeeds) + " seeds");
  }
  const TrainingLoss losses[] = {TrainingLoss::cross_entropy(), TrainingLoss::from_params(learned)};
  std::vector<LossSummary> out;
  for (const TrainingLoss& loss : losses) {
    LossSummary summary;
    summary.loss_name = loss.name();
    for (std::size_t s = 0; s < seeds; ++s) {
      Rng rng = make_rng(base_seed, {s});
      TrainHistory h = train_with_loss(data, loss, cfg, rng);
      summary.final_accuracy.push_back(h.epoch_accuracy.empty() ? h.initial_accuracy
                                                                : h.epoch_accuracy.back());
      summary.histories.push_back(std::move(h));
    }
    const double n = static_cast<double>(seeds);
    summary.mean = std::accumulate(summary.final_accuracy.begin(), summary.final_accuracy.end(), 0.0) / n;
    double ss = 0.0;
    for (double a : summary.final_accuracy) ss += (a - summary.mean) * (a - summary.mean);
    summary.std = std::sqrt(ss / (n - 1.0));
    out.push_back(std::move(summary));
  }
  return out;
}

}  // namespace edl
