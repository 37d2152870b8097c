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

#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "edl/downstream.hpp"

using namespace edl;

namespace {

double example_loss(const TrainingLoss& loss, const LinearClassifier& m, std::span<const double> x,
                    std::size_t y) {
  return loss_and_logit_grad(loss, m.logits(x), y).loss;
}

LinearClassifier random_model(std::size_t dim, std::size_t c, Rng& rng) {
  LinearClassifier m{dim, c, std::vector<double>(dim * c), std::vector<double>(c)};
  for (double& w : m.weights) w = 0.5 * standard_normal(rng);
  for (double& b : m.bias) b = 0.5 * standard_normal(rng);
  return m;
}

}  // namespace

TEST_CASE("blobs are well formed and reproducible") {
  BlobConfig cfg;
  cfg.class_count = 4;
  cfg.points_per_class = 25;
  const BlobDataset a = make_blobs(cfg), b = make_blobs(cfg);
  CHECK(a.size() == 100);
  std::vector<int> counts(4);
  for (std::size_t n = 0; n < a.size(); ++n) {
    ++counts[a.labels[n]];
    for (double v : a.features[n]) CHECK(std::isfinite(v));
    CHECK(a.features[n] == b.features[n]);
  }
  for (int k : counts) CHECK(k >= 1);
}

TEST_CASE("softmax outputs are valid simplex points") {
  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> z(10);
    for (double& v : z) v = 30.0 * standard_normal(rng);
    const auto p = softmax(z);
    CHECK_NOTHROW(validate(ProbLabelPair{p, 3}));
  }
}

TEST_CASE("cross-entropy logit gradient is p - e_y") {
  Rng rng(2);
  const std::vector<double> z = {0.3, -1.2, 2.0, 0.0};
  const LogitLoss ll = loss_and_logit_grad(TrainingLoss::cross_entropy(), z, 2);
  const auto p = softmax(z);
  for (std::size_t i = 0; i < z.size(); ++i) {
    CHECK(std::abs(ll.d_logits[i] - (p[i] - (i == 2 ? 1.0 : 0.0))) <= 1e-12);
  }
  CHECK(ll.loss == doctest::Approx(-std::log(p[2])).epsilon(1e-12));
}

TEST_CASE("learned-loss chain rule matches finite differences on every parameter") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t c = 2 + uniform_index(rng, 4);
    const std::size_t dim = 1 + uniform_index(rng, 4);
    const TrainingLoss loss = TrainingLoss::from_params(init_params(c, rng, 2.0));
    LinearClassifier m = random_model(dim, c, rng);
    std::vector<double> x(dim);
    for (double& v : x) v = standard_normal(rng);
    const std::size_t y = uniform_index(rng, c);
    const LogitLoss ll = loss_and_logit_grad(loss, m.logits(x), y);
    const double h = 1e-5;
    auto check = [&](double& param, double analytic) {
      const double saved = param;
      param = saved + h;
      const double up = example_loss(loss, m, x, y);
      param = saved - h;
      const double down = example_loss(loss, m, x, y);
      param = saved;
      const double fd = (up - down) / (2 * h);
      CHECK(std::abs(analytic - fd) <= 1e-4 * std::max(std::abs(fd), 1e-6) + 1e-10);
    };
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t k = 0; k < c; ++k) check(m.weights[i * c + k], x[i] * ll.d_logits[k]);
    for (std::size_t k = 0; k < c; ++k) check(m.bias[k], ll.d_logits[k]);
  }
}

TEST_CASE("cross-entropy separates three blobs") {
  BlobConfig cfg;
  cfg.class_count = 3;
  cfg.dim = 2;
  cfg.points_per_class = 200;
  cfg.mean_scale = 6.0;
  cfg.seed = 1;
  const BlobDataset data = make_blobs(cfg);
  Rng rng(4);
  const TrainHistory h = train_with_loss(data, TrainingLoss::cross_entropy(), TrainConfig{}, rng);
  CHECK(h.epoch_accuracy.back() >= 0.98);
  CHECK(h.epoch_accuracy.size() == TrainConfig{}.epochs);
}

TEST_CASE("constant learned loss trains nothing") {
  BlobConfig cfg;
  cfg.points_per_class = 20;
  const BlobDataset data = make_blobs(cfg);
  Rng rng(5);
  const TrainHistory h = train_with_loss(data, TrainingLoss::from_params(zero_params(10)), TrainConfig{}, rng);
  for (double w : h.model.weights) CHECK(w == 0.0);
  for (double a : h.epoch_accuracy) CHECK(a == h.initial_accuracy);
}

TEST_CASE("zero learning rate keeps both losses at their initial accuracy") {
  BlobConfig cfg;
  cfg.points_per_class = 20;
  const BlobDataset data = make_blobs(cfg);
  Rng rng(6);
  TrainConfig tc;
  tc.learning_rate = 0.0;
  tc.epochs = 3;
  const auto rows = compare_losses(data, init_params(10, rng), tc, 3, 0);
  REQUIRE(rows.size() == 2);
  for (const LossSummary& s : rows)
    for (const TrainHistory& h : s.histories)
      for (double a : h.epoch_accuracy) CHECK(a == h.initial_accuracy);
}

TEST_CASE("comparisons are deterministic and validated") {
  BlobConfig cfg;
  cfg.points_per_class = 20;
  const BlobDataset data = make_blobs(cfg);
  Rng rng(7);
  const LossNetParams net = init_params(10, rng);
  TrainConfig tc;
  tc.epochs = 2;
  const auto a = compare_losses(data, net, tc, 3, 11);
  const auto b = compare_losses(data, net, tc, 3, 11);
  CHECK(a[0].loss_name == "cross_entropy");
  CHECK(a[1].loss_name == "edl");
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(a[i].final_accuracy == b[i].final_accuracy);
    CHECK(a[i].histories[0].epoch_loss == b[i].histories[0].epoch_loss);
  }
  CHECK_THROWS_AS(compare_losses(data, net, tc, 2, 11), std::invalid_argument);
  CHECK_THROWS_AS(compare_losses(data, init_params(3, rng), tc, 3, 11), std::invalid_argument);
}
