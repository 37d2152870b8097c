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
#include <string>

#include "doctest.h"
#include "edl/evolve.hpp"

using namespace edl;

namespace {

double mean_ranking_loss(const LossNetParams& net, const PairSet& set) {
  double total = 0.0;
  std::size_t n = 0;
  for (const auto& batch : set.batches) {
    for (std::size_t k = 0; k + 1 < batch.size(); k += 2) {
      total += ranking_loss(compare_pair(net, batch[k], batch[k + 1]));
      ++n;
    }
  }
  return total / static_cast<double>(n);
}

EvolutionConfig tiny() {
  EvolutionConfig cfg;
  cfg.pairs_per_batch = 32;
  cfg.validation_pairs = 128;
  return cfg;
}

}  // namespace

TEST_CASE("ranking gradient matches central differences") {
  Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    LossNetParams net = init_params(4, rng, 2.0);
    for (double& v : net.flat) v += 0.05 * standard_normal(rng);
    const PairSet set = draw_pair_set(MixtureConfig{}, 4, 1, 16, rng);
    const RankingGradient g = ranking_gradient(net, set);
    CHECK(g.loss == doctest::Approx(mean_ranking_loss(net, set)).epsilon(1e-12));
    for (int j = 0; j < 5; ++j) {
      const std::size_t k = uniform_index(rng, net.flat.size());
      LossNetParams plus = net, minus = net;
      plus.flat[k] += 1e-5;
      minus.flat[k] -= 1e-5;
      const double fd = (mean_ranking_loss(plus, set) - mean_ranking_loss(minus, set)) / 2e-5;
      CHECK(std::abs(g.d_params[k] - fd) <= 1e-4 * std::max(std::abs(fd), 1e-6) + 1e-10);
    }
  }
}

TEST_CASE("one step equals params minus lr times the numeric gradient") {
  Rng rng(2);
  const LossNetParams net = init_params(3, rng);
  const PairSet set = draw_pair_set(MixtureConfig{}, 3, 1, 24, rng);
  const double lr = 0.7;
  const LossNetParams next = gd_step(net, set, lr);
  for (std::size_t k = 0; k < net.flat.size(); k += 13) {
    LossNetParams plus = net, minus = net;
    plus.flat[k] += 1e-5;
    minus.flat[k] -= 1e-5;
    const double fd = (mean_ranking_loss(plus, set) - mean_ranking_loss(minus, set)) / 2e-5;
    const double want = net.flat[k] - lr * fd;
    const double step = next.flat[k] - net.flat[k];
    CHECK(std::abs(step - (want - net.flat[k])) <= 1e-4 * std::max(std::abs(step), 1e-8) + 1e-10);
  }
}

TEST_CASE("zero learning rate leaves the parameters alone") {
  Rng rng(3);
  const LossNetParams net = init_params(3, rng);
  const PairSet set = draw_pair_set(MixtureConfig{}, 3, 1, 8, rng);
  CHECK(gd_step(net, set, 0.0).flat == net.flat);

  const EvolutionConfig cfg = tiny();
  Rng a(4), b(4);
  const Candidate c = gd_pretrain(cfg, MixtureConfig{}, 3, 0.0, a);
  CHECK(c.params.flat == init_params(cfg.class_count, b, cfg.init_scale).flat);
  REQUIRE(c.validation.has_value());
  CHECK(c.validation->pair_count == cfg.validation_pairs);
}

TEST_CASE("full-batch steps decrease the ranking objective") {
  Rng rng(5);
  LossNetParams net = init_params(10, rng, 2.0);
  const PairSet set = draw_pair_set(MixtureConfig{}, 10, 1, 128, rng);
  double prev = ranking_gradient(net, set).loss;
  for (int step = 0; step < 20; ++step) {
    net = gd_step(net, set, 0.5);
    const double now = ranking_gradient(net, set).loss;
    CHECK(now < prev);
    prev = now;
  }
}

TEST_CASE("blow-up is reported with the step index") {
  Rng rng(6);
  try {
    gd_pretrain(tiny(), MixtureConfig{}, 10, 1e300, rng);
    FAIL("expected throw");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("step") != std::string::npos);
  }
  CHECK_THROWS_AS(gd_pretrain(tiny(), MixtureConfig{}, 0, 1.0, rng), std::invalid_argument);
  CHECK_THROWS_AS(gd_pretrain(tiny(), MixtureConfig{}, 1, -1.0, rng), std::invalid_argument);
}
