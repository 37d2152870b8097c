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
#include <numbers>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "edl/fitness.hpp"

using namespace edl;

namespace {

// Flat-loop reference: recomputes everything from the raw samples.
FitnessReport naive_fitness(const LossFunction& loss, const PairSet& set) {
  double total = 0.0;
  long agree = 0, strict = 0;
  for (const auto& batch : set.batches) {
    double batch_sum = 0.0;
    for (std::size_t k = 0; k < set.pairs_per_batch; ++k) {
      const ProbLabelPair& a = batch[2 * k];
      const ProbLabelPair& b = batch[2 * k + 1];
      const double dd = (1.0 - a.p[a.y]) - (1.0 - b.p[b.y]);
      const double s = dd > 0 ? 1.0 : (dd < 0 ? -1.0 : 0.0);
      const double dl = loss(a) - loss(b);
      batch_sum += std::log1p(std::exp(-s * dl));
      if (s != 0.0) {
        ++strict;
        if (s * dl > 0) ++agree;
      }
    }
    total += batch_sum / static_cast<double>(set.pairs_per_batch);
  }
  FitnessReport r;
  r.fitness = total / static_cast<double>(set.batches.size());
  r.accuracy = strict ? static_cast<double>(agree) / static_cast<double>(strict) : 0.0;
  return r;
}

double monotone_loss(const ProbLabelPair& s) { return 1.0 - s.p[s.y]; }

bool tie_free(const PairSet& set) {
  for (const auto& batch : set.batches)
    for (std::size_t k = 0; k < set.pairs_per_batch; ++k)
      if (hardness(batch[2 * k]) == hardness(batch[2 * k + 1])) return false;
  return true;
}

}  // namespace

TEST_CASE("compare_pair basics") {
  Rng rng(1);
  const LossNetParams net = init_params(3, rng);
  const ProbLabelPair a{{0.1, 0.2, 0.7}, 1};  // D = 0.8
  const ProbLabelPair b{{0.7, 0.2, 0.1}, 0};  // D = 0.3
  const PairComparison same = compare_pair(net, a, a);
  CHECK(same.delta_d == 0.0);
  CHECK(same.sign == 0);
  CHECK(same.delta_l == 0.0);
  const PairComparison ab = compare_pair(net, a, b);
  CHECK(ab.delta_d == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(ab.sign == 1);
  const PairComparison ba = compare_pair(net, b, a);
  CHECK(ba.delta_d == -ab.delta_d);
  CHECK(ba.sign == -ab.sign);
  CHECK(ba.delta_l == -ab.delta_l);
  CHECK_THROWS_AS(compare_pair(net, a, ProbLabelPair{{0.5, 0.5}, 0}), std::invalid_argument);
}

TEST_CASE("ranking_loss by hand") {
  CHECK(ranking_loss({0.0, 0, 3.0}) == std::numbers::ln2);
  CHECK(ranking_loss({0.4, 1, 0.0}) == std::numbers::ln2);
  CHECK(ranking_loss({0.4, 1, 800.0}) == doctest::Approx(0.0));
  // softplus(2) = 2 + log1p(e^-2)
  CHECK(ranking_loss({0.4, 1, -2.0}) == doctest::Approx(2.1269280110429727).epsilon(1e-15));
}

TEST_CASE("zero network scores exactly ln 2") {
  Rng rng(2);
  const FitnessReport r = estimate_fitness(zero_params(10), MixtureConfig{}, 10, 4, 1024, rng);
  CHECK(r.fitness == std::numbers::ln2);
  CHECK(r.accuracy == 0.0);
  CHECK(r.pair_count == 4096);
  CHECK(r.batch_count == 4);
}

TEST_CASE("estimate_fitness matches the flat-loop oracle on the same stream") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng init(seed + 100);
    const LossNetParams net = init_params(10, init, 2.0);
    Rng a(seed), b(seed);
    const FitnessReport got = estimate_fitness(net, MixtureConfig{}, 10, 3, 200, a);
    const PairSet replay = draw_pair_set(MixtureConfig{}, 10, 3, 200, b);
    const FitnessReport want =
        naive_fitness([&](const ProbLabelPair& s) { return forward(net, s); }, replay);
    CHECK(std::abs(got.fitness - want.fitness) <= 1e-12);
    CHECK(got.accuracy == want.accuracy);
    CHECK(got.fitness >= 0.0);
    CHECK(got.accuracy >= 0.0);
    CHECK(got.accuracy <= 1.0);
  }
}

TEST_CASE("monotone loss 1 - p_y is perfectly trend-consistent") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const std::size_t pairs = 1 + seed % 64;
    const PairSet set = draw_pair_set(MixtureConfig{}, 10, 1, pairs, rng);
    if (!tie_free(set)) continue;
    const FitnessReport r = evaluate(LossFunction(monotone_loss), set);
    const FitnessReport want = naive_fitness(monotone_loss, set);
    CHECK(r.accuracy == 1.0);
    CHECK(r.fitness < std::numbers::ln2);
    CHECK(std::abs(r.fitness - want.fitness) <= 1e-12);
  }
}

TEST_CASE("ties are excluded from accuracy and cost ln 2") {
  PairSet set;
  set.class_count = 2;
  set.pairs_per_batch = 2;
  const ProbLabelPair x{{0.3, 0.7}, 0};
  const ProbLabelPair y{{0.6, 0.4}, 0};
  set.batches = {{x, x, x, y}};  // one tie, one strict pair
  const FitnessReport r = evaluate(LossFunction(monotone_loss), set);
  CHECK(r.accuracy == 1.0);
  const double strict = std::log1p(std::exp(-(0.7 - 0.4)));
  CHECK(r.fitness == doctest::Approx((std::numbers::ln2 + strict) / 2).epsilon(1e-14));
}

TEST_CASE("evaluate_all is independent of the worker count") {
  Rng rng(3);
  std::vector<LossNetParams> nets;
  for (int i = 0; i < 7; ++i) nets.push_back(init_params(10, rng, 2.0));
  const PairSet set = draw_pair_set(MixtureConfig{}, 10, 2, 300, rng);
  const auto one = evaluate_all(nets, set, 1);
  const auto four = evaluate_all(nets, set, 4);
  REQUIRE(one.size() == nets.size());
  for (std::size_t i = 0; i < nets.size(); ++i) {
    CHECK(one[i].fitness == four[i].fitness);
    CHECK(one[i].accuracy == four[i].accuracy);
    CHECK(one[i].fitness == evaluate(nets[i], set).fitness);
  }
}

TEST_CASE("variance probe") {
  Rng init(4);
  const LossNetParams net = init_params(10, init, 3.0);
  const std::vector<std::size_t> bs = {1, 4, 16};
  Rng rng(5);
  const auto rows = variance_probe(net, MixtureConfig{}, 10, 64, bs, 200, rng);
  REQUIRE(rows.size() == 3);
  const double r4 = rows[1].variance / rows[0].variance;
  CHECK(r4 > 0.25 / 2);
  CHECK(r4 < 0.25 * 2);
  CHECK(rows[0].variance >= rows[2].variance);

  Rng z(6);
  for (const VarianceRow& row : variance_probe(zero_params(10), MixtureConfig{}, 10, 16, bs, 30, z)) {
    CHECK(row.variance == 0.0);
  }
  Rng t(7);
  CHECK_THROWS_AS(variance_probe(net, MixtureConfig{}, 10, 16, bs, 29, t), std::invalid_argument);
}

TEST_CASE("invalid counts") {
  Rng rng(8);
  CHECK_THROWS_AS(draw_pair_set(MixtureConfig{}, 10, 0, 10, rng), std::invalid_argument);
  CHECK_THROWS_AS(draw_pair_set(MixtureConfig{}, 10, 1, 0, rng), std::invalid_argument);
}
