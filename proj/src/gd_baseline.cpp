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

#include "edl/evolve.hpp"

namespace edl {

RankingGradient ranking_gradient(const LossNetParams& params, const PairSet& set) {
  RankingGradient out;
  out.d_params.assign(params.flat.size(), 0.0);
  const double n_pairs = static_cast<double>(set.batches.size() * set.pairs_per_batch);
  for (const auto& batch : set.batches) {
    for (std::size_t i = 0; i + 1 < batch.size(); i += 2) {
      const ProbLabelPair& a = batch[i];
      const ProbLabelPair& b = batch[i + 1];
      const PairComparison cmp = compare_pair(params, a, b);
      out.loss += ranking_loss(cmp) / n_pairs;
      if (cmp.sign == 0) continue;  // softplus(0) is flat in the parameters
      // d softplus(-s dL) / d dL = -s * sigmoid(-s dL)
      const double coef = -cmp.sign * sigmoid(-cmp.sign * cmp.delta_l) / n_pairs;
      accumulate_backward(params, a, coef, out.d_params);
      accumulate_backward(params, b, -coef, out.d_params);
    }
  }
  return out;
}

LossNetParams gd_step(const LossNetParams& params, const PairSet& set, double learning_rate) {
  const RankingGradient g = ranking_gradient(params, set);
  LossNetParams next = params;
  for (std::size_t k = 0; k < next.flat.size(); ++k) next.flat[k] -= learning_rate * g.d_params[k];
  return next;
}

Candidate gd_pretrain(const EvolutionConfig& cfg, const MixtureConfig& mixture,
                      std::size_t steps, double learning_rate, Rng& rng) {
  validate(cfg);
  validate(mixture);
  if (steps < 1) throw std::invalid_argument("gd_pretrain: steps must be at least 1");
  if (!(learning_rate >= 0.0)) throw std::invalid_argument("gd_pretrain: learning_rate must be >= 0");

  Candidate cand;
  cand.params = init_params(cfg.class_count, rng, cfg.init_scale);
  for (std::size_t step = 0; step < steps; ++step) {
    const PairSet pairs = draw_pair_set(mixture, cfg.class_count, 1, cfg.pairs_per_batch, rng);
    const RankingGradient g = ranking_gradient(cand.params, pairs);
    if (!std::isfinite(g.loss)) {
      throw std::runtime_error("gd_pretrain: non-finite loss at step " + std::to_string(step));
    }
    for (std::size_t k = 0; k < cand.params.flat.size(); ++k) {
      cand.params.flat[k] -= learning_rate * g.d_params[k];
    }
  }
  const FitnessReport report = evaluate(cand.params, validation_pair_set(cfg, mixture));
  cand.fitness = report.fitness;
  cand.accuracy = report.accuracy;
  cand.lineage = steps;
  cand.validation = report;
  return cand;
}

}  // namespace edl
