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

// Pairwise ranking-consistency fitness.
//
// For two samples i, j:
//   dD = D_i - D_j,  s = sign(dD),  dL = L_i - L_j
// ranking loss  softplus(-s * dL)
// a comparison is trend-consistent when s * dL > 0.
//
// The Monte-Carlo estimate averages the ranking loss within each batch and
// then across batches. Each batch holds 2n fresh samples paired
// consecutively: (0,1), (2,3), ...
// Ties (s = 0) add ln 2 to the fitness and are left out of the accuracy
// denominator; with no strict comparisons the accuracy is reported as 0.

#ifndef EDL_FITNESS_HPP_
#define EDL_FITNESS_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "edl/lossnet.hpp"
#include "edl/probspace.hpp"
#include "edl/rng.hpp"

namespace edl {

struct PairComparison {
  double delta_d = 0.0;
  int sign = 0;
  double delta_l = 0.0;
};

struct FitnessReport {
  double fitness = 0.0;
  double accuracy = 0.0;
  std::size_t pair_count = 0;
  std::size_t batch_count = 0;
};

/// Pre-materialized evaluation pairs, shared read-only between candidates.
struct PairSet {
  std::size_t class_count = 0;
  std::size_t pairs_per_batch = 0;
  std::vector<std::vector<ProbLabelPair>> batches;  // 2 * pairs_per_batch each

  std::size_t sample_count() const { return batches.size() * 2 * pairs_per_batch; }
};

using LossFunction = std::function<double(const ProbLabelPair&)>;

PairComparison compare_pair(const LossNetParams& params, const ProbLabelPair& a,
                            const ProbLabelPair& b);

/// Builds a comparison from precomputed hardness and loss values.
PairComparison make_comparison(double hardness_a, double hardness_b, double loss_a,
                               double loss_b);

inline double ranking_loss(const PairComparison& cmp) {
  return softplus(-static_cast<double>(cmp.sign) * cmp.delta_l);
}

PairSet draw_pair_set(const MixtureConfig& cfg, std::size_t c, std::size_t batches,
                      std::size_t pairs_per_batch, Rng& rng);

/// Fitness of per-sample losses laid out in PairSet order (batch-major).
FitnessReport score_losses(const PairSet& set, std::span<const double> losses);

FitnessReport evaluate(const LossNetParams& params, const PairSet& set);
FitnessReport evaluate(const LossFunction& loss, const PairSet& set);

/// Evaluates several candidates on one pair set, optionally on worker threads.
/// The result does not depend on `workers`.
std::vector<FitnessReport> evaluate_all(std::span<const LossNetParams> candidates,
                                        const PairSet& set, std::size_t workers = 1);

FitnessReport estimate_fitness(const LossNetParams& params, const MixtureConfig& cfg,
                               std::size_t c, std::size_t batches,
                               std::size_t pairs_per_batch, Rng& rng);

struct VarianceRow {
  std::size_t batches = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased sample variance over trials
};

inline constexpr std::size_t kMinVarianceTrials = 30;

/// Each (B, trial) cell uses its own seed drawn from `rng`, so the rows are
/// independent of each other.
std::vector<VarianceRow> variance_probe(const LossNetParams& params,
                                        const MixtureConfig& cfg, std::size_t c,
                                        std::size_t pairs_per_batch,
                                        std::span<const std::size_t> b_values,
                                        std::size_t trials, Rng& rng);

}  // namespace edl

#endif  // EDL_FITNESS_HPP_
