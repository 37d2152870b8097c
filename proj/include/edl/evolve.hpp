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

// Elitist evolution strategy over loss-network parameters, plus the
// gradient-descent baseline trained on the same ranking objective.
//
// One generation:
//   1. evaluate all K candidates on a freshly drawn pair set
//   2. keep the K_e lowest-fitness candidates as elites
//   3. sigma = sigma_high if Acc(best elite) < tau else sigma_low
//   4. refill to K: pick a uniform elite parent, mutate up to A times and
//      keep the first child with F(child) <= F(parent), else the A-th child
// The chaotic operator scales every parameter step of one mutation by a
// single logistic-map coefficient; the normal operator does not.
//
// Progress is tracked on a fixed validation pair set drawn once per run;
// global_best_fit is the lowest validation fitness seen so far.

#ifndef EDL_EVOLVE_HPP_
#define EDL_EVOLVE_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "edl/chaos.hpp"
#include "edl/fitness.hpp"
#include "edl/lossnet.hpp"
#include "edl/probspace.hpp"
#include "edl/rng.hpp"

namespace edl {

enum class MutationMode { kChaotic, kNormal };

std::string to_string(MutationMode mode);
MutationMode parse_mutation_mode(const std::string& name);

struct EvolutionConfig {
  std::size_t population = 6;
  std::size_t elites = 2;
  std::size_t generations = 80;
  std::size_t batches = 4;
  std::size_t pairs_per_batch = 1024;
  double sigma_high = 0.20;
  double sigma_low = 0.01;
  double acc_threshold = 0.95;
  std::size_t max_attempts = 8;
  MutationMode mutation_mode = MutationMode::kChaotic;
  std::size_t class_count = 10;
  std::uint64_t seed = 0;
  bool shared_pairs = true;
  std::size_t workers = 1;
  std::size_t validation_pairs = 8192;
  double init_scale = 1.0;
};

/// Throws std::invalid_argument naming the offending field.
void validate(const EvolutionConfig& cfg);

struct Candidate {
  LossNetParams params;
  double fitness = 0.0;
  double accuracy = 0.0;
  std::size_t lineage = 0;  // generation that produced it; 0 = initial
  std::optional<FitnessReport> validation;
};

struct GenerationRecord {
  std::size_t generation = 0;  // 1-based
  double global_best_fit = 0.0;
  double global_best_acc = 0.0;
  double pop_best_fit = 0.0;
  double pop_mean_fit = 0.0;
  double best_acc = 0.0;
  double sigma = 0.0;
  std::size_t attempts = 0;
  std::size_t accepted = 0;
  std::size_t exhausted = 0;
  // Chaos coefficients drawn this generation; unset in normal mode.
  std::optional<double> chaos_min;
  std::optional<double> chaos_mean;
  std::optional<double> chaos_max;
};

struct EvolutionResult {
  Candidate best;         // argmin fitness of the final population
  Candidate global_best;  // lowest validation fitness over the whole run
  std::vector<GenerationRecord> records;
};

/// Test seams. None of them is needed for a normal run.
struct EvolutionHooks {
  /// Replaces the mutation operator; receives the parent and sigma.
  std::function<LossNetParams(const LossNetParams&, double)> mutation_override;
  /// Population at the start of each generation, before evaluation.
  std::function<void(std::size_t, std::span<const Candidate>)> on_generation_start;
  /// Every offspring slot: parent fitness, child fitness, accepted flag.
  std::function<void(double, double, bool)> on_offspring;
};

using RecordSink = std::function<void(const GenerationRecord&)>;

struct MutationResult {
  LossNetParams child;
  double coefficient = 1.0;
};

/// theta' = theta + sigma * x * d * eps, one chaos coefficient x per call.
MutationResult mutate_chaotic(const LossNetParams& parent, double sigma, ChaosState& chaos,
                              Rng& rng);

/// theta' = theta + sigma * eps.
LossNetParams mutate_normal(const LossNetParams& parent, double sigma, Rng& rng);

double select_sigma(double best_accuracy, const EvolutionConfig& cfg);

EvolutionResult run_evolution(const EvolutionConfig& cfg, const MixtureConfig& mixture,
                              const RecordSink& sink = {}, const EvolutionHooks& hooks = {});

/// Fixed validation pairs for a run: one batch of cfg.validation_pairs pairs
/// drawn from a stream derived from cfg.seed.
PairSet validation_pair_set(const EvolutionConfig& cfg, const MixtureConfig& mixture);

// Gradient-descent baseline.

struct RankingGradient {
  double loss = 0.0;  // mean ranking loss over the pairs
  std::vector<double> d_params;
};

/// Mean ranking loss over a pair set and its exact parameter gradient.
RankingGradient ranking_gradient(const LossNetParams& params, const PairSet& set);

/// One plain gradient-descent step on the given pairs.
LossNetParams gd_step(const LossNetParams& params, const PairSet& set, double learning_rate);

/// Trains an init_params network by gradient descent on fresh pairs
/// (cfg.pairs_per_batch per step). The returned candidate carries its report
/// on the run's validation pair set. Throws std::runtime_error with the step
/// index if the loss becomes non-finite.
Candidate gd_pretrain(const EvolutionConfig& cfg, const MixtureConfig& mixture,
                      std::size_t steps, double learning_rate, Rng& rng);

}  // namespace edl

#endif  // EDL_EVOLVE_HPP_
