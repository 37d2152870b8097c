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

#include "edl/evolve.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace edl {

namespace {

// Stream tags for derive_seed(cfg.seed, {tag, ...}).
enum StreamTag : std::uint64_t {
  kStreamInit = 1,
  kStreamChaos = 2,
  kStreamSelect = 3,
  kStreamMutate = 4,
  kStreamPairs = 5,
  kStreamValidation = 6,
};

void fail(const std::string& field, const std::string& reason) {
  throw std::invalid_argument("evolution." + field + ": " + reason);
}

// Mutation and pair streams owned by one refill worker.
struct WorkerStreams {
  ChaosState chaos;
  Rng mutate;
  Rng pairs;
  double chaos_min = std::numeric_limits<double>::infinity();
  double chaos_max = -std::numeric_limits<double>::infinity();
  double chaos_sum = 0.0;
  std::size_t chaos_draws = 0;

  void note(double x) {
    chaos_min = std::min(chaos_min, x);
    chaos_max = std::max(chaos_max, x);
    chaos_sum += x;
    ++chaos_draws;
  }
  void reset_stats() {
    chaos_min = std::numeric_limits<double>::infinity();
    chaos_max = -std::numeric_limits<double>::infinity();
    chaos_sum = 0.0;
    chaos_draws = 0;
  }
};

struct SlotOutcome {
  Candidate child;
  std::size_t attempts = 0;
  bool accepted = false;
  double parent_fitness = 0.0;
};

// Runs fn(w) for w in [0, workers) either inline or on threads.
template <typename Fn>
void for_each_worker(std::size_t workers, Fn&& fn) {
  if (workers <= 1) {
    fn(std::size_t{0});
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        fn(w);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

class Evolution {
 public:
  Evolution(const EvolutionConfig& cfg, const MixtureConfig& mixture, const RecordSink& sink,
            const EvolutionHooks& hooks)
      : cfg_(cfg),
        mixture_(mixture),
        sink_(sink),
        hooks_(hooks),
        select_rng_(make_rng(cfg.seed, {kStreamSelect})),
        pairs_rng_(make_rng(cfg.seed, {kStreamPairs})),
        validation_(validation_pair_set(cfg, mixture)) {
    const std::size_t n_workers = std::max<std::size_t>(cfg.workers, 1);
    for (std::size_t w = 0; w < n_workers; ++w) {
      // A single worker uses the run-level streams; parallel workers get
      // their own, keyed by worker index.
      const std::uint64_t key = n_workers == 1 ? 0 : w + 1;
      Rng chaos_seed = n_workers == 1 ? make_rng(cfg.seed, {kStreamChaos})
                                      : make_rng(cfg.seed, {kStreamChaos, key});
      WorkerStreams ws{chaos_init(chaos_seed),
                       n_workers == 1 ? make_rng(cfg.seed, {kStreamMutate})
                                      : make_rng(cfg.seed, {kStreamMutate, key}),
                       n_workers == 1 ? make_rng(cfg.seed, {kStreamPairs, 1000})
                                      : make_rng(cfg.seed, {kStreamPairs, 1000 + key})};
      workers_.push_back(std::move(ws));
    }
  }

  EvolutionResult run() {
    std::vector<Candidate> population = initial_population();
    validate_new(population);

    EvolutionResult result;
    for (std::size_t g = 1; g <= cfg_.generations; ++g) {
      if (hooks_.on_generation_start) hooks_.on_generation_start(g, population);

      const std::optional<PairSet> gen_pairs =
          cfg_.shared_pairs ? std::optional<PairSet>(draw_generation_pairs()) : std::nullopt;
      evaluate_population(population, gen_pairs);

      std::vector<std::size_t> order(population.size());
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return population[a].fitness < population[b].fitness;
      });

      std::vector<Candidate> elites;
      for (std::size_t i = 0; i < cfg_.elites; ++i) elites.push_back(population[order[i]]);
      const Candidate& best = elites.front();

      GenerationRecord rec;
      rec.generation = g;
      rec.pop_best_fit = best.fitness;
      rec.best_acc = best.accuracy;
      double mean = 0.0;
      for (const Candidate& c : population) mean += c.fitness;
      rec.pop_mean_fit = mean / static_cast<double>(population.size());
      rec.sigma = select_sigma(best.accuracy, cfg_);

      std::vector<Candidate> next = elites;
      std::vector<SlotOutcome> slots = refill(elites, rec.sigma, gen_pairs, g);
      double chaos_sum = 0.0;
      std::size_t chaos_draws = 0;
      double chaos_min = std::numeric_limits<double>::infinity();
      double chaos_max = -std::numeric_limits<double>::infinity();
      for (WorkerStreams& ws : workers_) {
        chaos_sum += ws.chaos_sum;
        chaos_draws += ws.chaos_draws;
        chaos_min = std::min(chaos_min, ws.chaos_min);
        chaos_max = std::max(chaos_max, ws.chaos_max);
        ws.reset_stats();
      }
      if (chaos_draws > 0) {
        rec.chaos_min = chaos_min;
        rec.chaos_max = chaos_max;
        rec.chaos_mean = chaos_sum / static_cast<double>(chaos_draws);
      }
      for (SlotOutcome& s : slots) {
        rec.attempts += s.attempts;
        if (s.accepted) {
          ++rec.accepted;
        } else {
          ++rec.exhausted;
        }
        if (hooks_.on_offspring) hooks_.on_offspring(s.parent_fitness, s.child.fitness, s.accepted);
        next.push_back(std::move(s.child));
      }

      validate_new(next);
      rec.global_best_fit = global_best_.validation->fitness;
      rec.global_best_acc = global_best_.validation->accuracy;
      result.records.push_back(rec);
      if (sink_) sink_(rec);

      population = std::move(next);
    }

    const auto best_it = std::min_element(
        population.begin(), population.end(),
        [](const Candidate& a, const Candidate& b) { return a.fitness < b.fitness; });
    result.best = *best_it;
    result.global_best = global_best_;
    return result;
  }

 private:
  std::vector<Candidate> initial_population() {
    Rng rng = make_rng(cfg_.seed, {kStreamInit});
    std::vector<Candidate> pop(cfg_.population);
    for (Candidate& c : pop) c.params = init_params(cfg_.class_count, rng, cfg_.init_scale);
    return pop;
  }

  PairSet draw_generation_pairs() {
    return draw_pair_set(mixture_, cfg_.class_count, cfg_.batches, cfg_.pairs_per_batch,
                         pairs_rng_);
  }

  void evaluate_population(std::vector<Candidate>& pop, const std::optional<PairSet>& pairs) {
    std::vector<FitnessReport> reports;
    if (pairs) {
      std::vector<LossNetParams> params;
      params.reserve(pop.size());
      for (const Candidate& c : pop) params.push_back(c.params);
      reports = evaluate_all(params, *pairs, cfg_.workers);
    } else {
      for (const Candidate& c : pop) {
        reports.push_back(estimate_fitness(c.params, mixture_, cfg_.class_count, cfg_.batches,
                                           cfg_.pairs_per_batch, pairs_rng_));
      }
    }
    for (std::size_t i = 0; i < pop.size(); ++i) {
      if (!std::isfinite(reports[i].fitness)) {
        throw std::runtime_error("non-finite fitness for candidate " + std::to_string(i));
      }
      pop[i].fitness = reports[i].fitness;
      pop[i].accuracy = reports[i].accuracy;
    }
  }

  LossNetParams mutate(const LossNetParams& parent, double sigma, WorkerStreams& ws) {
    if (hooks_.mutation_override) return hooks_.mutation_override(parent, sigma);
    if (cfg_.mutation_mode == MutationMode::kNormal) return mutate_normal(parent, sigma, ws.mutate);
    MutationResult m = mutate_chaotic(parent, sigma, ws.chaos, ws.mutate);
    ws.note(m.coefficient);
    return std::move(m.child);
  }

  std::vector<SlotOutcome> refill(const std::vector<Candidate>& elites, double sigma,
                                  const std::optional<PairSet>& pairs, std::size_t generation) {
    const std::size_t n_slots = cfg_.population - elites.size();
    std::vector<std::size_t> parents(n_slots);
    for (std::size_t& p : parents) p = uniform_index(select_rng_, elites.size());

    std::vector<SlotOutcome> out(n_slots);
    const std::size_t n_workers = workers_.size();
    for_each_worker(n_workers, [&](std::size_t w) {
      WorkerStreams& ws = workers_[w];
      for (std::size_t s = w; s < n_slots; s += n_workers) {
        const Candidate& parent = elites[parents[s]];
        SlotOutcome& slot = out[s];
        slot.parent_fitness = parent.fitness;
        for (std::size_t a = 1; a <= cfg_.max_attempts; ++a) {
          Candidate child;
          child.params = mutate(parent.params, sigma, ws);
          child.lineage = generation;
          const FitnessReport rep =
              pairs ? evaluate(child.params, *pairs)
                    : estimate_fitness(child.params, mixture_, cfg_.class_count, cfg_.batches,
                                       cfg_.pairs_per_batch, ws.pairs);
          if (!std::isfinite(rep.fitness)) {
            throw std::runtime_error("non-finite fitness in generation " +
                                     std::to_string(generation));
          }
          child.fitness = rep.fitness;
          child.accuracy = rep.accuracy;
          slot.child = std::move(child);
          slot.attempts = a;
          if (slot.child.fitness <= parent.fitness) {
            slot.accepted = true;
            break;
          }
        }
      }
    });
    return out;
  }

  // Scores every candidate that has no validation report yet and updates
  // the global best. Elites keep the report from when they were created.
  void validate_new(std::vector<Candidate>& pop) {
    std::vector<std::size_t> todo;
    std::vector<LossNetParams> params;
    for (std::size_t i = 0; i < pop.size(); ++i) {
      if (!pop[i].validation) {
        todo.push_back(i);
        params.push_back(pop[i].params);
      }
    }
    const std::vector<FitnessReport> reports = evaluate_all(params, validation_, cfg_.workers);
    for (std::size_t k = 0; k < todo.size(); ++k) {
      Candidate& c = pop[todo[k]];
      c.validation = reports[k];
      if (!global_best_.validation || c.validation->fitness < global_best_.validation->fitness) {
        global_best_ = c;
      }
    }
  }

  const EvolutionConfig& cfg_;
  const MixtureConfig& mixture_;
  const RecordSink& sink_;
  const EvolutionHooks& hooks_;
  Rng select_rng_;
  Rng pairs_rng_;
  PairSet validation_;
  std::vector<WorkerStreams> workers_;
  Candidate global_best_;
};

}  // namespace

std::string to_string(MutationMode mode) {
  return mode == MutationMode::kChaotic ? "chaotic" : "normal";
}

MutationMode parse_mutation_mode(const std::string& name) {
  if (name == "chaotic") return MutationMode::kChaotic;
  if (name == "normal") return MutationMode::kNormal;
  throw std::invalid_argument("mutation_mode: expected 'chaotic' or 'normal', got '" + name + "'");
}

void validate(const EvolutionConfig& cfg) {
  if (cfg.population < 2) fail("population", "must be at least 2");
  if (cfg.elites < 1 || cfg.elites >= cfg.population) {
    fail("elites", "must satisfy 1 <= elites < population");
  }
  if (cfg.generations < 1) fail("generations", "must be at least 1");
  if (cfg.batches < 1) fail("batches", "must be at least 1");
  if (cfg.pairs_per_batch < 1) fail("pairs_per_batch", "must be at least 1");
  if (!(cfg.sigma_low > 0.0)) fail("sigma_low", "must be positive");
  if (!(cfg.sigma_high >= cfg.sigma_low)) fail("sigma_high", "must be >= sigma_low");
  if (!(cfg.acc_threshold > 0.0 && cfg.acc_threshold <= 1.0)) {
    fail("acc_threshold", "must lie in (0, 1]");
  }
  if (cfg.max_attempts < 1) fail("max_attempts", "must be at least 1");
  if (cfg.class_count < 2) fail("class_count", "must be at least 2");
  if (cfg.workers < 1) fail("workers", "must be at least 1");
  if (cfg.validation_pairs < 1) fail("validation_pairs", "must be at least 1");
  if (!(cfg.init_scale > 0.0)) fail("init_scale", "must be positive");
}

MutationResult mutate_chaotic(const LossNetParams& parent, double sigma, ChaosState& chaos,
                              Rng& rng) {
  MutationResult out{parent, chaos_next(chaos)};
  const double step = sigma * out.coefficient;
  for (double& theta : out.child.flat) {
    const double d = (rng() >> 63) ? 1.0 : -1.0;
    theta += step * d * standard_normal(rng);
  }
  return out;
}

LossNetParams mutate_normal(const LossNetParams& parent, double sigma, Rng& rng) {
  LossNetParams child = parent;
  for (double& theta : child.flat) theta += sigma * standard_normal(rng);
  return child;
}

double select_sigma(double best_accuracy, const EvolutionConfig& cfg) {
  return best_accuracy < cfg.acc_threshold ? cfg.sigma_high : cfg.sigma_low;
}

PairSet validation_pair_set(const EvolutionConfig& cfg, const MixtureConfig& mixture) {
  Rng rng = make_rng(cfg.seed, {kStreamValidation});
  return draw_pair_set(mixture, cfg.class_count, 1, cfg.validation_pairs, rng);
}

EvolutionResult run_evolution(const EvolutionConfig& cfg, const MixtureConfig& mixture,
                              const RecordSink& sink, const EvolutionHooks& hooks) {
  validate(cfg);
  validate(mixture);
  Evolution evo(cfg, mixture, sink, hooks);
  return evo.run();
}

}  // namespace edl
