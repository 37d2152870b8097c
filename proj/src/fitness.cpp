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

#include "edl/fitness.hpp"

#include <algorithm>
#include <stdexcept>
#include <thread>

namespace edl {

namespace {

int signum(double v) { return (v > 0.0) - (v < 0.0); }

// Running mean anchored at the first value, so a constant sequence averages
// to exactly that constant.
class AnchoredMean {
 public:
  void add(double v) {
    if (n_ == 0) anchor_ = v;
    sum_ += v - anchor_;
    ++n_;
  }
  double value() const { return n_ == 0 ? 0.0 : anchor_ + sum_ / static_cast<double>(n_); }

 private:
  double anchor_ = 0.0;
  double sum_ = 0.0;
  std::size_t n_ = 0;
};

}  // namespace

PairComparison make_comparison(double hardness_a, double hardness_b, double loss_a,
                               double loss_b) {
  PairComparison cmp;
  cmp.delta_d = hardness_a - hardness_b;
  cmp.sign = signum(cmp.delta_d);
  cmp.delta_l = loss_a - loss_b;
  return cmp;
}

PairComparison compare_pair(const LossNetParams& params, const ProbLabelPair& a,
                            const ProbLabelPair& b) {
  if (a.class_count() != b.class_count()) {
    throw std::invalid_argument("compare_pair: class count mismatch");
  }
  return make_comparison(hardness(a), hardness(b), forward(params, a), forward(params, b));
}

PairSet draw_pair_set(const MixtureConfig& cfg, std::size_t c, std::size_t batches,
                      std::size_t pairs_per_batch, Rng& rng) {
  if (batches == 0) throw std::invalid_argument("batches must be at least 1");
  if (pairs_per_batch == 0) throw std::invalid_argument("pairs_per_batch must be at least 1");
  PairSet set;
  set.class_count = c;
  set.pairs_per_batch = pairs_per_batch;
  set.batches.reserve(batches);
  for (std::size_t b = 0; b < batches; ++b) {
    set.batches.push_back(sample_batch(cfg, c, 2 * pairs_per_batch, rng));
  }
  return set;
}

FitnessReport score_losses(const PairSet& set, std::span<const double> losses) {
  if (losses.size() != set.sample_count()) {
    throw std::invalid_argument("score_losses: loss count does not match the pair set");
  }
  FitnessReport report;
  report.batch_count = set.batches.size();
  std::size_t strict = 0;
  std::size_t consistent = 0;
  AnchoredMean across;
  std::size_t k = 0;
  for (const auto& batch : set.batches) {
    AnchoredMean within;
    for (std::size_t i = 0; i + 1 < batch.size(); i += 2, k += 2) {
      const PairComparison cmp =
          make_comparison(hardness(batch[i]), hardness(batch[i + 1]), losses[k], losses[k + 1]);
      within.add(ranking_loss(cmp));
      if (cmp.sign != 0) {
        ++strict;
        if (cmp.sign * cmp.delta_l > 0.0) ++consistent;
      }
    }
    across.add(within.value());
    report.pair_count += set.pairs_per_batch;
  }
  report.fitness = across.value();
  report.accuracy = strict == 0 ? 0.0 : static_cast<double>(consistent) / static_cast<double>(strict);
  return report;
}

FitnessReport evaluate(const LossNetParams& params, const PairSet& set) {
  if (params.class_count != set.class_count) {
    throw std::invalid_argument("evaluate: class count mismatch");
  }
  std::vector<double> losses;
  losses.reserve(set.sample_count());
  for (const auto& batch : set.batches) {
    for (const auto& s : batch) losses.push_back(forward(params, s));
  }
  return score_losses(set, losses);
}

FitnessReport evaluate(const LossFunction& loss, const PairSet& set) {
  std::vector<double> losses;
  losses.reserve(set.sample_count());
  for (const auto& batch : set.batches) {
    for (const auto& s : batch) losses.push_back(loss(s));
  }
  return score_losses(set, losses);
}

std::vector<FitnessReport> evaluate_all(std::span<const LossNetParams> candidates,
                                        const PairSet& set, std::size_t workers) {
  std::vector<FitnessReport> out(candidates.size());
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(candidates.size(), 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < candidates.size(); ++i) out[i] = evaluate(candidates[i], set);
    return out;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < candidates.size(); i += workers) {
          out[i] = evaluate(candidates[i], set);
        }
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

FitnessReport estimate_fitness(const LossNetParams& params, const MixtureConfig& cfg,
                               std::size_t c, std::size_t batches,
                               std::size_t pairs_per_batch, Rng& rng) {
  return evaluate(params, draw_pair_set(cfg, c, batches, pairs_per_batch, rng));
}

std::vector<VarianceRow> variance_probe(const LossNetParams& params,
                                        const MixtureConfig& cfg, std::size_t c,
                                        std::size_t pairs_per_batch,
                                        std::span<const std::size_t> b_values,
                                        std::size_t trials, Rng& rng) {
  if (trials < kMinVarianceTrials) {
    throw std::invalid_argument("variance probe needs at least " +
                                std::to_string(kMinVarianceTrials) + " trials");
  }
  std::vector<VarianceRow> rows;
  for (std::size_t b : b_values) {
    std::vector<double> estimates;
    estimates.reserve(trials);
    for (std::size_t t = 0; t < trials; ++t) {
      Rng trial_rng(rng());
      estimates.push_back(estimate_fitness(params, cfg, c, b, pairs_per_batch, trial_rng).fitness);
    }
    AnchoredMean m;
    for (double e : estimates) m.add(e);
    const double mean = m.value();
    double ss = 0.0;
    for (double e : estimates) ss += (e - mean) * (e - mean);
    rows.push_back({b, mean, ss / static_cast<double>(trials - 1)});
  }
  return rows;
}

}  // namespace edl
