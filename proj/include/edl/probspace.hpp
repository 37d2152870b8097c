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

// Synthetic prediction-label pairs on the probability simplex.
//
// A sample is drawn from a three-component mixture:
//   uniform   - flat draw over the simplex (normalized Exp(1) variates)
//   extreme   - one dominant coordinate pushed towards 1; the dominant
//               coordinate is the true class half of the time (easy sample)
//               and a wrong class otherwise (hard sample)
//   boundary  - the true class and one competitor share a mass in
//               [0.6, 1.0] and differ by at most boundary_gap
// The remaining mass of the last two components is split flatly.

#ifndef EDL_PROBSPACE_HPP_
#define EDL_PROBSPACE_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "edl/rng.hpp"

namespace edl {

struct ProbLabelPair {
  std::vector<double> p;
  std::size_t y = 0;

  std::size_t class_count() const { return p.size(); }
};

struct MixtureConfig {
  double weight_uniform = 0.40;
  double weight_extreme = 0.35;
  double weight_boundary = 0.25;
  // Shape of Beta(1, k) for the dominant coordinate's distance from 1
  // (scaled into [0, 0.05]). Larger values push the mass closer to 1.
  double extreme_concentration = 4.0;
  double boundary_gap = 0.05;
};

/// Smallest probability the sampler emits; entries below it are clamped.
inline constexpr double kProbabilityFloor = 1e-12;

/// Throws std::invalid_argument naming the offending field.
void validate(const MixtureConfig& cfg);

/// Throws std::invalid_argument if the pair violates the simplex invariants.
void validate(const ProbLabelPair& pair);

ProbLabelPair sample_pair(const MixtureConfig& cfg, std::size_t c, Rng& rng);

std::vector<ProbLabelPair> sample_batch(const MixtureConfig& cfg,
                                        std::size_t c, std::size_t n,
                                        Rng& rng);

/// Error severity 1 - p[y].
inline double hardness(const ProbLabelPair& pair) { return 1.0 - pair.p[pair.y]; }

/// Flat draw over the simplex written into `out`.
void flat_simplex(std::span<double> out, Rng& rng);

}  // namespace edl

#endif  // EDL_PROBSPACE_HPP_
