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

// Logistic-map coefficient stream, x <- 4 x (1 - x).
//
// In exact arithmetic the orbit of almost every x0 in (0, 1) is chaotic. In
// floating point some orbits collapse: 0.5 -> 1 -> 0 -> 0 ..., and 0.75 is a
// fixed point. Whenever the next value leaves (1e-9, 1 - 1e-9) or repeats
// the current value, the state is reseeded from an auxiliary splitmix64
// stream carried inside the state, so the sequence stays a pure function of
// the initial state.

#ifndef EDL_CHAOS_HPP_
#define EDL_CHAOS_HPP_

#include <cstdint>

#include "edl/rng.hpp"

namespace edl {

inline constexpr double kLogisticR = 4.0;
inline constexpr double kChaosInitMargin = 1e-6;
inline constexpr double kChaosEdge = 1e-9;

struct ChaosState {
  double x = 0.0;
  double r = kLogisticR;
  std::uint64_t step_index = 0;
  std::uint64_t aux = 0;  // splitmix64 state used for reseeding
  std::uint64_t reseeds = 0;
};

/// x0 ~ Unif(1e-6, 1 - 1e-6), excluding a 1e-9 band around 0.75.
ChaosState chaos_init(Rng& rng);

/// Builds a state with an explicit starting value, e.g. a degenerate one.
ChaosState chaos_from_value(double x, std::uint64_t aux_seed);

/// Advances the map and returns the new coefficient, always in (0, 1).
double chaos_next(ChaosState& state);

}  // namespace edl

#endif  // EDL_CHAOS_HPP_
