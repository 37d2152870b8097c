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

#include "edl/chaos.hpp"

#include <cmath>

namespace edl {

namespace {

constexpr double kFixedPoint = 0.75;

bool near_fixed_point(double x) { return std::abs(x - kFixedPoint) <= kChaosEdge; }

double draw_start(std::uint64_t& aux) {
  for (;;) {
    const double u = (static_cast<double>(splitmix64(aux) >> 11) + 0.5) * 0x1.0p-53;
    const double x = kChaosInitMargin + (1.0 - 2.0 * kChaosInitMargin) * u;
    if (!near_fixed_point(x)) return x;
  }
}

}  // namespace

ChaosState chaos_init(Rng& rng) {
  ChaosState s;
  s.aux = rng();
  s.x = draw_start(s.aux);
  return s;
}

ChaosState chaos_from_value(double x, std::uint64_t aux_seed) {
  ChaosState s;
  s.x = x;
  s.aux = aux_seed;
  return s;
}

double chaos_next(ChaosState& state) {
  const double next = state.r * state.x * (1.0 - state.x);
  ++state.step_index;
  if (!(next > kChaosEdge && next < 1.0 - kChaosEdge) || next == state.x) {
    state.x = draw_start(state.aux);
    ++state.reseeds;
  } else {
    state.x = next;
  }
  return state.x;
}

}  // namespace edl
