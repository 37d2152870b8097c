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

#ifndef EDL_RNG_HPP_
#define EDL_RNG_HPP_

#include <cstdint>
#include <initializer_list>
#include <random>

namespace edl {

/// The random stream threaded through every stochastic operation.
using Rng = std::mt19937_64;

/// One splitmix64 step; also used as a stateless mixer.
std::uint64_t splitmix64(std::uint64_t& state);

/// Derives an independent child seed from a base seed and a path of tags,
/// e.g. derive_seed(run_seed, {kStreamChaos, worker}).
std::uint64_t derive_seed(std::uint64_t base,
                          std::initializer_list<std::uint64_t> tags);

inline Rng make_rng(std::uint64_t base,
                    std::initializer_list<std::uint64_t> tags = {}) {
  return Rng(derive_seed(base, tags));
}

/// Uniform draw on the open interval (0, 1).
double uniform_open01(Rng& rng);

double standard_normal(Rng& rng);

/// Uniform index in [0, n).
std::size_t uniform_index(Rng& rng, std::size_t n);

}  // namespace edl

#endif  // EDL_RNG_HPP_
