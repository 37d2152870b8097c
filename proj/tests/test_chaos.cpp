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

#include <array>
#include <cmath>

#include "doctest.h"
#include "edl/chaos.hpp"

using namespace edl;

TEST_CASE("init range and determinism") {
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    Rng a(seed), b(seed);
    const ChaosState s = chaos_init(a);
    CHECK(s.x > 0.0);
    CHECK(s.x < 1.0);
    CHECK(s.x != 0.75);
    CHECK(s.r == 4.0);
    CHECK(chaos_init(b).x == s.x);
  }
}

TEST_CASE("one step by hand") {
  ChaosState s = chaos_from_value(0.2, 1);
  CHECK(chaos_next(s) == doctest::Approx(0.64).epsilon(1e-15));
  CHECK(s.reseeds == 0);
}

TEST_CASE("degenerate starting values are reseeded") {
  for (double x0 : {0.5, 0.75, 0.25, 0.0, 1.0}) {
    ChaosState s = chaos_from_value(x0, 99);
    double prev = x0;
    int repeats = 0;
    for (int i = 0; i < 10000; ++i) {
      const double x = chaos_next(s);
      REQUIRE(x > 0.0);
      REQUIRE(x < 1.0);
      if (x == prev) ++repeats;
      prev = x;
    }
    CHECK(repeats == 0);
    CHECK(s.reseeds >= 1);
  }
}

TEST_CASE("long run: arcsine shape, bounds, intermittency") {
  Rng rng(2024);
  ChaosState s = chaos_init(rng);
  std::array<long, 10> deciles{};
  long edge = 0, centre = 0;
  bool saw_small = false, saw_large = false;
  long windows_missing = 0;
  const long steps = 1000000;
  for (long i = 0; i < steps; ++i) {
    const double x = chaos_next(s);
    REQUIRE(x > 0.0);
    REQUIRE(x < 1.0);
    ++deciles[std::min(9, static_cast<int>(x * 10.0))];
    if (x <= 0.05 || x >= 0.95) ++edge;
    if (x >= 0.475 && x <= 0.525) ++centre;
    saw_small = saw_small || x < 0.1;
    saw_large = saw_large || x > 0.9;
    if ((i + 1) % 1000 == 0) {
      if (!(saw_small && saw_large)) ++windows_missing;
      saw_small = saw_large = false;
    }
  }
  CHECK(edge > centre);
  // Decile masses of the arcsine law are about 0.205 at the ends and 0.064
  // at the central deciles.
  CHECK(deciles[0] >= 2 * deciles[4]);
  CHECK(deciles[0] >= 2 * deciles[5]);
  CHECK(deciles[9] >= 2 * deciles[4]);
  CHECK(deciles[9] >= 2 * deciles[5]);
  CHECK(deciles[0] / static_cast<double>(steps) == doctest::Approx(0.2048).epsilon(0.05));
  CHECK(windows_missing == 0);
}

TEST_CASE("sequence is a pure function of the state") {
  Rng a(5), b(5);
  ChaosState s = chaos_init(a), t = chaos_init(b);
  for (int i = 0; i < 100000; ++i) REQUIRE(chaos_next(s) == chaos_next(t));
  CHECK(s.step_index == 100000);
}
