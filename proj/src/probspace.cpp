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

#include "edl/probspace.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace edl {

namespace {

constexpr double kWeightTolerance = 1e-9;
constexpr double kSumTolerance = 1e-9;
constexpr double kExtremeBand = 0.05;
constexpr double kBoundaryMassLow = 0.6;
constexpr int kBoundaryRetries = 16;

void fail(const std::string& field, const std::string& reason) {
  throw std::invalid_argument("mixture." + field + ": " + reason);
}

// Index uniformly drawn from {0..c-1} \ {skip}.
std::size_t other_class(Rng& rng, std::size_t c, std::size_t skip) {
  std::size_t k = uniform_index(rng, c - 1);
  return k >= skip ? k + 1 : k;
}

// Writes `mass` split flatly over every coordinate of p except those flagged
// in `taken`.
void spread_remainder(std::vector<double>& p, const std::vector<bool>& taken,
                      double mass, Rng& rng) {
  std::vector<double> share(p.size() - std::count(taken.begin(), taken.end(), true));
  if (share.empty()) return;
  flat_simplex(share, rng);
  std::size_t s = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!taken[i]) p[i] = mass * share[s++];
  }
}

void clamp_and_renormalize(std::vector<double>& p) {
  for (double& v : p) v = std::max(v, kProbabilityFloor);
  const double total = std::accumulate(p.begin(), p.end(), 0.0);
  for (double& v : p) v /= total;
}

void sample_extreme(std::vector<double>& p, std::size_t y,
                    const MixtureConfig& cfg, Rng& rng) {
  const std::size_t c = p.size();
  const bool easy = uniform_open01(rng) < 0.5;
  const std::size_t dominant = easy ? y : other_class(rng, c, y);
  // Beta(1, k) via inversion: 1 - U^(1/k).
  const double b = 1.0 - std::pow(uniform_open01(rng), 1.0 / cfg.extreme_concentration);
  const double top = 1.0 - kExtremeBand * b;
  std::vector<bool> taken(c, false);
  taken[dominant] = true;
  p[dominant] = top;
  spread_remainder(p, taken, 1.0 - top, rng);
}

void sample_boundary(std::vector<double>& p, std::size_t y,
                     const MixtureConfig& cfg, Rng& rng) {
  const std::size_t c = p.size();
  const std::size_t rival = other_class(rng, c, y);
  const double gap = cfg.boundary_gap * uniform_open01(rng);
  const bool true_ahead = uniform_open01(rng) < 0.5;

  // Lower bound on the shared mass that keeps the pair on top even when the
  // remainder is spread evenly.
  double mass = 1.0;
  if (c > 2) {
    const double n_rest = static_cast<double>(c - 2);
    const double low = std::max(kBoundaryMassLow, (2.0 + n_rest * gap) / (2.0 + n_rest));
    mass = low + (1.0 - low) * uniform_open01(rng);
  }
  const double hi = 0.5 * (mass + gap);
  const double lo = 0.5 * (mass - gap);
  p[y] = true_ahead ? hi : lo;
  p[rival] = true_ahead ? lo : hi;

  std::vector<bool> taken(c, false);
  taken[y] = taken[rival] = true;
  const double remainder = 1.0 - mass;
  for (int attempt = 0; attempt < kBoundaryRetries; ++attempt) {
    spread_remainder(p, taken, remainder, rng);
    bool ok = true;
    for (std::size_t i = 0; i < c; ++i) {
      if (!taken[i] && p[i] > lo) ok = false;
    }
    if (ok) return;
  }
  for (std::size_t i = 0; i < c; ++i) {
    if (!taken[i]) p[i] = remainder / static_cast<double>(c - 2);
  }
}

}  // namespace

void validate(const MixtureConfig& cfg) {
  const double w[] = {cfg.weight_uniform, cfg.weight_extreme, cfg.weight_boundary};
  const char* names[] = {"weight_uniform", "weight_extreme", "weight_boundary"};
  for (int i = 0; i < 3; ++i) {
    if (!(w[i] >= 0.0 && w[i] <= 1.0)) fail(names[i], "must lie in [0, 1]");
  }
  if (std::abs(w[0] + w[1] + w[2] - 1.0) > kWeightTolerance) {
    fail("weight_uniform", "mixture weights must sum to 1");
  }
  if (!(cfg.extreme_concentration > 0.0) || !std::isfinite(cfg.extreme_concentration)) {
    fail("extreme_concentration", "must be positive and finite");
  }
  if (!(cfg.boundary_gap >= 0.0 && cfg.boundary_gap <= 1.0)) {
    fail("boundary_gap", "must lie in [0, 1]");
  }
}

void validate(const ProbLabelPair& pair) {
  if (pair.p.size() < 2) throw std::invalid_argument("pair: fewer than 2 classes");
  if (pair.y >= pair.p.size()) throw std::invalid_argument("pair: label out of range");
  double total = 0.0;
  for (double v : pair.p) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("pair: entry outside [0, 1]");
    total += v;
  }
  if (std::abs(total - 1.0) > kSumTolerance) {
    throw std::invalid_argument("pair: entries do not sum to 1");
  }
}

void flat_simplex(std::span<double> out, Rng& rng) {
  double total = 0.0;
  for (double& v : out) {
    v = -std::log(uniform_open01(rng));
    total += v;
  }
  for (double& v : out) v /= total;
}

ProbLabelPair sample_pair(const MixtureConfig& cfg, std::size_t c, Rng& rng) {
  if (c < 2) throw std::invalid_argument("class count must be at least 2");
  validate(cfg);

  ProbLabelPair pair;
  pair.p.assign(c, 0.0);
  pair.y = uniform_index(rng, c);

  const double u = uniform_open01(rng);
  if (u < cfg.weight_uniform) {
    flat_simplex(pair.p, rng);
  } else if (u < cfg.weight_uniform + cfg.weight_extreme) {
    sample_extreme(pair.p, pair.y, cfg, rng);
  } else {
    sample_boundary(pair.p, pair.y, cfg, rng);
  }
  clamp_and_renormalize(pair.p);
  return pair;
}

std::vector<ProbLabelPair> sample_batch(const MixtureConfig& cfg,
                                        std::size_t c, std::size_t n,
                                        Rng& rng) {
  if (n == 0) throw std::invalid_argument("batch size must be at least 1");
  std::vector<ProbLabelPair> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(sample_pair(cfg, c, rng));
  return out;
}

}  // namespace edl
