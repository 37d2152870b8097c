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

// Loss-network checkpoints.
//
// {
//   "format_version": 1,
//   "class_count": 10,
//   "layer_dims": [20, 10, 20, 20, 1],
//   "activation": "softplus",
//   "flat": ["-1.2345678901234567e-01", ...]
// }
//
// Doubles are stored as decimal strings with 17 significant digits, which
// round-trips every finite IEEE-754 double exactly.

#ifndef EDL_CHECKPOINT_HPP_
#define EDL_CHECKPOINT_HPP_

#include <filesystem>
#include <stdexcept>
#include <string>

#include "edl/lossnet.hpp"

namespace edl {

inline constexpr int kCheckpointFormatVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  enum class Kind { kIo, kMalformed, kVersion, kShape };

  CheckpointError(Kind kind, std::string field, const std::string& what)
      : std::runtime_error(what), kind_(kind), field_(std::move(field)) {}

  Kind kind() const { return kind_; }
  const std::string& field() const { return field_; }

 private:
  Kind kind_;
  std::string field_;
};

/// %.17g rendering used wherever a double must round-trip.
std::string format_double17(double v);

std::string params_to_json(const LossNetParams& params);
LossNetParams params_from_json(const std::string& text);

void save_params(const LossNetParams& params, const std::filesystem::path& path);
LossNetParams load_params(const std::filesystem::path& path);

}  // namespace edl

#endif  // EDL_CHECKPOINT_HPP_
