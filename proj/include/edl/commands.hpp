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

// Command implementations behind the `edl` tool. Each command returns a
// process exit status: 0 iff it completed and every output was written.

#ifndef EDL_COMMANDS_HPP_
#define EDL_COMMANDS_HPP_

#include <filesystem>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "edl/evolve.hpp"
#include "edl/run_config.hpp"

namespace edl {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,    // bad config, flag, or argument
  kExitIo = 3,        // unreadable input, unwritable output, bad checkpoint
  kExitRuntime = 4,   // numeric failure during a run
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kLogSchemaVersion = 1;

/// Per-run statistics with the column meanings used in the ablation table:
///   final_best    last global_best_fit
///   mean_fit      mean of global_best_fit over generations
///   max/mean/std  of the per-generation best candidate's accuracy
///                 (population std; fractions in [0, 1])
///   epoch_at_best first generation whose global_best_fit equals the final one
struct RunStats {
  double final_best = 0.0;
  double mean_fit = 0.0;
  double max_acc = 0.0;
  double mean_acc = 0.0;
  double std_acc = 0.0;
  double epoch_at_best = 0.0;
};

RunStats summarize(std::span<const GenerationRecord> records);

/// Relative change in percent for the fitness, max-acc and std-acc columns,
/// absolute change (percentage points / generations) for mean-acc and
/// epoch_at_best.
RunStats relative_gain(const RunStats& chaotic, const RunStats& normal);

/// Deterministic identifier: mode, seed and a hash of the configuration.
std::string make_run_id(const RunConfig& cfg);

/// One JSONL log line (no trailing newline).
std::string log_row_json(const GenerationRecord& rec, const std::string& run_id,
                         bool with_timestamp);

struct AblationRun {
  MutationMode mode = MutationMode::kChaotic;
  std::uint64_t seed = 0;
  EvolutionResult result;
  RunStats stats;
};

struct AblationResult {
  std::vector<AblationRun> runs;  // all chaotic seeds, then all normal seeds
  RunStats chaotic_mean;
  RunStats normal_mean;
  RunStats gain;
};

/// Both mutation modes over cfg.ablation_seeds, everything else fixed.
/// Writes per-run logs and checkpoints under `out_dir` when it is non-empty.
AblationResult run_ablation(const RunConfig& cfg, const std::filesystem::path& out_dir);

/// Writes the ablation CSVs (summary, per-seed, curves) into `out_dir`.
void write_ablation_tables(const AblationResult& result, const std::filesystem::path& out_dir);

int cmd_pretrain(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_ablate(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_eval(const std::filesystem::path& checkpoint, const RunConfig& cfg, std::ostream& out,
             std::ostream& err);
int cmd_downstream(const std::filesystem::path& checkpoint, const RunConfig& cfg,
                   std::ostream& out, std::ostream& err);
int cmd_probe_variance(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_gd_pretrain(const RunConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace edl

#endif  // EDL_COMMANDS_HPP_
