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

#include "edl/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include "edl/checkpoint.hpp"
#include "edl/downstream.hpp"
#include "edl/fitness.hpp"
#include "json.hpp"

namespace edl {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string fmt6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

void write_file(const fs::path& path, const std::string& content) {
  ensure_dir(path.parent_path().empty() ? fs::path(".") : path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << content;
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json report_json(const FitnessReport& r) {
  return json{{"fitness", r.fitness},
              {"accuracy", r.accuracy},
              {"pair_count", r.pair_count},
              {"batch_count", r.batch_count}};
}

json candidate_json(const Candidate& c) {
  json j{{"fitness", c.fitness}, {"accuracy", c.accuracy}, {"lineage", c.lineage}};
  j["validation"] = c.validation ? report_json(*c.validation) : json(nullptr);
  return j;
}

json stats_json(const RunStats& s) {
  return json{{"final_best", s.final_best}, {"mean_fit", s.mean_fit},
              {"max_acc", s.max_acc},       {"mean_acc", s.mean_acc},
              {"std_acc", s.std_acc},       {"epoch_at_best", s.epoch_at_best}};
}

// Accuracy columns in percent, as in the usual ablation table.
std::string stats_csv_row(const std::string& label, const RunStats& s) {
  return label + "," + fmt6(s.final_best) + "," + fmt6(s.mean_fit) + "," + fmt6(100.0 * s.max_acc) +
         "," + fmt6(100.0 * s.mean_acc) + "," + fmt6(100.0 * s.std_acc) + "," +
         fmt6(s.epoch_at_best) + "\n";
}

constexpr const char* kStatsHeader =
    "final_best_fit,mean_fit,max_acc_pct,mean_acc_pct,std_acc_pct,epoch_at_best";

RunStats mean_stats(std::span<const RunStats> runs) {
  RunStats m;
  const double n = static_cast<double>(runs.size());
  for (const RunStats& s : runs) {
    m.final_best += s.final_best / n;
    m.mean_fit += s.mean_fit / n;
    m.max_acc += s.max_acc / n;
    m.mean_acc += s.mean_acc / n;
    m.std_acc += s.std_acc / n;
    m.epoch_at_best += s.epoch_at_best / n;
  }
  return m;
}

double relative_pct(double ours, double base) {
  return base == 0.0 ? 0.0 : 100.0 * (ours - base) / base;
}

// Maps exceptions from a command body onto exit codes.
template <typename Fn>
int guarded(std::ostream& err, Fn&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const CheckpointError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

// Runs one evolution and streams its log rows to `log_path`.
EvolutionResult run_logged(const RunConfig& cfg, const fs::path& log_path) {
  ensure_dir(log_path.parent_path());
  std::ofstream log(log_path, std::ios::binary | std::ios::trunc);
  if (!log) throw IoError("cannot open " + log_path.string() + " for writing");
  const std::string run_id = make_run_id(cfg);
  RecordSink sink = [&](const GenerationRecord& rec) {
    log << log_row_json(rec, run_id, cfg.log_timestamps) << "\n";
    log.flush();
    if (!log) throw IoError("write failed for " + log_path.string());
  };
  return run_evolution(cfg.evolution, cfg.mixture, sink);
}

}  // namespace

RunStats summarize(std::span<const GenerationRecord> records) {
  RunStats s;
  if (records.empty()) return s;
  const double n = static_cast<double>(records.size());
  s.final_best = records.back().global_best_fit;
  s.max_acc = 0.0;
  for (const GenerationRecord& r : records) {
    s.mean_fit += r.global_best_fit / n;
    s.mean_acc += r.best_acc / n;
    s.max_acc = std::max(s.max_acc, r.best_acc);
  }
  double ss = 0.0;
  for (const GenerationRecord& r : records) ss += (r.best_acc - s.mean_acc) * (r.best_acc - s.mean_acc);
  s.std_acc = std::sqrt(ss / n);
  for (const GenerationRecord& r : records) {
    if (r.global_best_fit == s.final_best) {
      s.epoch_at_best = static_cast<double>(r.generation);
      break;
    }
  }
  return s;
}

RunStats relative_gain(const RunStats& chaotic, const RunStats& normal) {
  RunStats g;
  g.final_best = relative_pct(chaotic.final_best, normal.final_best);
  g.mean_fit = relative_pct(chaotic.mean_fit, normal.mean_fit);
  g.max_acc = relative_pct(chaotic.max_acc, normal.max_acc);
  g.mean_acc = chaotic.mean_acc - normal.mean_acc;
  g.std_acc = relative_pct(chaotic.std_acc, normal.std_acc);
  g.epoch_at_best = chaotic.epoch_at_best - normal.epoch_at_best;
  return g;
}

std::string make_run_id(const RunConfig& cfg) {
  // FNV-1a over the canonical config text. The output directory is left
  // out so identical runs written to different places share an id.
  RunConfig keyed = cfg;
  keyed.output_dir.clear();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : config_to_json(keyed)) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%s-seed%llu-%08llx", to_string(cfg.evolution.mutation_mode).c_str(),
                static_cast<unsigned long long>(cfg.evolution.seed),
                static_cast<unsigned long long>(h & 0xffffffffULL));
  return buf;
}

std::string log_row_json(const GenerationRecord& rec, const std::string& run_id,
                         bool with_timestamp) {
  json row;
  row["schema_version"] = kLogSchemaVersion;
  row["run_id"] = run_id;
  row["timestamp"] = with_timestamp ? json(utc_now()) : json(nullptr);
  row["generation"] = rec.generation;
  row["global_best_fit"] = rec.global_best_fit;
  row["global_best_acc"] = rec.global_best_acc;
  row["pop_best_fit"] = rec.pop_best_fit;
  row["pop_mean_fit"] = rec.pop_mean_fit;
  row["best_acc"] = rec.best_acc;
  row["sigma"] = rec.sigma;
  row["attempts"] = rec.attempts;
  row["accepted"] = rec.accepted;
  row["exhausted"] = rec.exhausted;
  row["chaos_min"] = optional_number(rec.chaos_min);
  row["chaos_mean"] = optional_number(rec.chaos_mean);
  row["chaos_max"] = optional_number(rec.chaos_max);
  return row.dump();
}

AblationResult run_ablation(const RunConfig& cfg, const fs::path& out_dir) {
  if (cfg.ablation_seeds.size() < 2) {
    throw ConfigError("ablation_seeds", "needs at least 2 seeds (std across seeds is undefined otherwise)");
  }
  AblationResult result;
  std::vector<RunStats> chaotic, normal;
  for (MutationMode mode : {MutationMode::kChaotic, MutationMode::kNormal}) {
    for (std::uint64_t seed : cfg.ablation_seeds) {
      RunConfig run_cfg = cfg;
      run_cfg.evolution.mutation_mode = mode;
      run_cfg.evolution.seed = seed;
      AblationRun run;
      run.mode = mode;
      run.seed = seed;
      if (out_dir.empty()) {
        run.result = run_evolution(run_cfg.evolution, run_cfg.mixture);
      } else {
        const fs::path dir = out_dir / "ablation" / to_string(mode) / ("seed_" + std::to_string(seed));
        run.result = run_logged(run_cfg, dir / "log.jsonl");
        save_params(run.result.best.params, dir / "checkpoint.json");
      }
      run.stats = summarize(run.result.records);
      (mode == MutationMode::kChaotic ? chaotic : normal).push_back(run.stats);
      result.runs.push_back(std::move(run));
    }
  }
  result.chaotic_mean = mean_stats(chaotic);
  result.normal_mean = mean_stats(normal);
  result.gain = relative_gain(result.chaotic_mean, result.normal_mean);
  return result;
}

void write_ablation_tables(const AblationResult& result, const fs::path& out_dir) {
  std::string summary = std::string("mutation,") + kStatsHeader + "\n";
  summary += stats_csv_row("normal", result.normal_mean);
  summary += stats_csv_row("chaotic", result.chaotic_mean);
  const RunStats& g = result.gain;
  // Gain row: percentages for relative columns, raw differences otherwise.
  summary += "gain," + fmt6(g.final_best) + "%," + fmt6(g.mean_fit) + "%," + fmt6(g.max_acc) + "%," +
             fmt6(100.0 * g.mean_acc) + "," + fmt6(g.std_acc) + "%," + fmt6(g.epoch_at_best) + "\n";
  write_file(out_dir / "ablation_summary.csv", summary);

  std::string per_seed = std::string("mutation,seed,") + kStatsHeader + "\n";
  for (const AblationRun& r : result.runs) {
    per_seed += stats_csv_row(to_string(r.mode) + "," + std::to_string(r.seed), r.stats);
  }
  write_file(out_dir / "ablation_per_seed.csv", per_seed);

  // Seed-averaged best-so-far curves.
  std::size_t generations = 0;
  for (const AblationRun& r : result.runs) generations = std::max(generations, r.result.records.size());
  std::string curves = "generation,chaotic_mean,chaotic_std,normal_mean,normal_std\n";
  for (std::size_t g_idx = 0; g_idx < generations; ++g_idx) {
    curves += std::to_string(g_idx + 1);
    for (MutationMode mode : {MutationMode::kChaotic, MutationMode::kNormal}) {
      std::vector<double> values;
      for (const AblationRun& r : result.runs) {
        if (r.mode == mode && g_idx < r.result.records.size()) {
          values.push_back(r.result.records[g_idx].global_best_fit);
        }
      }
      double mean = 0.0;
      for (double v : values) mean += v;
      mean /= static_cast<double>(values.size());
      double ss = 0.0;
      for (double v : values) ss += (v - mean) * (v - mean);
      const double sd = values.size() > 1 ? std::sqrt(ss / static_cast<double>(values.size() - 1)) : 0.0;
      curves += "," + format_double17(mean) + "," + format_double17(sd);
    }
    curves += "\n";
  }
  write_file(out_dir / "ablation_curves.csv", curves);
}

int cmd_pretrain(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    validate(cfg);
    const fs::path dir = resolve_output_dir(cfg);
    const EvolutionResult res = run_logged(cfg, dir / "log.jsonl");
    save_params(res.best.params, dir / "checkpoint.json");
    save_params(res.global_best.params, dir / "global_best.json");

    const RunStats stats = summarize(res.records);
    json summary;
    summary["run_id"] = make_run_id(cfg);
    summary["mutation_mode"] = to_string(cfg.evolution.mutation_mode);
    summary["seed"] = cfg.evolution.seed;
    summary["generations"] = res.records.size();
    summary["stats"] = stats_json(stats);
    summary["best"] = candidate_json(res.best);
    summary["global_best"] = candidate_json(res.global_best);
    write_file(dir / "summary.json", summary.dump(2) + "\n");
    write_file(dir / "summary.csv", std::string("mutation,") + kStatsHeader + "\n" +
                                        stats_csv_row(to_string(cfg.evolution.mutation_mode), stats));

    out << "final_best_fit " << fmt6(stats.final_best) << "  mean_fit " << fmt6(stats.mean_fit)
        << "  max_acc " << fmt6(100.0 * stats.max_acc) << "%  mean_acc " << fmt6(100.0 * stats.mean_acc)
        << "%  std_acc " << fmt6(100.0 * stats.std_acc) << "  epoch@best " << stats.epoch_at_best << "\n";
    out << "wrote " << (dir / "checkpoint.json").string() << "\n";
    return int{kExitOk};
  });
}

int cmd_ablate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    validate(cfg);
    const fs::path dir = resolve_output_dir(cfg);
    const AblationResult result = run_ablation(cfg, dir);
    write_ablation_tables(result, dir);
    out << std::string("mutation,") + kStatsHeader + "\n"
        << stats_csv_row("normal", result.normal_mean) << stats_csv_row("chaotic", result.chaotic_mean);
    out << "wrote " << (dir / "ablation_summary.csv").string() << "\n";
    return int{kExitOk};
  });
}

int cmd_eval(const fs::path& checkpoint, const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    validate(cfg);
    const LossNetParams params = load_params(checkpoint);
    Rng rng = make_rng(cfg.eval.seed);
    const PairSet set = draw_pair_set(cfg.mixture, params.class_count, 1, cfg.eval.pairs, rng);
    json j = report_json(evaluate(params, set));
    j["class_count"] = params.class_count;
    j["eval_seed"] = cfg.eval.seed;
    out << j.dump() << "\n";
    return int{kExitOk};
  });
}

int cmd_downstream(const fs::path& checkpoint, const RunConfig& cfg, std::ostream& out,
                   std::ostream& err) {
  return guarded(err, [&] {
    validate(cfg);
    const LossNetParams params = load_params(checkpoint);
    if (params.class_count != cfg.downstream.blobs.class_count) {
      throw ConfigError("blob_class_count",
                        "class count mismatch: checkpoint has " + std::to_string(params.class_count) +
                            " classes, blob config has " +
                            std::to_string(cfg.downstream.blobs.class_count));
    }
    const BlobDataset data = make_blobs(cfg.downstream.blobs);
    const std::vector<LossSummary> rows = compare_losses(data, params, cfg.downstream.train,
                                                         cfg.downstream.seeds, cfg.downstream.train_seed);
    const fs::path dir = resolve_output_dir(cfg);

    std::string csv = "loss,mean_final_accuracy,std_final_accuracy,seeds,per_seed\n";
    std::string history;
    for (const LossSummary& s : rows) {
      std::string per_seed;
      for (std::size_t i = 0; i < s.final_accuracy.size(); ++i) {
        per_seed += (i ? ";" : "") + fmt6(s.final_accuracy[i]);
      }
      csv += s.loss_name + "," + fmt6(s.mean) + "," + fmt6(s.std) + "," +
             std::to_string(s.final_accuracy.size()) + "," + per_seed + "\n";
      for (std::size_t seed = 0; seed < s.histories.size(); ++seed) {
        const TrainHistory& h = s.histories[seed];
        for (std::size_t e = 0; e < h.epoch_accuracy.size(); ++e) {
          json row{{"loss", s.loss_name},
                   {"seed", seed},
                   {"epoch", e + 1},
                   {"train_accuracy", h.epoch_accuracy[e]},
                   {"mean_loss", h.epoch_loss[e]}};
          history += row.dump() + "\n";
        }
      }
    }
    write_file(dir / "downstream_summary.csv", csv);
    write_file(dir / "downstream_history.jsonl", history);
    out << csv;
    return int{kExitOk};
  });
}

int cmd_probe_variance(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    validate(cfg);
    Rng rng = make_rng(cfg.probe.seed);
    const LossNetParams params = cfg.probe.checkpoint.empty()
                                     ? init_params(cfg.evolution.class_count, rng, cfg.evolution.init_scale)
                                     : load_params(cfg.probe.checkpoint);
    const std::vector<VarianceRow> rows =
        variance_probe(params, cfg.mixture, params.class_count, cfg.evolution.pairs_per_batch,
                       cfg.probe.b_values, cfg.probe.trials, rng);
    const double base = rows.front().variance;
    const double base_b = static_cast<double>(rows.front().batches);
    std::string csv = "batches,mean_fitness,variance,ratio_to_first,expected_ratio\n";
    for (const VarianceRow& r : rows) {
      const double ratio = base > 0.0 ? r.variance / base : 0.0;
      csv += std::to_string(r.batches) + "," + format_double17(r.mean) + "," + format_double17(r.variance) +
             "," + format_double17(ratio) + "," +
             format_double17(base_b / static_cast<double>(r.batches)) + "\n";
    }
    write_file(resolve_output_dir(cfg) / "variance.csv", csv);
    out << csv;
    return int{kExitOk};
  });
}

int cmd_gd_pretrain(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    validate(cfg);
    Rng rng = make_rng(cfg.evolution.seed, {0x6D});
    EvolutionConfig gd_cfg = cfg.evolution;
    gd_cfg.init_scale = cfg.gd.init_scale;
    const Candidate cand = gd_pretrain(gd_cfg, cfg.mixture, cfg.gd.steps, cfg.gd.learning_rate, rng);
    const fs::path dir = resolve_output_dir(cfg);
    ensure_dir(dir);
    save_params(cand.params, dir / "gd_checkpoint.json");
    json summary{{"steps", cfg.gd.steps},
                 {"learning_rate", cfg.gd.learning_rate},
                 {"init_scale", cfg.gd.init_scale}};
    summary["validation"] = report_json(*cand.validation);
    write_file(dir / "gd_summary.json", summary.dump(2) + "\n");
    out << summary["validation"].dump() << "\n";
    return int{kExitOk};
  });
}

}  // namespace edl
