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

#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "edl/checkpoint.hpp"
#include "edl/commands.hpp"
#include "json.hpp"

using namespace edl;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "edl_test_commands" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

RunConfig smoke(const fs::path& out) {
  RunConfig cfg;
  cfg.evolution.generations = 1;
  cfg.evolution.population = 2;
  cfg.evolution.elites = 1;
  cfg.evolution.pairs_per_batch = 64;
  cfg.evolution.validation_pairs = 256;
  cfg.output_dir = out;
  cfg.downstream.blobs.points_per_class = 20;
  cfg.downstream.train.epochs = 2;
  cfg.probe.trials = 30;
  cfg.eval.pairs = 512;
  return cfg;
}

struct Run {
  int rc;
  std::string out, err;
};

template <typename Fn>
Run capture(Fn&& fn) {
  std::ostringstream out, err;
  const int rc = fn(out, err);
  return {rc, out.str(), err.str()};
}

}  // namespace

TEST_CASE("summary statistics follow the table definitions") {
  std::vector<GenerationRecord> recs(4);
  const double fit[] = {0.5, 0.4, 0.4, 0.4};
  const double acc[] = {0.6, 0.8, 1.0, 0.6};
  for (std::size_t i = 0; i < 4; ++i) {
    recs[i].generation = i + 1;
    recs[i].global_best_fit = fit[i];
    recs[i].best_acc = acc[i];
  }
  const RunStats s = summarize(recs);
  CHECK(s.final_best == 0.4);
  CHECK(s.mean_fit == doctest::Approx(0.425));
  CHECK(s.max_acc == 1.0);
  CHECK(s.mean_acc == doctest::Approx(0.75));
  CHECK(s.std_acc == doctest::Approx(std::sqrt(0.0275)));
  CHECK(s.epoch_at_best == 2.0);

  RunStats normal = s;
  normal.final_best = 0.02810;
  RunStats chaotic = s;
  chaotic.final_best = 0.01994;
  CHECK(relative_gain(chaotic, normal).final_best == doctest::Approx(-29.04).epsilon(1e-3));
}

TEST_CASE("pretrain smoke run writes every artifact") {
  const fs::path dir = fresh_dir("pretrain");
  const Run r = capture([&](auto& o, auto& e) { return cmd_pretrain(smoke(dir), o, e); });
  REQUIRE(r.rc == kExitOk);
  for (const char* f : {"log.jsonl", "checkpoint.json", "global_best.json", "summary.json", "summary.csv"}) {
    CHECK(fs::exists(dir / f));
  }
  const auto rows = lines(slurp(dir / "log.jsonl"));
  REQUIRE(rows.size() == 1);
  const auto row = nlohmann::json::parse(rows[0]);
  CHECK(row["schema_version"] == kLogSchemaVersion);
  CHECK(row["generation"] == 1);
  CHECK(row.contains("run_id"));
  CHECK(row.contains("timestamp"));
  CHECK_NOTHROW(load_params(dir / "checkpoint.json"));
  const auto csv = lines(slurp(dir / "summary.csv"));
  REQUIRE(csv.size() == 2);
  CHECK(csv[0].rfind("mutation,final_best_fit,mean_fit,max_acc", 0) == 0);
}

TEST_CASE("identical configs give byte-identical outputs") {
  const fs::path a = fresh_dir("det_a"), b = fresh_dir("det_b");
  RunConfig ca = smoke(a), cb = smoke(b);
  ca.evolution.generations = cb.evolution.generations = 3;
  REQUIRE(capture([&](auto& o, auto& e) { return cmd_pretrain(ca, o, e); }).rc == 0);
  REQUIRE(capture([&](auto& o, auto& e) { return cmd_pretrain(cb, o, e); }).rc == 0);
  for (const char* f : {"log.jsonl", "checkpoint.json", "global_best.json", "summary.csv", "summary.json"}) {
    CHECK(slurp(a / f) == slurp(b / f));
  }
}

TEST_CASE("ablation tables and seed-list validation") {
  const fs::path dir = fresh_dir("ablate");
  RunConfig cfg = smoke(dir);
  cfg.evolution.generations = 4;
  cfg.evolution.population = 3;
  cfg.ablation_seeds = {7};
  const Run bad = capture([&](auto& o, auto& e) { return cmd_ablate(cfg, o, e); });
  CHECK(bad.rc == kExitConfig);
  CHECK(bad.err.find("ablation_seeds") != std::string::npos);

  cfg.ablation_seeds = {1, 2};
  REQUIRE(capture([&](auto& o, auto& e) { return cmd_ablate(cfg, o, e); }).rc == kExitOk);
  const auto summary = lines(slurp(dir / "ablation_summary.csv"));
  REQUIRE(summary.size() == 4);
  CHECK(summary[1].rfind("normal,", 0) == 0);
  CHECK(summary[2].rfind("chaotic,", 0) == 0);
  CHECK(summary[3].rfind("gain,", 0) == 0);
  CHECK(lines(slurp(dir / "ablation_per_seed.csv")).size() == 5);
  const auto curves = lines(slurp(dir / "ablation_curves.csv"));
  CHECK(curves.size() == 5);
  CHECK(fs::exists(dir / "ablation" / "normal" / "seed_2" / "log.jsonl"));
}

TEST_CASE("eval on a zero network and on a broken checkpoint") {
  const fs::path dir = fresh_dir("eval");
  save_params(zero_params(10), dir / "zero.json");
  const Run ok = capture([&](auto& o, auto& e) { return cmd_eval(dir / "zero.json", smoke(dir), o, e); });
  REQUIRE(ok.rc == kExitOk);
  const auto report = nlohmann::json::parse(ok.out);
  CHECK(report["fitness"].get<double>() == std::numbers::ln2);
  CHECK(report["accuracy"].get<double>() == 0.0);

  const std::string text = slurp(dir / "zero.json");
  std::ofstream(dir / "truncated.json") << text.substr(0, text.size() / 3);
  const Run bad = capture([&](auto& o, auto& e) { return cmd_eval(dir / "truncated.json", smoke(dir), o, e); });
  CHECK(bad.rc == kExitIo);
  CHECK(!bad.err.empty());
}

TEST_CASE("downstream: two rows, class mismatch, determinism") {
  const fs::path dir = fresh_dir("downstream");
  Rng rng(3);
  save_params(init_params(10, rng), dir / "net.json");
  RunConfig cfg = smoke(dir);
  REQUIRE(capture([&](auto& o, auto& e) { return cmd_downstream(dir / "net.json", cfg, o, e); }).rc == 0);
  const std::string first = slurp(dir / "downstream_summary.csv");
  CHECK(lines(first).size() == 3);
  REQUIRE(capture([&](auto& o, auto& e) { return cmd_downstream(dir / "net.json", cfg, o, e); }).rc == 0);
  CHECK(slurp(dir / "downstream_summary.csv") == first);

  cfg.downstream.blobs.class_count = 3;
  const Run bad = capture([&](auto& o, auto& e) { return cmd_downstream(dir / "net.json", cfg, o, e); });
  CHECK(bad.rc != kExitOk);
  CHECK(bad.err.find("mismatch") != std::string::npos);
}

TEST_CASE("variance probe table") {
  const fs::path dir = fresh_dir("probe");
  RunConfig cfg = smoke(dir);
  REQUIRE(capture([&](auto& o, auto& e) { return cmd_probe_variance(cfg, o, e); }).rc == 0);
  CHECK(lines(slurp(dir / "variance.csv")).size() == 5);

  save_params(zero_params(10), dir / "zero.json");
  cfg.probe.checkpoint = (dir / "zero.json").string();
  REQUIRE(capture([&](auto& o, auto& e) { return cmd_probe_variance(cfg, o, e); }).rc == 0);
  const auto rows = lines(slurp(dir / "variance.csv"));
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i].find(",0,") != std::string::npos);  // variance column
  }
  cfg.probe.trials = 29;
  CHECK(capture([&](auto& o, auto& e) { return cmd_probe_variance(cfg, o, e); }).rc == kExitConfig);
}

TEST_CASE("gd-pretrain creates a missing output directory") {
  const fs::path dir = fresh_dir("gd") / "not" / "yet";
  RunConfig cfg = smoke(dir);
  cfg.gd.steps = 3;
  REQUIRE(capture([&](auto& o, auto& e) { return cmd_gd_pretrain(cfg, o, e); }).rc == 0);
  CHECK(load_params(dir / "gd_checkpoint.json").flat.size() == 871);
  const auto summary = nlohmann::json::parse(slurp(dir / "gd_summary.json"));
  CHECK(summary["steps"] == 3);
  CHECK(summary["validation"].contains("accuracy"));
}

TEST_CASE("unwritable output directory is an io failure") {
  RunConfig cfg = smoke("/proc/edl-cannot-write-here");
  CHECK(capture([&](auto& o, auto& e) { return cmd_pretrain(cfg, o, e); }).rc == kExitIo);
}
