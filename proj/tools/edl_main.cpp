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

// edl: pretrain, ablate and inspect learned loss networks.

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "edl/commands.hpp"
#include "edl/run_config.hpp"

namespace {

struct Invocation {
  std::string config_path;
  std::string checkpoint;
  std::map<std::string, std::string> raw;  // flag name -> value as typed
};

CLI::App* add_command(CLI::App& app, const std::string& name, const std::string& help,
                      Invocation& inv, bool needs_checkpoint) {
  CLI::App* sub = app.add_subcommand(name, help);
  sub->add_option("-c,--config", inv.config_path, "run config JSON (defaults used when omitted)");
  if (needs_checkpoint) {
    sub->add_option("checkpoint,--checkpoint", inv.checkpoint, "loss network checkpoint JSON")
        ->required();
  }
  for (const std::string& field : edl::override_names()) {
    sub->add_option_function<std::string>(
        "--" + field, [&inv, field](const std::string& v) { inv.raw[field] = v; },
        "override config field '" + field + "'");
  }
  return sub;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Evolutionary learned-loss toolkit"};
  app.require_subcommand(1);
  Invocation inv;

  CLI::App* pretrain = add_command(app, "pretrain", "evolve a loss network", inv, false);
  CLI::App* ablate = add_command(app, "ablate", "chaotic vs normal mutation over a seed list", inv, false);
  CLI::App* eval = add_command(app, "eval", "score a checkpoint on a fresh validation set", inv, true);
  CLI::App* downstream =
      add_command(app, "downstream", "train a blob classifier with cross-entropy and the learned loss",
                  inv, true);
  CLI::App* probe = add_command(app, "probe-variance", "fitness variance versus batch count", inv, false);
  CLI::App* gd = add_command(app, "gd-pretrain", "gradient-descent baseline on the same objective", inv, false);
  CLI::App* defaults = app.add_subcommand("default-config", "print the default config JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : edl::kExitConfig;
  }

  if (defaults->parsed()) {
    std::cout << edl::config_to_json(edl::RunConfig{});
    return edl::kExitOk;
  }

  edl::RunConfig cfg;
  try {
    if (!inv.config_path.empty()) cfg = edl::load_config(inv.config_path);
    edl::apply_overrides(cfg, inv.raw);
    edl::validate(cfg);
  } catch (const edl::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return edl::kExitConfig;
  } catch (const edl::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return edl::kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return edl::kExitConfig;
  }

  if (pretrain->parsed()) return edl::cmd_pretrain(cfg, std::cout, std::cerr);
  if (ablate->parsed()) return edl::cmd_ablate(cfg, std::cout, std::cerr);
  if (eval->parsed()) return edl::cmd_eval(inv.checkpoint, cfg, std::cout, std::cerr);
  if (downstream->parsed()) return edl::cmd_downstream(inv.checkpoint, cfg, std::cout, std::cerr);
  if (probe->parsed()) return edl::cmd_probe_variance(cfg, std::cout, std::cerr);
  if (gd->parsed()) return edl::cmd_gd_pretrain(cfg, std::cout, std::cerr);
  return edl::kExitConfig;
}
