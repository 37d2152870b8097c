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

#include "edl/run_config.hpp"

#include <cstdlib>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "json.hpp"

namespace edl {

namespace {

using json = nlohmann::ordered_json;

struct Field {
  std::string section;
  std::string name;
  std::function<json(const RunConfig&)> get;
  std::function<void(RunConfig&, const json&)> set;
};

template <typename T>
T as_unsigned(const json& v, const std::string& name) {
  if (!v.is_number_unsigned()) throw ConfigError(name, "expected a non-negative integer");
  return v.get<T>();
}

double as_double(const json& v, const std::string& name) {
  if (!v.is_number()) throw ConfigError(name, "expected a number");
  return v.get<double>();
}

bool as_bool(const json& v, const std::string& name) {
  if (!v.is_boolean()) throw ConfigError(name, "expected true or false");
  return v.get<bool>();
}

std::string as_string(const json& v, const std::string& name) {
  if (!v.is_string()) throw ConfigError(name, "expected a string");
  return v.get<std::string>();
}

template <typename T>
std::vector<T> as_unsigned_list(const json& v, const std::string& name) {
  if (!v.is_array()) throw ConfigError(name, "expected an array of non-negative integers");
  std::vector<T> out;
  for (const json& e : v) out.push_back(as_unsigned<T>(e, name));
  return out;
}

// Declares a field backed by a member reachable through `ref`.
template <typename Ref>
Field size_field(std::string section, std::string name, Ref ref) {
  return {section, name, [ref](const RunConfig& c) { return json(ref(c)); },
          [ref, name](RunConfig& c, const json& v) { ref(c) = as_unsigned<std::size_t>(v, name); }};
}

template <typename Ref>
Field seed_field(std::string section, std::string name, Ref ref) {
  return {section, name, [ref](const RunConfig& c) { return json(ref(c)); },
          [ref, name](RunConfig& c, const json& v) { ref(c) = as_unsigned<std::uint64_t>(v, name); }};
}

template <typename Ref>
Field double_field(std::string section, std::string name, Ref ref) {
  return {section, name, [ref](const RunConfig& c) { return json(ref(c)); },
          [ref, name](RunConfig& c, const json& v) { ref(c) = as_double(v, name); }};
}

template <typename Ref>
Field bool_field(std::string section, std::string name, Ref ref) {
  return {section, name, [ref](const RunConfig& c) { return json(ref(c)); },
          [ref, name](RunConfig& c, const json& v) { ref(c) = as_bool(v, name); }};
}

template <typename Ref>
Field string_field(std::string section, std::string name, Ref ref) {
  return {section, name, [ref](const RunConfig& c) { return json(ref(c)); },
          [ref, name](RunConfig& c, const json& v) { ref(c) = as_string(v, name); }};
}

#define EDL_REF(expr) [](auto& c) -> auto& { return expr; }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    const std::string ev = "evolution";
    f.push_back(size_field(ev, "population", EDL_REF(c.evolution.population)));
    f.push_back(size_field(ev, "elites", EDL_REF(c.evolution.elites)));
    f.push_back(size_field(ev, "generations", EDL_REF(c.evolution.generations)));
    f.push_back(size_field(ev, "batches", EDL_REF(c.evolution.batches)));
    f.push_back(size_field(ev, "pairs_per_batch", EDL_REF(c.evolution.pairs_per_batch)));
    f.push_back(double_field(ev, "sigma_high", EDL_REF(c.evolution.sigma_high)));
    f.push_back(double_field(ev, "sigma_low", EDL_REF(c.evolution.sigma_low)));
    f.push_back(double_field(ev, "acc_threshold", EDL_REF(c.evolution.acc_threshold)));
    f.push_back(size_field(ev, "max_attempts", EDL_REF(c.evolution.max_attempts)));
    f.push_back({ev, "mutation_mode",
                 [](const RunConfig& c) { return json(to_string(c.evolution.mutation_mode)); },
                 [](RunConfig& c, const json& v) {
                   const std::string s = as_string(v, "mutation_mode");
                   try {
                     c.evolution.mutation_mode = parse_mutation_mode(s);
                   } catch (const std::invalid_argument&) {
                     throw ConfigError("mutation_mode", "expected 'chaotic' or 'normal', got '" + s + "'");
                   }
                 }});
    f.push_back(size_field(ev, "class_count", EDL_REF(c.evolution.class_count)));
    f.push_back(seed_field(ev, "seed", EDL_REF(c.evolution.seed)));
    f.push_back(bool_field(ev, "shared_pairs", EDL_REF(c.evolution.shared_pairs)));
    f.push_back(size_field(ev, "workers", EDL_REF(c.evolution.workers)));
    f.push_back(size_field(ev, "validation_pairs", EDL_REF(c.evolution.validation_pairs)));
    f.push_back(double_field(ev, "init_scale", EDL_REF(c.evolution.init_scale)));

    const std::string mx = "mixture";
    f.push_back(double_field(mx, "weight_uniform", EDL_REF(c.mixture.weight_uniform)));
    f.push_back(double_field(mx, "weight_extreme", EDL_REF(c.mixture.weight_extreme)));
    f.push_back(double_field(mx, "weight_boundary", EDL_REF(c.mixture.weight_boundary)));
    f.push_back(double_field(mx, "extreme_concentration", EDL_REF(c.mixture.extreme_concentration)));
    f.push_back(double_field(mx, "boundary_gap", EDL_REF(c.mixture.boundary_gap)));

    const std::string run = "run";
    f.push_back({run, "output_dir", [](const RunConfig& c) { return json(c.output_dir.string()); },
                 [](RunConfig& c, const json& v) { c.output_dir = as_string(v, "output_dir"); }});
    f.push_back(string_field(run, "log_format", EDL_REF(c.log_format)));
    f.push_back(bool_field(run, "log_timestamps", EDL_REF(c.log_timestamps)));
    f.push_back({run, "ablation_seeds", [](const RunConfig& c) { return json(c.ablation_seeds); },
                 [](RunConfig& c, const json& v) {
                   c.ablation_seeds = as_unsigned_list<std::uint64_t>(v, "ablation_seeds");
                 }});

    const std::string evs = "eval";
    f.push_back(seed_field(evs, "eval_seed", EDL_REF(c.eval.seed)));
    f.push_back(size_field(evs, "eval_pairs", EDL_REF(c.eval.pairs)));

    const std::string ds = "downstream";
    f.push_back(size_field(ds, "blob_class_count", EDL_REF(c.downstream.blobs.class_count)));
    f.push_back(size_field(ds, "blob_dim", EDL_REF(c.downstream.blobs.dim)));
    f.push_back(size_field(ds, "points_per_class", EDL_REF(c.downstream.blobs.points_per_class)));
    f.push_back(double_field(ds, "blob_mean_scale", EDL_REF(c.downstream.blobs.mean_scale)));
    f.push_back(double_field(ds, "blob_spread", EDL_REF(c.downstream.blobs.spread)));
    f.push_back(seed_field(ds, "blob_seed", EDL_REF(c.downstream.blobs.seed)));
    f.push_back(size_field(ds, "epochs", EDL_REF(c.downstream.train.epochs)));
    f.push_back(double_field(ds, "learning_rate", EDL_REF(c.downstream.train.learning_rate)));
    f.push_back(size_field(ds, "batch_size", EDL_REF(c.downstream.train.batch_size)));
    f.push_back(size_field(ds, "downstream_seeds", EDL_REF(c.downstream.seeds)));
    f.push_back(seed_field(ds, "train_seed", EDL_REF(c.downstream.train_seed)));

    const std::string pr = "variance_probe";
    f.push_back({pr, "probe_b_values", [](const RunConfig& c) { return json(c.probe.b_values); },
                 [](RunConfig& c, const json& v) {
                   c.probe.b_values = as_unsigned_list<std::size_t>(v, "probe_b_values");
                 }});
    f.push_back(size_field(pr, "probe_trials", EDL_REF(c.probe.trials)));
    f.push_back(seed_field(pr, "probe_seed", EDL_REF(c.probe.seed)));
    f.push_back(string_field(pr, "probe_checkpoint", EDL_REF(c.probe.checkpoint)));

    const std::string gd = "gd_baseline";
    f.push_back(size_field(gd, "gd_steps", EDL_REF(c.gd.steps)));
    f.push_back(double_field(gd, "gd_learning_rate", EDL_REF(c.gd.learning_rate)));
    f.push_back(double_field(gd, "gd_init_scale", EDL_REF(c.gd.init_scale)));
    return f;
  }();
  return table;
}

#undef EDL_REF

const Field* find_field(const std::string& name) {
  for (const Field& f : fields()) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

// "evolution.sigma_low: must be positive" -> field "sigma_low".
ConfigError rethrow_as_config_error(const std::invalid_argument& e) {
  const std::string msg = e.what();
  const auto colon = msg.find(':');
  std::string field = colon == std::string::npos ? "<config>" : msg.substr(0, colon);
  const auto dot = field.rfind('.');
  if (dot != std::string::npos) field = field.substr(dot + 1);
  const std::string reason = colon == std::string::npos ? msg : msg.substr(colon + 2);
  return ConfigError(field, reason);
}

}  // namespace

std::string config_to_json(const RunConfig& cfg) {
  json doc;
  doc["schema_version"] = kConfigSchemaVersion;
  for (const Field& f : fields()) doc[f.section][f.name] = f.get(cfg);
  return doc.dump(2) + "\n";
}

RunConfig config_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<document>", e.what());
  }
  if (!doc.is_object()) throw ConfigError("<document>", "expected a JSON object");
  auto version = doc.find("schema_version");
  if (version == doc.end()) throw ConfigError("schema_version", "missing");
  if (!version->is_number_integer() || version->get<int>() != kConfigSchemaVersion) {
    throw ConfigError("schema_version", "unsupported value " + version->dump());
  }

  std::set<std::string> sections;
  for (const Field& f : fields()) sections.insert(f.section);
  for (const auto& [key, value] : doc.items()) {
    if (key == "schema_version") continue;
    if (!sections.count(key)) throw ConfigError(key, "unknown section");
    if (!value.is_object()) throw ConfigError(key, "expected an object");
    for (const auto& [name, unused] : value.items()) {
      const Field* f = find_field(name);
      if (f == nullptr || f->section != key) throw ConfigError(name, "unknown field in section " + key);
    }
  }

  RunConfig cfg;
  for (const Field& f : fields()) {
    auto sec = doc.find(f.section);
    if (sec == doc.end()) throw ConfigError(f.section, "missing section");
    auto val = sec->find(f.name);
    if (val == sec->end()) throw ConfigError(f.name, "missing");
    f.set(cfg, *val);
  }
  validate(cfg);
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("<file>", "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str());
}

void apply_overrides(RunConfig& cfg, const std::map<std::string, std::string>& overrides) {
  for (const auto& [name, text] : overrides) {
    const Field* f = find_field(name);
    if (f == nullptr) throw ConfigError(name, "unknown field");
    json value;
    try {
      value = json::parse(text);
    } catch (const json::parse_error&) {
      value = text;
    }
    f->set(cfg, value);
  }
  validate(cfg);
}

std::vector<std::string> override_names() {
  std::vector<std::string> names;
  for (const Field& f : fields()) names.push_back(f.name);
  return names;
}

void validate(const RunConfig& cfg) {
  try {
    validate(cfg.evolution);
    validate(cfg.mixture);
  } catch (const std::invalid_argument& e) {
    throw rethrow_as_config_error(e);
  }
  if (cfg.log_format != "jsonl") throw ConfigError("log_format", "only 'jsonl' is supported");
  if (cfg.output_dir.empty()) throw ConfigError("output_dir", "must not be empty");
  if (cfg.ablation_seeds.empty()) throw ConfigError("ablation_seeds", "must not be empty");
  if (cfg.eval.pairs < 1) throw ConfigError("eval_pairs", "must be at least 1");
  if (cfg.downstream.seeds < kMinComparisonSeeds) {
    throw ConfigError("downstream_seeds", "must be at least " + std::to_string(kMinComparisonSeeds));
  }
  if (cfg.downstream.blobs.class_count < 2) throw ConfigError("blob_class_count", "must be at least 2");
  if (cfg.downstream.blobs.dim < 1) throw ConfigError("blob_dim", "must be at least 1");
  if (cfg.downstream.blobs.points_per_class < 1) throw ConfigError("points_per_class", "must be at least 1");
  if (!(cfg.downstream.blobs.spread > 0.0)) throw ConfigError("blob_spread", "must be positive");
  if (!(cfg.downstream.train.learning_rate >= 0.0)) throw ConfigError("learning_rate", "must be >= 0");
  if (cfg.downstream.train.batch_size < 1) throw ConfigError("batch_size", "must be at least 1");
  if (cfg.probe.b_values.empty()) throw ConfigError("probe_b_values", "must not be empty");
  for (std::size_t b : cfg.probe.b_values) {
    if (b < 1) throw ConfigError("probe_b_values", "every entry must be at least 1");
  }
  if (cfg.probe.trials < kMinVarianceTrials) {
    throw ConfigError("probe_trials", "must be at least " + std::to_string(kMinVarianceTrials));
  }
  if (cfg.gd.steps < 1) throw ConfigError("gd_steps", "must be at least 1");
  if (!(cfg.gd.learning_rate >= 0.0)) throw ConfigError("gd_learning_rate", "must be >= 0");
  if (!(cfg.gd.init_scale > 0.0)) throw ConfigError("gd_init_scale", "must be positive");
}

std::filesystem::path resolve_output_dir(const RunConfig& cfg) {
  if (const char* env = std::getenv(kOutputDirEnv); env != nullptr && *env != '\0') return env;
  return cfg.output_dir;
}

}  // namespace edl
