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

#include "edl/checkpoint.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace edl {

namespace {

using json = nlohmann::ordered_json;
using Kind = CheckpointError::Kind;

[[noreturn]] void fail(Kind kind, const std::string& field, const std::string& reason) {
  throw CheckpointError(kind, field, "checkpoint field '" + field + "': " + reason);
}

const json& require(const json& doc, const char* field) {
  auto it = doc.find(field);
  if (it == doc.end()) fail(Kind::kMalformed, field, "missing");
  return *it;
}

double parse_double(const json& v, std::size_t index) {
  const std::string field = "flat[" + std::to_string(index) + "]";
  if (!v.is_string()) fail(Kind::kMalformed, field, "expected a decimal string");
  const std::string& s = v.get_ref<const std::string&>();
  errno = 0;
  char* end = nullptr;
  const double d = std::strtod(s.c_str(), &end);
  // ERANGE is also raised for subnormals, which round-trip fine; only
  // overflow is an error.
  if (s.empty() || end != s.c_str() + s.size() || (errno == ERANGE && std::isinf(d))) {
    fail(Kind::kMalformed, field, "not a valid double: '" + s + "'");
  }
  return d;
}

}  // namespace

std::string format_double17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string params_to_json(const LossNetParams& params) {
  json doc;
  doc["format_version"] = kCheckpointFormatVersion;
  doc["class_count"] = params.class_count;
  doc["layer_dims"] = params.layer_dims;
  doc["activation"] = kActivationName;
  json flat = json::array();
  for (double v : params.flat) flat.push_back(format_double17(v));
  doc["flat"] = std::move(flat);
  return doc.dump(1) + "\n";
}

LossNetParams params_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(Kind::kMalformed, "<document>", e.what());
  }
  if (!doc.is_object()) fail(Kind::kMalformed, "<document>", "expected a JSON object");

  const json& version = require(doc, "format_version");
  if (!version.is_number_integer()) fail(Kind::kMalformed, "format_version", "expected an integer");
  if (version.get<int>() != kCheckpointFormatVersion) {
    fail(Kind::kVersion, "format_version",
         "unsupported version " + version.dump() + " (expected " +
             std::to_string(kCheckpointFormatVersion) + ")");
  }

  const json& activation = require(doc, "activation");
  if (!activation.is_string() || activation.get<std::string>() != kActivationName) {
    fail(Kind::kMalformed, "activation", "unsupported activation " + activation.dump());
  }

  LossNetParams params;
  const json& c = require(doc, "class_count");
  if (!c.is_number_unsigned()) fail(Kind::kMalformed, "class_count", "expected a positive integer");
  params.class_count = c.get<std::size_t>();

  const json& dims = require(doc, "layer_dims");
  if (!dims.is_array()) fail(Kind::kMalformed, "layer_dims", "expected an array");
  for (const json& d : dims) {
    if (!d.is_number_unsigned()) fail(Kind::kMalformed, "layer_dims", "expected integers");
    params.layer_dims.push_back(d.get<std::size_t>());
  }

  const json& flat = require(doc, "flat");
  if (!flat.is_array()) fail(Kind::kMalformed, "flat", "expected an array");
  params.flat.reserve(flat.size());
  for (std::size_t i = 0; i < flat.size(); ++i) params.flat.push_back(parse_double(flat[i], i));

  if (params.class_count < 2) fail(Kind::kShape, "class_count", "must be at least 2");
  if (params.layer_dims.size() < 2 || params.layer_dims.front() != 2 * params.class_count ||
      params.layer_dims.back() != 1) {
    fail(Kind::kShape, "layer_dims", "must start at 2 * class_count and end at 1");
  }
  const std::size_t expected = param_count(params.layer_dims);
  if (params.flat.size() != expected) {
    fail(Kind::kShape, "flat",
         "length " + std::to_string(params.flat.size()) + " does not match layer_dims (expected " +
             std::to_string(expected) + ")");
  }
  return params;
}

void save_params(const LossNetParams& params, const std::filesystem::path& path) {
  validate(params);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(Kind::kIo, path.string(), "cannot open for writing");
  out << params_to_json(params);
  out.flush();
  if (!out) fail(Kind::kIo, path.string(), "write failed");
}

LossNetParams load_params(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Kind::kIo, path.string(), "cannot open for reading");
  std::stringstream ss;
  ss << in.rdbuf();
  return params_from_json(ss.str());
}

}  // namespace edl
