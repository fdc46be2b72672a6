// Copyright 2026 durkit authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "durkit/manifest.hpp"

#include <fstream>

#include <json.hpp>

#include "durkit/error.hpp"

namespace durkit {

namespace {
using nlohmann::json;
}

void write_manifest(const std::filesystem::path& path,
                    const RunManifest& manifest) {
  json root;
  root["tool"] = "durkit";
  root["version"] = manifest.version;
  root["subcommand"] = manifest.subcommand;
  root["argv"] = manifest.argv;
  root["config"] = manifest.config;
  root["inputs"] = manifest.inputs;
  root["outputs"] = manifest.outputs;
  if (manifest.seed.has_value()) root["seed"] = *manifest.seed;
  root["kernel_backend"] = manifest.kernel_backend;
  root["wall_ms"] = manifest.wall_ms;

  std::ofstream out(path);
  if (!out) fail("cannot open for writing: " + path.string());
  out << root.dump(2) << '\n';
  if (!out) fail("write failed: " + path.string());
}

RunManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open for reading: " + path.string());
  json root = json::parse(in, nullptr, false);
  if (root.is_discarded() || !root.is_object()) {
    fail("malformed manifest: " + path.string());
  }
  RunManifest manifest;
  try {
    manifest.subcommand = root.at("subcommand").get<std::string>();
    manifest.argv = root.at("argv").get<std::vector<std::string>>();
    if (root.contains("config")) {
      manifest.config =
          root["config"].get<std::map<std::string, std::string>>();
    }
    if (root.contains("inputs")) {
      manifest.inputs = root["inputs"].get<std::vector<std::string>>();
    }
    if (root.contains("outputs")) {
      manifest.outputs = root["outputs"].get<std::vector<std::string>>();
    }
    if (root.contains("seed")) {
      manifest.seed = root["seed"].get<std::uint64_t>();
    }
    manifest.version = root.value("version", "");
    manifest.kernel_backend = root.value("kernel_backend", "");
    manifest.wall_ms = root.value("wall_ms", 0.0);
  } catch (const json::exception& e) {
    fail(std::string("malformed manifest: ") + e.what());
  }
  return manifest;
}

std::filesystem::path manifest_path_for(const std::filesystem::path& output) {
  std::filesystem::path path = output;
  path += ".manifest.json";
  return path;
}

}  // namespace durkit
