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

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace durkit {

// Written alongside every file output of the CLI. Captures the full
// resolved invocation, so `durkit rerun --manifest <file>` reproduces
// the outputs bit for bit (wall_ms aside, the runs are identical: all
// randomness flows from the recorded seed).
struct RunManifest {
  std::string subcommand;
  std::vector<std::string> argv;              // original arguments
  std::map<std::string, std::string> config;  // resolved option values
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::optional<std::uint64_t> seed;
  std::string version;
  std::string kernel_backend;
  double wall_ms = 0.0;
};

void write_manifest(const std::filesystem::path& path,
                    const RunManifest& manifest);
RunManifest read_manifest(const std::filesystem::path& path);

// Default manifest location for an output file.
std::filesystem::path manifest_path_for(const std::filesystem::path& output);

}  // namespace durkit
