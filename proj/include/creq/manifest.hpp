// Copyright 2026 The creq Authors.
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

#ifndef CREQ_MANIFEST_HPP
#define CREQ_MANIFEST_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace creq {

struct FileDigest {
    std::string path;
    std::string sha256;
    std::uintmax_t bytes = 0;
};

/// Hashes the file now; throws IoError when unreadable.
FileDigest digest_file(const std::filesystem::path& path);

/// What a run read, wrote and was configured with.
struct RunManifest {
    std::string command;
    std::vector<std::string> arguments;
    std::optional<std::uint64_t> seed;
    std::vector<FileDigest> inputs;
    std::vector<FileDigest> outputs;
    std::map<std::string, std::string> versions;  ///< filled by library_versions()
    std::string created_at;

    void add_input(const std::filesystem::path& path) { inputs.push_back(digest_file(path)); }
    void add_output(const std::filesystem::path& path) { outputs.push_back(digest_file(path)); }
};

/// creq, compiler, fmt, nlohmann_json, ceres, openmp.
std::map<std::string, std::string> library_versions();

/// Inputs, seed and versions only; embedded in JSON reports.
nlohmann::json run_summary_json(const RunManifest& m);
nlohmann::json manifest_to_json(const RunManifest& m);
/// Written atomically.
void write_manifest(const RunManifest& m, const std::filesystem::path& path);

}  // namespace creq

#endif  // CREQ_MANIFEST_HPP
