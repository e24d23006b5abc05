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

#include "creq/manifest.hpp"

#include <fstream>

#include <ceres/version.h>
#include <fmt/format.h>

#include "creq/digest.hpp"
#include "creq/error.hpp"
#include "creq/label_store.hpp"

#ifndef CREQ_VERSION
#define CREQ_VERSION "0.0.0"
#endif

namespace creq {

using nlohmann::json;

FileDigest digest_file(const std::filesystem::path& path) {
    std::error_code ec;
    const auto size = std::filesystem::file_size(path, ec);
    if (ec) throw IoError("cannot read " + path.string() + ": " + ec.message());
    return {path.string(), sha256_file(path), size};
}

std::map<std::string, std::string> library_versions() {
    std::map<std::string, std::string> v;
    v["creq"] = CREQ_VERSION;
#if defined(__clang__)
    v["compiler"] = std::string("clang ") + __clang_version__;
#elif defined(__GNUC__)
    v["compiler"] = fmt::format("gcc {}.{}.{}", __GNUC__, __GNUC_MINOR__, __GNUC_PATCHLEVEL__);
#endif
    v["fmt"] = fmt::format("{}.{}.{}", FMT_VERSION / 10000, FMT_VERSION / 100 % 100, FMT_VERSION % 100);
    v["nlohmann_json"] = fmt::format("{}.{}.{}", NLOHMANN_JSON_VERSION_MAJOR, NLOHMANN_JSON_VERSION_MINOR,
                                     NLOHMANN_JSON_VERSION_PATCH);
    v["ceres"] = CERES_VERSION_STRING;
#ifdef _OPENMP
    v["openmp"] = std::to_string(_OPENMP);
#endif
    return v;
}

namespace {

json digests(const std::vector<FileDigest>& files) {
    json out = json::array();
    for (const auto& f : files) out.push_back({{"path", f.path}, {"sha256", f.sha256}, {"bytes", f.bytes}});
    return out;
}

}  // namespace

json run_summary_json(const RunManifest& m) {
    return {{"command", m.command},
            {"seed", m.seed ? json(*m.seed) : json(nullptr)},
            {"inputs", digests(m.inputs)},
            {"versions", m.versions}};
}

json manifest_to_json(const RunManifest& m) {
    auto j = run_summary_json(m);
    j["arguments"] = m.arguments;
    j["outputs"] = digests(m.outputs);
    j["created_at"] = m.created_at;
    return j;
}

void write_manifest(const RunManifest& m, const std::filesystem::path& path) {
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp);
        out << manifest_to_json(m).dump(2) << '\n';
        if (!out) throw IoError("write to " + tmp + " failed");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot write " + path.string() + ": " + ec.message());
}

}  // namespace creq
