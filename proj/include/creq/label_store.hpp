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

#ifndef CREQ_LABEL_STORE_HPP
#define CREQ_LABEL_STORE_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "creq/corpus.hpp"

namespace creq {

/// Current UTC time as "YYYY-MM-DDTHH:MM:SS.mmmZ".
std::string utc_timestamp();

enum class LogKind { label, defer, cue };

/// One line of the annotation log.
struct LogEntry {
    std::uint64_t seq = 0;
    LogKind kind = LogKind::label;
    std::string received_at;
    std::optional<CausalLabelRecord> label;  ///< kind == label
    std::string annotator;                   ///< kind == defer
    std::string sentence_id;                 ///< kind == defer
    std::string phrase;                      ///< kind == cue
    std::string syntactic_type;              ///< kind == cue

    bool operator==(const LogEntry&) const = default;
};

nlohmann::json log_entry_to_json(const LogEntry& entry);
LogEntry log_entry_from_json(const nlohmann::json& j);

/// State derived from a log prefix.
struct StoreIndex {
    std::uint64_t seq = 0;
    /// (sentence_id, annotator) -> current label
    std::map<std::pair<std::string, std::string>, CausalLabelRecord> labels;
    /// (annotator, sentence_id) -> seq of the latest deferral not yet followed by a label
    std::map<std::pair<std::string, std::string>, std::uint64_t> deferred;

    /// Entries must arrive with seq == this->seq + 1.
    void apply(const LogEntry& entry);
    /// Current labels as JSONL, ordered by (sentence_id, annotator).
    [[nodiscard]] std::string export_jsonl() const;

    bool operator==(const StoreIndex&) const = default;
};

nlohmann::json index_to_json(const StoreIndex& index);
StoreIndex index_from_json(const nlohmann::json& j);

/// Reads a log file. A missing file is an empty log.
std::vector<LogEntry> read_log(const std::filesystem::path& path);
/// Index rebuilt from the log alone, ignoring any snapshot.
StoreIndex replay_log(const std::filesystem::path& path);

struct LabelStoreOptions {
    std::size_t snapshot_interval = 100;  ///< 0 disables automatic snapshots
    std::function<std::string()> clock = utc_timestamp;
};

struct Acknowledgment {
    std::uint64_t sequence = 0;
    bool replaced = false;  ///< the annotator already had a label for the sentence
};

/// Directory-backed store: `log.jsonl` (append-only) plus `snapshot.json`.
///
/// Opening loads the snapshot and replays the log tail after it. One writer
/// at a time; readers see the state after a complete append.
class LabelStore {
public:
    explicit LabelStore(std::filesystem::path directory, LabelStoreOptions options = {});
    LabelStore(const LabelStore&) = delete;
    LabelStore& operator=(const LabelStore&) = delete;

    /// Validates the dependent-field rule before appending.
    Acknowledgment append_label(const CausalLabelRecord& record);
    std::uint64_t append_defer(const std::string& annotator, const std::string& sentence_id);
    std::uint64_t append_cue(const std::string& phrase, const std::string& syntactic_type);

    [[nodiscard]] std::optional<CausalLabelRecord> current(const std::string& sentence_id,
                                                           const std::string& annotator) const;
    [[nodiscard]] std::optional<std::uint64_t> deferred(const std::string& annotator,
                                                        const std::string& sentence_id) const;
    [[nodiscard]] std::vector<CausalLabelRecord> labels() const;
    [[nodiscard]] StoreIndex snapshot() const;
    [[nodiscard]] std::uint64_t sequence() const;
    [[nodiscard]] std::string export_jsonl() const;
    void export_labels(std::ostream& out) const;

    /// Every log entry touching the (sentence, annotator) pair, oldest first.
    [[nodiscard]] std::vector<LogEntry> history(const std::string& sentence_id, const std::string& annotator) const;

    /// Writes snapshot.json now (atomically).
    void checkpoint();

    [[nodiscard]] const std::filesystem::path& directory() const noexcept { return dir_; }
    [[nodiscard]] std::filesystem::path log_path() const { return dir_ / "log.jsonl"; }
    [[nodiscard]] std::filesystem::path snapshot_path() const { return dir_ / "snapshot.json"; }

private:
    std::uint64_t append(LogEntry entry);
    void write_snapshot_locked() const;

    std::filesystem::path dir_;
    LabelStoreOptions options_;
    StoreIndex index_;
    std::ofstream log_;
    mutable std::shared_mutex mutex_;
};

}  // namespace creq

#endif  // CREQ_LABEL_STORE_HPP
