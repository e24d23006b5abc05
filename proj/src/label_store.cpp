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

#include "creq/label_store.hpp"

#include <chrono>
#include <ctime>
#include <mutex>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "creq/error.hpp"

namespace creq {

using nlohmann::json;

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    return fmt::format("{:04}-{:02}-{:02}T{:02}:{:02}:{:02}.{:03}Z", tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday,
                       tm.tm_hour, tm.tm_min, tm.tm_sec, ms);
}

namespace {

std::string_view kind_name(LogKind k) {
    switch (k) {
        case LogKind::label: return "label";
        case LogKind::defer: return "defer";
        case LogKind::cue: return "cue";
    }
    return "label";
}

LogKind parse_kind(const std::string& s) {
    if (s == "label") return LogKind::label;
    if (s == "defer") return LogKind::defer;
    if (s == "cue") return LogKind::cue;
    throw ValidationError("unknown log entry kind '" + s + "'");
}

std::string str(const json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_string()) throw ValidationError(std::string("missing string field '") + key + "'");
    return j.at(key).get<std::string>();
}

}  // namespace

json log_entry_to_json(const LogEntry& e) {
    json j;
    j["seq"] = e.seq;
    j["kind"] = std::string(kind_name(e.kind));
    j["received_at"] = e.received_at;
    switch (e.kind) {
        case LogKind::label: j["label"] = label_to_json(e.label.value()); break;
        case LogKind::defer:
            j["annotator"] = e.annotator;
            j["sentence_id"] = e.sentence_id;
            break;
        case LogKind::cue:
            j["phrase"] = e.phrase;
            j["syntactic_type"] = e.syntactic_type;
            break;
    }
    return j;
}

LogEntry log_entry_from_json(const json& j) {
    if (!j.is_object()) throw ValidationError("log entry must be an object");
    LogEntry e;
    if (!j.contains("seq") || !j.at("seq").is_number_unsigned()) throw ValidationError("log entry needs an unsigned 'seq'");
    e.seq = j.at("seq").get<std::uint64_t>();
    e.kind = parse_kind(str(j, "kind"));
    e.received_at = str(j, "received_at");
    switch (e.kind) {
        case LogKind::label:
            if (!j.contains("label")) throw ValidationError("label entry without 'label'");
            e.label = label_from_json(j.at("label"));
            validate_label(*e.label);
            break;
        case LogKind::defer:
            e.annotator = str(j, "annotator");
            e.sentence_id = str(j, "sentence_id");
            break;
        case LogKind::cue:
            e.phrase = str(j, "phrase");
            e.syntactic_type = str(j, "syntactic_type");
            break;
    }
    return e;
}

void StoreIndex::apply(const LogEntry& e) {
    if (e.seq != seq + 1) {
        throw ValidationError(fmt::format("log sequence gap: expected {}, found {}", seq + 1, e.seq));
    }
    seq = e.seq;
    if (e.kind == LogKind::label) {
        const auto& r = *e.label;
        labels[{r.sentence_id, r.annotator}] = r;
        deferred.erase({r.annotator, r.sentence_id});
    } else if (e.kind == LogKind::defer) {
        deferred[{e.annotator, e.sentence_id}] = e.seq;
    }
}

std::string StoreIndex::export_jsonl() const {
    std::string out;
    for (const auto& [key, r] : labels) {
        out += label_to_json(r).dump();
        out += '\n';
    }
    return out;
}

json index_to_json(const StoreIndex& index) {
    json labels = json::array();
    for (const auto& [key, r] : index.labels) labels.push_back(label_to_json(r));
    json deferred = json::array();
    for (const auto& [key, s] : index.deferred) {
        deferred.push_back({{"annotator", key.first}, {"sentence_id", key.second}, {"seq", s}});
    }
    return {{"format", 1}, {"seq", index.seq}, {"labels", labels}, {"deferred", deferred}};
}

StoreIndex index_from_json(const json& j) {
    if (!j.is_object() || j.value("format", 0) != 1) throw ValidationError("unsupported snapshot format");
    StoreIndex index;
    index.seq = j.at("seq").get<std::uint64_t>();
    for (const auto& l : j.at("labels")) {
        auto r = label_from_json(l);
        validate_label(r);
        auto key = std::make_pair(r.sentence_id, r.annotator);
        if (!index.labels.emplace(std::move(key), std::move(r)).second) {
            throw ValidationError("snapshot holds a duplicate label");
        }
    }
    for (const auto& d : j.at("deferred")) {
        const auto s = d.at("seq").get<std::uint64_t>();
        if (s == 0 || s > index.seq) throw ValidationError("snapshot deferral outside the log prefix");
        index.deferred[{str(d, "annotator"), str(d, "sentence_id")}] = s;
    }
    return index;
}

std::vector<LogEntry> read_log(const std::filesystem::path& path) {
    std::vector<LogEntry> out;
    if (!std::filesystem::exists(path)) return out;
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            out.push_back(log_entry_from_json(json::parse(line)));
        } catch (const json::exception& e) {
            throw ParseError(path.string(), lineno, std::string("malformed log entry: ") + e.what());
        } catch (const ParseError&) {
            throw;
        } catch (const ValidationError& e) {
            throw ParseError(path.string(), lineno, e.what());
        }
    }
    return out;
}

StoreIndex replay_log(const std::filesystem::path& path) {
    StoreIndex index;
    for (const auto& e : read_log(path)) index.apply(e);
    return index;
}

LabelStore::LabelStore(std::filesystem::path directory, LabelStoreOptions options)
    : dir_(std::move(directory)), options_(std::move(options)) {
    if (!options_.clock) options_.clock = utc_timestamp;
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw IoError("cannot create store directory " + dir_.string() + ": " + ec.message());

    if (std::filesystem::exists(snapshot_path())) {
        std::ifstream in(snapshot_path());
        if (!in) throw IoError("cannot read " + snapshot_path().string());
        try {
            index_ = index_from_json(json::parse(in));
        } catch (const json::exception& e) {
            throw ValidationError(snapshot_path().string() + ": malformed snapshot: " + e.what());
        }
    }
    const auto entries = read_log(log_path());
    if (entries.size() < index_.seq) throw ValidationError("snapshot is ahead of the log in " + dir_.string());
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (entries[i].seq != i + 1) {
            throw ValidationError(fmt::format("{}: log sequence gap at line {}", log_path().string(), i + 1));
        }
        if (entries[i].seq > index_.seq) index_.apply(entries[i]);
    }
    log_.open(log_path(), std::ios::app);
    if (!log_) throw IoError("cannot open " + log_path().string() + " for appending");
}

std::uint64_t LabelStore::append(LogEntry entry) {
    entry.seq = index_.seq + 1;
    entry.received_at = options_.clock();
    log_ << log_entry_to_json(entry).dump() << '\n';
    log_.flush();
    if (!log_) throw IoError("write to " + log_path().string() + " failed");
    index_.apply(entry);
    if (options_.snapshot_interval > 0 && index_.seq % options_.snapshot_interval == 0) write_snapshot_locked();
    return index_.seq;
}

Acknowledgment LabelStore::append_label(const CausalLabelRecord& record) {
    validate_label(record);
    if (record.sentence_id.empty() || record.annotator.empty()) {
        throw ValidationError("label needs a sentence id and an annotator");
    }
    std::unique_lock lock(mutex_);
    Acknowledgment ack;
    ack.replaced = index_.labels.contains({record.sentence_id, record.annotator});
    LogEntry e;
    e.kind = LogKind::label;
    e.label = record;
    ack.sequence = append(std::move(e));
    return ack;
}

std::uint64_t LabelStore::append_defer(const std::string& annotator, const std::string& sentence_id) {
    if (annotator.empty() || sentence_id.empty()) throw ValidationError("deferral needs a sentence id and an annotator");
    std::unique_lock lock(mutex_);
    LogEntry e;
    e.kind = LogKind::defer;
    e.annotator = annotator;
    e.sentence_id = sentence_id;
    return append(std::move(e));
}

std::uint64_t LabelStore::append_cue(const std::string& phrase, const std::string& syntactic_type) {
    std::unique_lock lock(mutex_);
    LogEntry e;
    e.kind = LogKind::cue;
    e.phrase = phrase;
    e.syntactic_type = syntactic_type;
    return append(std::move(e));
}

std::optional<CausalLabelRecord> LabelStore::current(const std::string& sentence_id, const std::string& annotator) const {
    std::shared_lock lock(mutex_);
    const auto it = index_.labels.find({sentence_id, annotator});
    if (it == index_.labels.end()) return std::nullopt;
    return it->second;
}

std::optional<std::uint64_t> LabelStore::deferred(const std::string& annotator, const std::string& sentence_id) const {
    std::shared_lock lock(mutex_);
    const auto it = index_.deferred.find({annotator, sentence_id});
    if (it == index_.deferred.end()) return std::nullopt;
    return it->second;
}

std::vector<CausalLabelRecord> LabelStore::labels() const {
    std::shared_lock lock(mutex_);
    std::vector<CausalLabelRecord> out;
    out.reserve(index_.labels.size());
    for (const auto& [key, r] : index_.labels) out.push_back(r);
    return out;
}

StoreIndex LabelStore::snapshot() const {
    std::shared_lock lock(mutex_);
    return index_;
}

std::uint64_t LabelStore::sequence() const {
    std::shared_lock lock(mutex_);
    return index_.seq;
}

std::string LabelStore::export_jsonl() const {
    std::shared_lock lock(mutex_);
    return index_.export_jsonl();
}

void LabelStore::export_labels(std::ostream& out) const { out << export_jsonl(); }

std::vector<LogEntry> LabelStore::history(const std::string& sentence_id, const std::string& annotator) const {
    std::shared_lock lock(mutex_);
    std::vector<LogEntry> out;
    for (auto& e : read_log(log_path())) {
        const bool hit = e.kind == LogKind::label
                             ? e.label->sentence_id == sentence_id && e.label->annotator == annotator
                             : e.kind == LogKind::defer && e.sentence_id == sentence_id && e.annotator == annotator;
        if (hit) out.push_back(std::move(e));
    }
    return out;
}

void LabelStore::checkpoint() {
    std::unique_lock lock(mutex_);
    write_snapshot_locked();
}

void LabelStore::write_snapshot_locked() const {
    const auto tmp = dir_ / "snapshot.json.tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out << index_to_json(index_).dump() << '\n';
        if (!out) throw IoError("write to " + tmp.string() + " failed");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, snapshot_path(), ec);
    if (ec) throw IoError("cannot replace " + snapshot_path().string() + ": " + ec.message());
}

}  // namespace creq
