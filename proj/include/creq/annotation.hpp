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

#ifndef CREQ_ANNOTATION_HPP
#define CREQ_ANNOTATION_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "json.hpp"

#include "creq/corpus.hpp"
#include "creq/cue_lexicon.hpp"
#include "creq/error.hpp"
#include "creq/label_store.hpp"

namespace creq {

/// Unknown annotator or sentence.
class NotFoundError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// The annotator has nothing left to label.
class ExhaustedError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Each annotator gets `unique` sentences of their own and `overlap` shared
/// ones, split evenly over every other annotator: with m annotators each pair
/// shares overlap / (m - 1) sentences.
struct AssignmentPlan {
    std::size_t unique = 0;
    std::size_t overlap = 0;
    bool shuffle = false;  ///< randomize each queue; otherwise document order
    std::uint64_t seed = 0;
};

struct Assignment {
    std::vector<std::string> annotators;
    std::map<std::string, std::vector<std::string>> queues;  ///< annotator -> sentence ids, in serving order
    /// (a, b) with a < b in annotator order -> shared sentence ids
    std::map<std::pair<std::string, std::string>, std::vector<std::string>> shared;

    [[nodiscard]] bool assigned(const std::string& annotator, const std::string& sentence_id) const;
};

/// Takes sentences in the given order: unique blocks per annotator first, then
/// one block per annotator pair. Throws when the pool is too small, the
/// overlap does not divide evenly, or annotators repeat.
Assignment assign_tasks(const std::vector<std::string>& sentence_ids, const std::vector<std::string>& annotators,
                        const AssignmentPlan& plan);

struct CategoryDescriptor {
    std::string key;
    std::string name;
    std::vector<std::string> values;
    bool dependent = false;
};

std::vector<CategoryDescriptor> category_schema();

struct AnnotatorProgress {
    std::string annotator;
    std::size_t assigned = 0;
    std::size_t labeled = 0;
    std::size_t deferred = 0;
};

struct AnnotationTask {
    Sentence sentence;
    std::optional<Sentence> predecessor;
    std::optional<Sentence> successor;
    std::vector<CategoryDescriptor> categories;
    std::vector<std::string> known_cues;
    AnnotatorProgress progress;
};

struct SentenceContext {
    Sentence sentence;
    std::optional<Sentence> predecessor;
    std::optional<Sentence> successor;
};

nlohmann::json sentence_to_json(const Sentence& s);
nlohmann::json task_to_json(const AnnotationTask& task);
nlohmann::json context_to_json(const SentenceContext& context);
nlohmann::json progress_to_json(const std::vector<AnnotatorProgress>& progress);

struct CueAddResult {
    bool added = false;
    std::string phrase;  ///< normalized
    std::size_t lexicon_size = 0;
};

struct ServiceConfig {
    std::vector<std::string> annotators;
    AssignmentPlan plan;
    std::filesystem::path store_dir;
    /// Loaded when it exists; rewritten after every added phrase. Empty keeps the lexicon in memory.
    std::filesystem::path lexicon_path;
    LabelStoreOptions store_options;
};

/// {"annotators": [...], "unique": n, "overlap": n, "shuffle": false, "seed": 0}
ServiceConfig service_config_from_json(const nlohmann::json& j);

/// Task serving and label intake over a fixed sentence pool. Thread-safe:
/// writes are serialized, reads share a lock.
class AnnotationService {
public:
    AnnotationService(LabeledCorpus corpus, ServiceConfig config);

    /// First assigned sentence the annotator has neither labeled nor deferred;
    /// deferred sentences come back after those, oldest deferral first.
    [[nodiscard]] AnnotationTask next_task(const std::string& annotator) const;
    [[nodiscard]] SentenceContext context(const std::string& sentence_id) const;

    /// Rejects invariant violations, unknown annotators or sentences, sentences
    /// outside the annotator's assignment and cue phrases missing from the lexicon.
    Acknowledgment submit_label(const CausalLabelRecord& record);
    std::uint64_t defer(const std::string& annotator, const std::string& sentence_id);
    /// Whitespace-only phrases throw; an existing phrase is a no-op.
    CueAddResult add_cue_phrase(const std::string& phrase, SyntacticType type,
                                std::optional<Relationship> relationship_class = std::nullopt);

    [[nodiscard]] std::vector<AnnotatorProgress> progress() const;
    [[nodiscard]] CueLexicon lexicon() const;
    /// Current labels citing each lexicon entry, keyed by entry phrase.
    [[nodiscard]] std::map<std::string, std::int64_t> cue_usage() const;
    [[nodiscard]] std::string export_jsonl() const;

    [[nodiscard]] const Assignment& assignment() const noexcept { return assignment_; }
    [[nodiscard]] const LabeledCorpus& corpus() const noexcept { return corpus_; }
    [[nodiscard]] LabelStore& store() noexcept { return *store_; }

private:
    [[nodiscard]] AnnotatorProgress progress_locked(const std::string& annotator) const;
    void require_annotator(const std::string& annotator) const;

    LabeledCorpus corpus_;
    ServiceConfig config_;
    Assignment assignment_;
    CueLexicon lexicon_;
    std::unique_ptr<LabelStore> store_;
    mutable std::shared_mutex mutex_;
};

}  // namespace creq

#endif  // CREQ_ANNOTATION_HPP
