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

#ifndef CREQ_CORPUS_HPP
#define CREQ_CORPUS_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"

namespace creq {

enum class Relationship { cause, enable, prevent };
enum class Temporality { before, overlap, during };

std::string_view to_string(Relationship r);
std::string_view to_string(Temporality t);
Relationship parse_relationship(std::string_view s);
Temporality parse_temporality(std::string_view s);

struct Sentence {
    std::string id;
    std::string text;
    std::string document_id;
    std::string domain;
    std::size_t position = 0;
};

/// One annotator's decision on one sentence. The eight dependent fields are
/// present exactly when `causal` is true.
struct CausalLabelRecord {
    std::string sentence_id;
    std::string annotator;
    bool causal = false;
    std::optional<bool> is_explicit;
    std::optional<bool> marked;
    std::optional<bool> single_sentence;  ///< true: cause and effect in the same sentence
    std::optional<bool> single_cause;
    std::optional<bool> single_effect;
    std::optional<bool> event_chain;
    std::optional<Relationship> relationship;
    std::optional<Temporality> temporality;
    std::vector<std::string> cue_phrases;

    bool operator==(const CausalLabelRecord&) const = default;
};

/// Throws ValidationError when the dependent-field rule is violated.
void validate_label(const CausalLabelRecord& record);

nlohmann::json label_to_json(const CausalLabelRecord& record, bool with_sentence_id = true);
/// Parses the label object of the corpus schema. `sentence_id` is used when
/// the object carries none. Validates the dependent-field rule.
CausalLabelRecord label_from_json(const nlohmann::json& j, std::string_view sentence_id = {});

struct Document {
    std::string id;
    std::string domain;
    std::optional<int> year;
    std::optional<std::string> date;  ///< ISO-8601 calendar date
};

/// Sentences, their labels and document metadata.
///
/// Mutation happens only while loading; afterwards the corpus is shared by
/// const reference and is safe for concurrent reads.
class LabeledCorpus {
public:
    /// Throws on duplicate id, empty text, or a (document, position) clash.
    void add_sentence(Sentence sentence);
    /// Throws on unknown sentence, duplicate (sentence, annotator), or invariant violation.
    void add_label(CausalLabelRecord record);
    void add_document(Document document);

    [[nodiscard]] const std::vector<Sentence>& sentences() const noexcept { return sentences_; }
    [[nodiscard]] const std::vector<CausalLabelRecord>& labels() const noexcept { return labels_; }
    [[nodiscard]] const std::map<std::string, Document>& documents() const noexcept { return documents_; }
    [[nodiscard]] std::size_t size() const noexcept { return sentences_.size(); }
    [[nodiscard]] bool empty() const noexcept { return sentences_.empty(); }

    [[nodiscard]] const Sentence* find(std::string_view id) const;
    [[nodiscard]] std::vector<const CausalLabelRecord*> labels_for(std::string_view sentence_id) const;

    /// Reference label of a sentence: the record of annotator "gold" when
    /// present, otherwise the first record loaded for it. nullptr if unlabeled.
    [[nodiscard]] const CausalLabelRecord* gold(std::string_view sentence_id) const;
    [[nodiscard]] std::optional<bool> gold_causal(std::string_view sentence_id) const;

    /// Sorted, distinct domain names.
    [[nodiscard]] std::vector<std::string> domains() const;

    /// Sentences adjacent to `sentence_id` in its document (position -1 / +1).
    [[nodiscard]] const Sentence* predecessor(std::string_view sentence_id) const;
    [[nodiscard]] const Sentence* successor(std::string_view sentence_id) const;

    /// New corpus holding the given sentences (in this corpus' order) and their labels.
    [[nodiscard]] LabeledCorpus subset(const std::vector<std::string>& ids) const;

private:
    [[nodiscard]] const Sentence* at_position(const std::string& document_id, std::size_t position) const;

    std::vector<Sentence> sentences_;
    std::vector<CausalLabelRecord> labels_;
    std::map<std::string, Document> documents_;
    std::unordered_map<std::string, std::size_t> sentence_index_;
    std::unordered_map<std::string, std::vector<std::size_t>> labels_by_sentence_;
    std::map<std::pair<std::string, std::size_t>, std::size_t> by_position_;
};

enum class CorpusFormat { jsonl, csv };

LabeledCorpus load_corpus(const std::filesystem::path& path, CorpusFormat format);
/// Format from the extension: ".csv" is CSV, everything else JSONL.
LabeledCorpus load_corpus(const std::filesystem::path& path);
LabeledCorpus parse_corpus_jsonl(std::istream& in, const std::string& source = "<jsonl>");
LabeledCorpus parse_corpus_csv(std::istream& in, const std::string& source = "<csv>");
void write_corpus_jsonl(const LabeledCorpus& corpus, std::ostream& out);

/// Domains with at least `min_count` sentences, each as its own sub-corpus.
std::map<std::string, LabeledCorpus> stratify(const LabeledCorpus& corpus, std::size_t min_count);

/// Drops randomly chosen majority-class sentences until both classes (by gold
/// label) have the minority size. Unlabeled sentences are dropped. Corpus
/// order is preserved. Throws when a class is empty.
LabeledCorpus random_undersample(const LabeledCorpus& corpus, std::uint64_t seed);

/// Per repetition, a partition of sentence ids into k folds.
struct FoldPlan {
    std::size_t k = 0;
    std::size_t repetitions = 0;
    std::uint64_t seed = 0;
    /// assignments[rep][fold] = sentence ids
    std::vector<std::vector<std::vector<std::string>>> assignments;

    [[nodiscard]] const std::vector<std::string>& test_ids(std::size_t rep, std::size_t fold) const;
    [[nodiscard]] std::vector<std::string> train_ids(std::size_t rep, std::size_t fold) const;
};

nlohmann::json fold_plan_to_json(const FoldPlan& plan);

/// Class-stratified k-fold assignment repeated `repetitions` times with
/// independent shuffles. Fold sizes within a repetition differ by at most one.
FoldPlan split_kfold(const LabeledCorpus& corpus, std::size_t k, std::size_t repetitions, std::uint64_t seed);

}  // namespace creq

#endif  // CREQ_CORPUS_HPP
