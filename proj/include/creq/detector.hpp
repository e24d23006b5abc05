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

#ifndef CREQ_DETECTOR_HPP
#define CREQ_DETECTOR_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "creq/classifiers.hpp"
#include "creq/corpus.hpp"
#include "creq/cue_lexicon.hpp"
#include "creq/features.hpp"

namespace creq {

struct Prediction {
    std::string sentence_id;
    bool label = false;
    double score = 0.0;  ///< causal probability, or 1/0 for the rule baseline

    bool operator==(const Prediction&) const = default;
};

/// Causal exactly when the lexicon matches at least one cue in the text.
Prediction rule_based_classify(std::string_view text, const CueLexicon& lexicon, std::string sentence_id = {});

struct Featurized {
    Featurizer featurizer;
    FeatureMatrix matrix;
};

/// Fits the vocabulary on every sentence of the corpus and transforms them in order.
Featurized featurize(const LabeledCorpus& corpus, Embedding scheme);

/// Gold causal labels of the given sentences (1 = causal). Throws for unlabeled ones.
std::vector<std::uint8_t> gold_labels(const LabeledCorpus& corpus, std::span<const std::string> ids);

/// A trained text classifier: the rule baseline, or a featurizer plus model.
/// Immutable after training and safe to share across threads.
class TextModel {
public:
    static TextModel rule_based(CueLexicon lexicon);
    /// Fits the featurizer on `texts` then the classifier. Throws for
    /// algorithms that cannot be trained here.
    static TextModel train(const ClassifierSpec& spec, std::span<const std::string> texts,
                           std::span<const std::uint8_t> labels, std::uint64_t seed);

    [[nodiscard]] Prediction predict(std::string_view text, std::string sentence_id = {}) const;
    /// Rows must come from this model's featurizer (checked by fingerprint).
    [[nodiscard]] std::vector<Prediction> predict(const FeatureMatrix& features, std::span<const std::string> ids) const;
    [[nodiscard]] std::vector<Prediction> predict(const LabeledCorpus& corpus, Execution exec = Execution::parallel) const;

    [[nodiscard]] const ClassifierSpec& spec() const noexcept { return spec_; }
    [[nodiscard]] const Featurizer* featurizer() const noexcept { return featurizer_ ? &*featurizer_ : nullptr; }
    [[nodiscard]] const Classifier* classifier() const noexcept { return classifier_.get(); }

    [[nodiscard]] nlohmann::json to_json() const;
    static TextModel from_json(const nlohmann::json& j);
    void save(const std::filesystem::path& path) const;
    static TextModel load(const std::filesystem::path& path);

private:
    TextModel() = default;

    ClassifierSpec spec_;
    std::shared_ptr<const CueLexicon> lexicon_;
    std::optional<Featurizer> featurizer_;
    std::shared_ptr<const Classifier> classifier_;
};

enum class TagMode { pos, dep };

struct TaggedToken {
    std::string token;
    std::string pos;
    std::string dep;
};

/// "token_TAG" units joined by single spaces, e.g. "If_SCONJ the_DET ...".
std::string enrich_sequence(std::span<const TaggedToken> tokens, TagMode mode);

/// Reads {"sentence_id","label","score"} lines. With a corpus, ids must exist in
/// it. Duplicate ids and scores outside [0,1] are rejected. A missing label
/// defaults to score >= 0.5.
std::vector<Prediction> read_predictions_jsonl(std::istream& in, const LabeledCorpus* corpus = nullptr,
                                               const std::string& source = "<predictions>");
std::vector<Prediction> load_external_predictions(const std::filesystem::path& path, const LabeledCorpus* corpus = nullptr);
void write_predictions_jsonl(std::span<const Prediction> predictions, std::ostream& out);

}  // namespace creq

#endif  // CREQ_DETECTOR_HPP
