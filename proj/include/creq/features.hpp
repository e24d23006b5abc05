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

#ifndef CREQ_FEATURES_HPP
#define CREQ_FEATURES_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "creq/parallel.hpp"

namespace creq {

enum class Embedding { bow, tfidf };

std::string_view to_string(Embedding e);
/// Accepts "bow", "BoW", "tfidf", "TF-IDF" and similar spellings.
Embedding parse_embedding(std::string_view s);

/// Sparse row with strictly increasing indices.
struct SparseRow {
    std::vector<std::uint32_t> index;
    std::vector<double> value;

    [[nodiscard]] std::size_t nnz() const noexcept { return index.size(); }
    [[nodiscard]] double squared_norm() const;
    [[nodiscard]] double dot(const SparseRow& other) const;
    /// Weight of a term, 0 when absent.
    [[nodiscard]] double at(std::uint32_t i) const;
    bool operator==(const SparseRow&) const = default;
};

/// Term -> column map, terms in sorted order.
class Vocabulary {
public:
    Vocabulary() = default;
    explicit Vocabulary(std::vector<std::string> terms);

    [[nodiscard]] std::optional<std::uint32_t> id(std::string_view term) const;
    [[nodiscard]] std::size_t size() const noexcept { return terms_.size(); }
    [[nodiscard]] const std::vector<std::string>& terms() const noexcept { return terms_; }

private:
    std::vector<std::string> terms_;
    std::unordered_map<std::string, std::uint32_t> ids_;
};

struct FeatureMatrix {
    std::vector<SparseRow> rows;
    std::size_t dim = 0;
    Embedding scheme = Embedding::bow;
    /// Identifies the vocabulary and weighting the rows were built with.
    std::string fingerprint;
};

/// Unigram featurizer. BoW weights are raw counts. TF-IDF weights are
/// count * (ln((1 + N) / (1 + df)) + 1), then each row is scaled to unit L2 norm.
class Featurizer {
public:
    /// Builds the vocabulary (and document frequencies) from `texts` only.
    /// Throws ValidationError when no text contains a word.
    static Featurizer fit(std::span<const std::string> texts, Embedding scheme);

    [[nodiscard]] SparseRow transform(std::string_view text) const;
    [[nodiscard]] FeatureMatrix transform(std::span<const std::string> texts, Execution exec = Execution::parallel) const;

    [[nodiscard]] Embedding scheme() const noexcept { return scheme_; }
    [[nodiscard]] const Vocabulary& vocabulary() const noexcept { return vocab_; }
    [[nodiscard]] const std::vector<double>& idf() const noexcept { return idf_; }
    [[nodiscard]] const std::string& fingerprint() const noexcept { return fingerprint_; }

    [[nodiscard]] nlohmann::json to_json() const;
    static Featurizer from_json(const nlohmann::json& j);

private:
    Featurizer(Vocabulary vocab, std::vector<double> idf, Embedding scheme);

    Vocabulary vocab_;
    std::vector<double> idf_;
    Embedding scheme_ = Embedding::bow;
    std::string fingerprint_;
};

}  // namespace creq

#endif  // CREQ_FEATURES_HPP
