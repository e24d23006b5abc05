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

#include "creq/features.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <fmt/format.h>

#include "creq/digest.hpp"
#include "creq/error.hpp"
#include "creq/text.hpp"

namespace creq {

std::string_view to_string(Embedding e) { return e == Embedding::bow ? "BoW" : "TF-IDF"; }

Embedding parse_embedding(std::string_view s) {
    std::string k;
    for (const char c : text::to_lower(text::trim(s))) {
        if (c != '-' && c != '_' && c != ' ') k.push_back(c);
    }
    if (k == "bow" || k == "bagofwords" || k == "counts") return Embedding::bow;
    if (k == "tfidf") return Embedding::tfidf;
    throw ValidationError("unknown embedding '" + std::string(s) + "'");
}

double SparseRow::squared_norm() const {
    double s = 0.0;
    for (const double v : value) s += v * v;
    return s;
}

double SparseRow::dot(const SparseRow& o) const {
    double s = 0.0;
    std::size_t i = 0, j = 0;
    while (i < index.size() && j < o.index.size()) {
        if (index[i] == o.index[j]) {
            s += value[i++] * o.value[j++];
        } else if (index[i] < o.index[j]) {
            ++i;
        } else {
            ++j;
        }
    }
    return s;
}

double SparseRow::at(std::uint32_t i) const {
    const auto it = std::lower_bound(index.begin(), index.end(), i);
    return it != index.end() && *it == i ? value[static_cast<std::size_t>(it - index.begin())] : 0.0;
}

Vocabulary::Vocabulary(std::vector<std::string> terms) : terms_(std::move(terms)) {
    std::sort(terms_.begin(), terms_.end());
    terms_.erase(std::unique(terms_.begin(), terms_.end()), terms_.end());
    for (std::size_t i = 0; i < terms_.size(); ++i) ids_.emplace(terms_[i], static_cast<std::uint32_t>(i));
}

std::optional<std::uint32_t> Vocabulary::id(std::string_view term) const {
    const auto it = ids_.find(std::string(term));
    if (it == ids_.end()) return std::nullopt;
    return it->second;
}

Featurizer::Featurizer(Vocabulary vocab, std::vector<double> idf, Embedding scheme)
    : vocab_(std::move(vocab)), idf_(std::move(idf)), scheme_(scheme) {
    std::string blob(to_string(scheme_));
    for (std::size_t i = 0; i < vocab_.size(); ++i) {
        blob += '\n';
        blob += vocab_.terms()[i];
        if (scheme_ == Embedding::tfidf) blob += fmt::format("\t{:.17g}", idf_[i]);
    }
    fingerprint_ = sha256_hex(blob);
}

Featurizer Featurizer::fit(std::span<const std::string> texts, Embedding scheme) {
    std::map<std::string, std::size_t> df;
    for (const auto& t : texts) {
        auto ws = text::words(t);
        std::sort(ws.begin(), ws.end());
        ws.erase(std::unique(ws.begin(), ws.end()), ws.end());
        for (auto& w : ws) ++df[std::move(w)];
    }
    if (df.empty()) throw ValidationError("empty vocabulary: no training text contains a word");
    std::vector<std::string> terms;
    std::vector<double> idf;
    const auto n = static_cast<double>(texts.size());
    for (const auto& [term, count] : df) {
        terms.push_back(term);
        idf.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(count))) + 1.0);
    }
    return Featurizer(Vocabulary(std::move(terms)), std::move(idf), scheme);
}

SparseRow Featurizer::transform(std::string_view input) const {
    std::map<std::uint32_t, double> counts;
    for (const auto& w : text::words(input)) {
        if (auto id = vocab_.id(w)) counts[*id] += 1.0;
    }
    SparseRow row;
    row.index.reserve(counts.size());
    row.value.reserve(counts.size());
    for (const auto& [i, c] : counts) {
        row.index.push_back(i);
        row.value.push_back(scheme_ == Embedding::tfidf ? c * idf_[i] : c);
    }
    if (scheme_ == Embedding::tfidf) {
        const double norm = std::sqrt(row.squared_norm());
        if (norm > 0.0) {
            for (auto& v : row.value) v /= norm;
        }
    }
    return row;
}

FeatureMatrix Featurizer::transform(std::span<const std::string> texts, Execution exec) const {
    FeatureMatrix m;
    m.dim = vocab_.size();
    m.scheme = scheme_;
    m.fingerprint = fingerprint_;
    m.rows.resize(texts.size());
    const auto n = static_cast<std::ptrdiff_t>(texts.size());
#pragma omp parallel for schedule(static) if (exec == Execution::parallel)
    for (std::ptrdiff_t i = 0; i < n; ++i) m.rows[i] = transform(texts[i]);
    return m;
}

nlohmann::json Featurizer::to_json() const {
    nlohmann::json j = {{"scheme", to_string(scheme_)}, {"vocabulary", vocab_.terms()}, {"fingerprint", fingerprint_}};
    if (scheme_ == Embedding::tfidf) j["idf"] = idf_;
    return j;
}

Featurizer Featurizer::from_json(const nlohmann::json& j) {
    try {
        const auto scheme = parse_embedding(j.at("scheme").get<std::string>());
        auto terms = j.at("vocabulary").get<std::vector<std::string>>();
        if (!std::is_sorted(terms.begin(), terms.end()) || std::adjacent_find(terms.begin(), terms.end()) != terms.end())
            throw ValidationError("vocabulary must be sorted and unique");
        std::vector<double> idf(terms.size(), 1.0);
        if (scheme == Embedding::tfidf) idf = j.at("idf").get<std::vector<double>>();
        if (idf.size() != terms.size()) throw ValidationError("idf length does not match the vocabulary");
        Featurizer f(Vocabulary(std::move(terms)), std::move(idf), scheme);
        if (j.contains("fingerprint") && j["fingerprint"].get<std::string>() != f.fingerprint_)
            throw ValidationError("featurizer fingerprint does not match its vocabulary");
        return f;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed featurizer: ") + e.what());
    }
}

}  // namespace creq
