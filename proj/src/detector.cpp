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

#include "creq/detector.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include <fmt/format.h>

#include "creq/error.hpp"

namespace creq {

namespace {
constexpr int kModelFormat = 1;
}

Prediction rule_based_classify(std::string_view text, const CueLexicon& lexicon, std::string sentence_id) {
    const bool causal = !lexicon.match(text).empty();
    return {std::move(sentence_id), causal, causal ? 1.0 : 0.0};
}

Featurized featurize(const LabeledCorpus& corpus, Embedding scheme) {
    if (corpus.empty()) throw ValidationError("cannot featurize an empty corpus");
    std::vector<std::string> texts;
    texts.reserve(corpus.size());
    for (const auto& s : corpus.sentences()) texts.push_back(s.text);
    auto f = Featurizer::fit(texts, scheme);
    auto m = f.transform(texts);
    return {std::move(f), std::move(m)};
}

std::vector<std::uint8_t> gold_labels(const LabeledCorpus& corpus, std::span<const std::string> ids) {
    std::vector<std::uint8_t> y;
    y.reserve(ids.size());
    for (const auto& id : ids) {
        const auto g = corpus.gold_causal(id);
        if (!g) throw ValidationError("sentence '" + id + "' has no label");
        y.push_back(*g ? 1 : 0);
    }
    return y;
}

TextModel TextModel::rule_based(CueLexicon lexicon) {
    if (lexicon.size() == 0) throw ValidationError("the rule baseline needs a non-empty cue lexicon");
    TextModel m;
    m.spec_.algorithm = Algorithm::rule_based;
    m.lexicon_ = std::make_shared<const CueLexicon>(std::move(lexicon));
    return m;
}

TextModel TextModel::train(const ClassifierSpec& spec, std::span<const std::string> texts,
                           std::span<const std::uint8_t> labels, std::uint64_t seed) {
    if (!is_trainable(spec.algorithm)) {
        auto probe = make_classifier(spec, seed);  // throws with the specific reason
        (void)probe;
    }
    if (texts.size() != labels.size()) throw ValidationError("texts and labels differ in length");
    TextModel m;
    m.spec_ = spec;
    m.featurizer_ = Featurizer::fit(texts, spec.embedding.value_or(Embedding::bow));
    const auto x = m.featurizer_->transform(texts, Execution::serial);
    auto c = make_classifier(spec, seed);
    c->fit(x, labels);
    m.classifier_ = std::move(c);
    return m;
}

Prediction TextModel::predict(std::string_view text, std::string sentence_id) const {
    if (lexicon_) return rule_based_classify(text, *lexicon_, std::move(sentence_id));
    const double score = classifier_->predict_proba(featurizer_->transform(text));
    return {std::move(sentence_id), classifier_->decide(score), score};
}

std::vector<Prediction> TextModel::predict(const FeatureMatrix& features, std::span<const std::string> ids) const {
    if (!classifier_) throw ValidationError("the rule baseline predicts from text, not feature rows");
    if (features.fingerprint != featurizer_->fingerprint())
        throw ValidationError("vocabulary mismatch: features were not built with this model's featurizer");
    if (ids.size() != features.rows.size()) throw ValidationError("feature rows and ids differ in length");
    std::vector<Prediction> out;
    out.reserve(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const double score = classifier_->predict_proba(features.rows[i]);
        out.push_back({ids[i], classifier_->decide(score), score});
    }
    return out;
}

std::vector<Prediction> TextModel::predict(const LabeledCorpus& corpus, Execution exec) const {
    const auto& sentences = corpus.sentences();
    std::vector<Prediction> out(sentences.size());
    const auto n = static_cast<std::ptrdiff_t>(sentences.size());
#pragma omp parallel for schedule(dynamic, 64) if (exec == Execution::parallel)
    for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = predict(sentences[i].text, sentences[i].id);
    return out;
}

nlohmann::json TextModel::to_json() const {
    nlohmann::json j = {{"format", kModelFormat}, {"spec", spec_to_json(spec_)}};
    if (lexicon_) {
        auto phrases = nlohmann::json::array();
        for (const auto& e : lexicon_->entries()) {
            phrases.push_back({{"phrase", e.phrase}, {"syntactic_type", to_string(e.syntactic_type)},
                               {"relationship_class", e.relationship_class ? nlohmann::json(to_string(*e.relationship_class))
                                                                           : nlohmann::json(nullptr)}});
        }
        j["lexicon"] = phrases;
    } else {
        j["featurizer"] = featurizer_->to_json();
        j["model"] = classifier_->to_json();
    }
    return j;
}

TextModel TextModel::from_json(const nlohmann::json& j) {
    try {
        if (j.at("format").get<int>() != kModelFormat) throw ValidationError("unsupported model format");
        const auto spec = spec_from_json(j.at("spec"));
        if (spec.algorithm == Algorithm::rule_based) {
            std::vector<CueEntry> entries;
            for (const auto& e : j.at("lexicon")) {
                CueEntry c;
                c.phrase = e.at("phrase").get<std::string>();
                c.syntactic_type = parse_syntactic_type(e.at("syntactic_type").get<std::string>());
                if (const auto& r = e.at("relationship_class"); !r.is_null())
                    c.relationship_class = parse_relationship(r.get<std::string>());
                entries.push_back(std::move(c));
            }
            return rule_based(CueLexicon(std::move(entries)));
        }
        TextModel m;
        m.spec_ = spec;
        m.featurizer_ = Featurizer::from_json(j.at("featurizer"));
        m.classifier_ = classifier_from_json(j.at("model"));
        if (m.classifier_->algorithm() != spec.algorithm) throw ValidationError("model does not match its spec");
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed model file: ") + e.what());
    }
}

void TextModel::save(const std::filesystem::path& path) const {
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw IoError("cannot write " + tmp);
        out << to_json().dump() << '\n';
        if (!out) throw IoError("cannot write " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

TextModel TextModel::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
    return from_json(j);
}

std::string enrich_sequence(std::span<const TaggedToken> tokens, TagMode mode) {
    std::string out;
    for (const auto& t : tokens) {
        const auto& tag = mode == TagMode::pos ? t.pos : t.dep;
        if (t.token.empty() || tag.empty()) throw ValidationError("tagged token with an empty token or tag");
        if (!out.empty()) out += ' ';
        out += t.token;
        out += '_';
        out += tag;
    }
    return out;
}

std::vector<Prediction> read_predictions_jsonl(std::istream& in, const LabeledCorpus* corpus, const std::string& source) {
    std::vector<Prediction> out;
    std::set<std::string> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(source, lineno, e.what());
        }
        if (!j.is_object() || !j.contains("sentence_id") || !j["sentence_id"].is_string())
            throw ParseError(source, lineno, "missing sentence_id");
        if (!j.contains("score") || !j["score"].is_number()) throw ParseError(source, lineno, "missing numeric score");
        Prediction p;
        p.sentence_id = j["sentence_id"].get<std::string>();
        p.score = j["score"].get<double>();
        if (!(p.score >= 0.0 && p.score <= 1.0))
            throw ParseError(source, lineno, fmt::format("score {} of '{}' is outside [0, 1]", p.score, p.sentence_id));
        if (j.contains("label")) {
            if (!j["label"].is_boolean()) throw ParseError(source, lineno, "label must be a boolean");
            p.label = j["label"].get<bool>();
        } else {
            p.label = p.score >= 0.5;
        }
        if (corpus && !corpus->find(p.sentence_id)) throw ParseError(source, lineno, "unknown sentence id '" + p.sentence_id + "'");
        if (!seen.insert(p.sentence_id).second) throw ParseError(source, lineno, "duplicate sentence id '" + p.sentence_id + "'");
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<Prediction> load_external_predictions(const std::filesystem::path& path, const LabeledCorpus* corpus) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return read_predictions_jsonl(in, corpus, path.string());
}

void write_predictions_jsonl(std::span<const Prediction> predictions, std::ostream& out) {
    for (const auto& p : predictions) {
        out << nlohmann::json{{"sentence_id", p.sentence_id}, {"label", p.label}, {"score", p.score}}.dump() << '\n';
    }
}

}  // namespace creq
