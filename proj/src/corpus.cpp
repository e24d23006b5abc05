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

#include "creq/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "creq/csv.hpp"
#include "creq/error.hpp"
#include "creq/rng.hpp"
#include "creq/text.hpp"

namespace creq {

using nlohmann::json;

std::string_view to_string(Relationship r) {
    switch (r) {
        case Relationship::cause: return "cause";
        case Relationship::enable: return "enable";
        case Relationship::prevent: return "prevent";
    }
    return "?";
}

std::string_view to_string(Temporality t) {
    switch (t) {
        case Temporality::before: return "before";
        case Temporality::overlap: return "overlap";
        case Temporality::during: return "during";
    }
    return "?";
}

Relationship parse_relationship(std::string_view s) {
    const auto v = text::to_lower(text::trim(s));
    if (v == "cause") return Relationship::cause;
    if (v == "enable") return Relationship::enable;
    if (v == "prevent") return Relationship::prevent;
    throw ValidationError("invalid relationship '" + std::string(s) + "' (expected cause, enable or prevent)");
}

Temporality parse_temporality(std::string_view s) {
    const auto v = text::to_lower(text::trim(s));
    if (v == "before") return Temporality::before;
    if (v == "overlap") return Temporality::overlap;
    if (v == "during") return Temporality::during;
    throw ValidationError("invalid temporality '" + std::string(s) + "' (expected before, overlap or during)");
}

namespace {

struct DependentField {
    const char* name;
    bool present;
};

std::vector<DependentField> dependent_fields(const CausalLabelRecord& r) {
    return {{"explicit", r.is_explicit.has_value()},
            {"marked", r.marked.has_value()},
            {"single_sentence", r.single_sentence.has_value()},
            {"single_cause", r.single_cause.has_value()},
            {"single_effect", r.single_effect.has_value()},
            {"event_chain", r.event_chain.has_value()},
            {"relationship", r.relationship.has_value()},
            {"temporality", r.temporality.has_value()}};
}

}  // namespace

void validate_label(const CausalLabelRecord& record) {
    if (record.sentence_id.empty()) throw ValidationError("label without sentence id");
    if (record.annotator.empty()) throw ValidationError("label for '" + record.sentence_id + "' without annotator");
    for (const auto& f : dependent_fields(record)) {
        if (!record.causal && f.present) {
            throw ValidationError("dependent field on non-causal sentence: '" + std::string(f.name) + "' set for '" +
                                  record.sentence_id + "'");
        }
        if (record.causal && !f.present) {
            throw ValidationError("causal label for '" + record.sentence_id + "' is missing dependent field '" +
                                  std::string(f.name) + "'");
        }
    }
}

json label_to_json(const CausalLabelRecord& r, bool with_sentence_id) {
    json j;
    if (with_sentence_id) j["sentence_id"] = r.sentence_id;
    j["annotator"] = r.annotator;
    j["causal"] = r.causal;
    auto put = [&](const char* key, const std::optional<bool>& v) {
        if (v) j[key] = *v;
    };
    put("explicit", r.is_explicit);
    put("marked", r.marked);
    put("single_sentence", r.single_sentence);
    put("single_cause", r.single_cause);
    put("single_effect", r.single_effect);
    put("event_chain", r.event_chain);
    if (r.relationship) j["relationship"] = std::string(to_string(*r.relationship));
    if (r.temporality) j["temporality"] = std::string(to_string(*r.temporality));
    j["cue_phrases"] = r.cue_phrases;
    return j;
}

CausalLabelRecord label_from_json(const json& j, std::string_view sentence_id) {
    if (!j.is_object()) throw ValidationError("label must be a JSON object");
    CausalLabelRecord r;
    r.sentence_id = j.contains("sentence_id") ? j.at("sentence_id").get<std::string>() : std::string(sentence_id);
    if (!j.contains("annotator") || !j.at("annotator").is_string()) {
        throw ValidationError("label is missing string field 'annotator'");
    }
    r.annotator = j.at("annotator").get<std::string>();
    if (!j.contains("causal") || !j.at("causal").is_boolean()) {
        throw ValidationError("label is missing boolean field 'causal'");
    }
    r.causal = j.at("causal").get<bool>();
    auto get = [&](const char* key, std::optional<bool>& out) {
        if (!j.contains(key) || j.at(key).is_null()) return;
        if (!j.at(key).is_boolean()) throw ValidationError(std::string("field '") + key + "' must be boolean");
        out = j.at(key).get<bool>();
    };
    get("explicit", r.is_explicit);
    get("marked", r.marked);
    get("single_sentence", r.single_sentence);
    get("single_cause", r.single_cause);
    get("single_effect", r.single_effect);
    get("event_chain", r.event_chain);
    if (j.contains("relationship") && !j.at("relationship").is_null()) {
        r.relationship = parse_relationship(j.at("relationship").get<std::string>());
    }
    if (j.contains("temporality") && !j.at("temporality").is_null()) {
        r.temporality = parse_temporality(j.at("temporality").get<std::string>());
    }
    if (j.contains("cue_phrases") && !j.at("cue_phrases").is_null()) {
        for (const auto& p : j.at("cue_phrases")) r.cue_phrases.push_back(text::normalize_phrase(p.get<std::string>()));
    }
    validate_label(r);
    return r;
}

void LabeledCorpus::add_sentence(Sentence sentence) {
    if (sentence.id.empty()) throw ValidationError("sentence without id");
    if (text::trim(sentence.text).empty()) throw ValidationError("sentence '" + sentence.id + "' has empty text");
    if (sentence_index_.count(sentence.id) != 0) throw ValidationError("duplicate sentence id '" + sentence.id + "'");
    const auto key = std::make_pair(sentence.document_id, sentence.position);
    if (by_position_.count(key) != 0) {
        throw ValidationError("sentence '" + sentence.id + "' reuses position " + std::to_string(sentence.position) +
                              " of document '" + sentence.document_id + "'");
    }
    by_position_.emplace(key, sentences_.size());
    sentence_index_.emplace(sentence.id, sentences_.size());
    sentences_.push_back(std::move(sentence));
}

void LabeledCorpus::add_label(CausalLabelRecord record) {
    validate_label(record);
    if (sentence_index_.count(record.sentence_id) == 0) {
        throw ValidationError("label references unknown sentence '" + record.sentence_id + "'");
    }
    auto& slots = labels_by_sentence_[record.sentence_id];
    for (const auto idx : slots) {
        if (labels_[idx].annotator == record.annotator) {
            throw ValidationError("duplicate label for (sentence '" + record.sentence_id + "', annotator '" +
                                  record.annotator + "')");
        }
    }
    slots.push_back(labels_.size());
    labels_.push_back(std::move(record));
}

void LabeledCorpus::add_document(Document document) {
    const std::string id = document.id;
    documents_[id] = std::move(document);
}

const Sentence* LabeledCorpus::find(std::string_view id) const {
    const auto it = sentence_index_.find(std::string(id));
    return it == sentence_index_.end() ? nullptr : &sentences_[it->second];
}

std::vector<const CausalLabelRecord*> LabeledCorpus::labels_for(std::string_view sentence_id) const {
    std::vector<const CausalLabelRecord*> out;
    const auto it = labels_by_sentence_.find(std::string(sentence_id));
    if (it == labels_by_sentence_.end()) return out;
    for (const auto idx : it->second) out.push_back(&labels_[idx]);
    return out;
}

const CausalLabelRecord* LabeledCorpus::gold(std::string_view sentence_id) const {
    const auto it = labels_by_sentence_.find(std::string(sentence_id));
    if (it == labels_by_sentence_.end() || it->second.empty()) return nullptr;
    for (const auto idx : it->second) {
        if (labels_[idx].annotator == "gold") return &labels_[idx];
    }
    return &labels_[it->second.front()];
}

std::optional<bool> LabeledCorpus::gold_causal(std::string_view sentence_id) const {
    const auto* g = gold(sentence_id);
    if (g == nullptr) return std::nullopt;
    return g->causal;
}

std::vector<std::string> LabeledCorpus::domains() const {
    std::vector<std::string> out;
    for (const auto& s : sentences_) out.push_back(s.domain);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

const Sentence* LabeledCorpus::at_position(const std::string& document_id, std::size_t position) const {
    const auto it = by_position_.find({document_id, position});
    return it == by_position_.end() ? nullptr : &sentences_[it->second];
}

const Sentence* LabeledCorpus::predecessor(std::string_view sentence_id) const {
    const auto* s = find(sentence_id);
    if (s == nullptr || s->position == 0) return nullptr;
    return at_position(s->document_id, s->position - 1);
}

const Sentence* LabeledCorpus::successor(std::string_view sentence_id) const {
    const auto* s = find(sentence_id);
    if (s == nullptr) return nullptr;
    return at_position(s->document_id, s->position + 1);
}

LabeledCorpus LabeledCorpus::subset(const std::vector<std::string>& ids) const {
    std::vector<std::size_t> picked;
    picked.reserve(ids.size());
    for (const auto& id : ids) {
        const auto it = sentence_index_.find(id);
        if (it == sentence_index_.end()) throw ValidationError("subset references unknown sentence '" + id + "'");
        picked.push_back(it->second);
    }
    std::sort(picked.begin(), picked.end());
    picked.erase(std::unique(picked.begin(), picked.end()), picked.end());
    LabeledCorpus out;
    for (const auto idx : picked) {
        const auto& s = sentences_[idx];
        out.add_sentence(s);
        if (const auto d = documents_.find(s.document_id); d != documents_.end()) out.documents_.insert(*d);
    }
    for (const auto idx : picked) {
        const auto it = labels_by_sentence_.find(sentences_[idx].id);
        if (it == labels_by_sentence_.end()) continue;
        for (const auto l : it->second) out.add_label(labels_[l]);
    }
    return out;
}

namespace {

std::string require_string(const json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_string()) throw ValidationError(std::string("missing string field '") + key + "'");
    return j.at(key).get<std::string>();
}

Document document_from_json(const json& j) {
    Document d;
    d.id = require_string(j, "id");
    if (j.contains("domain") && j.at("domain").is_string()) d.domain = j.at("domain").get<std::string>();
    if (j.contains("year") && j.at("year").is_number_integer()) d.year = j.at("year").get<int>();
    if (j.contains("date") && j.at("date").is_string()) d.date = j.at("date").get<std::string>();
    return d;
}

}  // namespace

LabeledCorpus parse_corpus_jsonl(std::istream& in, const std::string& source) {
    LabeledCorpus corpus;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (text::trim(line).empty()) continue;
        try {
            const json j = json::parse(line);
            if (!j.is_object()) throw ValidationError("record must be a JSON object");
            if (j.contains("document")) {
                corpus.add_document(document_from_json(j.at("document")));
                continue;
            }
            Sentence s;
            s.id = require_string(j, "id");
            s.text = require_string(j, "text");
            s.document_id = require_string(j, "document_id");
            s.domain = require_string(j, "domain");
            if (!j.contains("position") || !j.at("position").is_number_unsigned()) {
                throw ValidationError("missing non-negative integer field 'position'");
            }
            s.position = j.at("position").get<std::size_t>();
            const std::string id = s.id;
            corpus.add_sentence(std::move(s));
            if (j.contains("labels")) {
                for (const auto& l : j.at("labels")) corpus.add_label(label_from_json(l, id));
            }
        } catch (const json::exception& e) {
            throw ParseError(source, lineno, std::string("malformed record: ") + e.what());
        } catch (const ParseError&) {
            throw;
        } catch (const ValidationError& e) {
            throw ParseError(source, lineno, e.what());
        }
    }
    return corpus;
}

namespace {

std::optional<bool> parse_csv_bool(const std::string& raw, const char* column) {
    const auto v = text::to_lower(text::trim(raw));
    if (v.empty()) return std::nullopt;
    if (v == "1" || v == "true" || v == "yes") return true;
    if (v == "0" || v == "false" || v == "no") return false;
    throw ValidationError(std::string("column '") + column + "' has non-boolean value '" + raw + "'");
}

}  // namespace

LabeledCorpus parse_corpus_csv(std::istream& in, const std::string& source) {
    csv::Reader reader(in);
    const auto header_row = reader.next();
    if (!header_row) return {};
    const csv::Header h(*header_row);
    for (const char* col : {"id", "text", "document_id", "domain", "position"}) {
        if (!h.has(col)) throw ParseError(source, 1, std::string("missing column '") + col + "'");
    }
    LabeledCorpus corpus;
    while (auto row = reader.next()) {
        if (row->size() == 1 && text::trim((*row)[0]).empty()) continue;
        const auto lineno = reader.line();
        try {
            const std::string id = h.get(*row, "id");
            if (corpus.find(id) == nullptr) {
                Sentence s;
                s.id = id;
                s.text = h.get(*row, "text");
                s.document_id = h.get(*row, "document_id");
                s.domain = h.get(*row, "domain");
                const auto pos = std::string(text::trim(h.get(*row, "position")));
                if (pos.empty() || pos.find_first_not_of("0123456789") != std::string::npos) {
                    throw ValidationError("position must be a non-negative integer, got '" + pos + "'");
                }
                s.position = std::stoull(pos);
                corpus.add_sentence(std::move(s));
            }
            const std::string annotator = std::string(text::trim(h.get(*row, "annotator")));
            if (annotator.empty()) continue;
            CausalLabelRecord r;
            r.sentence_id = id;
            r.annotator = annotator;
            const auto causal = parse_csv_bool(h.get(*row, "causal"), "causal");
            if (!causal) throw ValidationError("labelled row without 'causal' value");
            r.causal = *causal;
            r.is_explicit = parse_csv_bool(h.get(*row, "explicit"), "explicit");
            r.marked = parse_csv_bool(h.get(*row, "marked"), "marked");
            r.single_sentence = parse_csv_bool(h.get(*row, "single_sentence"), "single_sentence");
            r.single_cause = parse_csv_bool(h.get(*row, "single_cause"), "single_cause");
            r.single_effect = parse_csv_bool(h.get(*row, "single_effect"), "single_effect");
            r.event_chain = parse_csv_bool(h.get(*row, "event_chain"), "event_chain");
            if (const auto rel = h.get(*row, "relationship"); !text::trim(rel).empty()) {
                r.relationship = parse_relationship(rel);
            }
            if (const auto tmp = h.get(*row, "temporality"); !text::trim(tmp).empty()) {
                r.temporality = parse_temporality(tmp);
            }
            std::stringstream cues(h.get(*row, "cue_phrases"));
            std::string cue;
            while (std::getline(cues, cue, ';')) {
                auto norm = text::normalize_phrase(cue);
                if (!norm.empty()) r.cue_phrases.push_back(std::move(norm));
            }
            corpus.add_label(std::move(r));
        } catch (const ValidationError& e) {
            throw ParseError(source, lineno, e.what());
        } catch (const std::exception& e) {
            throw ParseError(source, lineno, std::string("malformed record: ") + e.what());
        }
    }
    return corpus;
}

LabeledCorpus load_corpus(const std::filesystem::path& path, CorpusFormat format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open corpus file '" + path.string() + "'");
    return format == CorpusFormat::csv ? parse_corpus_csv(in, path.string()) : parse_corpus_jsonl(in, path.string());
}

LabeledCorpus load_corpus(const std::filesystem::path& path) {
    return load_corpus(path, text::to_lower(path.extension().string()) == ".csv" ? CorpusFormat::csv : CorpusFormat::jsonl);
}

void write_corpus_jsonl(const LabeledCorpus& corpus, std::ostream& out) {
    for (const auto& [id, d] : corpus.documents()) {
        json doc{{"id", d.id}, {"domain", d.domain}};
        if (d.year) doc["year"] = *d.year;
        if (d.date) doc["date"] = *d.date;
        out << json{{"document", doc}}.dump() << '\n';
    }
    for (const auto& s : corpus.sentences()) {
        json j{{"id", s.id}, {"text", s.text}, {"document_id", s.document_id}, {"domain", s.domain}, {"position", s.position}};
        json labels = json::array();
        for (const auto* l : corpus.labels_for(s.id)) labels.push_back(label_to_json(*l, false));
        j["labels"] = std::move(labels);
        out << j.dump() << '\n';
    }
}

std::map<std::string, LabeledCorpus> stratify(const LabeledCorpus& corpus, std::size_t min_count) {
    std::map<std::string, std::vector<std::string>> ids;
    for (const auto& s : corpus.sentences()) ids[s.domain].push_back(s.id);
    std::map<std::string, LabeledCorpus> out;
    for (const auto& [domain, members] : ids) {
        if (members.size() >= min_count) out.emplace(domain, corpus.subset(members));
    }
    return out;
}

LabeledCorpus random_undersample(const LabeledCorpus& corpus, std::uint64_t seed) {
    std::vector<std::string> pos;
    std::vector<std::string> neg;
    for (const auto& s : corpus.sentences()) {
        const auto g = corpus.gold_causal(s.id);
        if (!g) continue;
        (*g ? pos : neg).push_back(s.id);
    }
    if (pos.empty() || neg.empty()) throw ValidationError("random undersampling needs both classes; corpus has a single class");
    auto& majority = pos.size() > neg.size() ? pos : neg;
    const auto& minority = pos.size() > neg.size() ? neg : pos;
    Rng rng(seed);
    rng.shuffle(std::span<std::string>(majority));
    majority.resize(minority.size());
    std::vector<std::string> keep = pos;
    keep.insert(keep.end(), neg.begin(), neg.end());
    return corpus.subset(keep);
}

const std::vector<std::string>& FoldPlan::test_ids(std::size_t rep, std::size_t fold) const {
    return assignments.at(rep).at(fold);
}

std::vector<std::string> FoldPlan::train_ids(std::size_t rep, std::size_t fold) const {
    std::vector<std::string> out;
    const auto& folds = assignments.at(rep);
    for (std::size_t f = 0; f < folds.size(); ++f) {
        if (f == fold) continue;
        out.insert(out.end(), folds[f].begin(), folds[f].end());
    }
    return out;
}

json fold_plan_to_json(const FoldPlan& plan) {
    return json{{"k", plan.k}, {"repetitions", plan.repetitions}, {"seed", plan.seed}, {"assignments", plan.assignments}};
}

FoldPlan split_kfold(const LabeledCorpus& corpus, std::size_t k, std::size_t repetitions, std::uint64_t seed) {
    if (k < 2) throw ValidationError("k-fold split needs k >= 2");
    if (k > corpus.size()) {
        throw ValidationError("k = " + std::to_string(k) + " exceeds corpus size " + std::to_string(corpus.size()));
    }
    if (repetitions == 0) throw ValidationError("k-fold split needs at least one repetition");
    // strata: causal, not causal, unlabeled
    std::array<std::vector<std::string>, 3> strata;
    for (const auto& s : corpus.sentences()) {
        const auto g = corpus.gold_causal(s.id);
        strata[g ? (*g ? 0 : 1) : 2].push_back(s.id);
    }
    FoldPlan plan{k, repetitions, seed, {}};
    for (std::size_t rep = 0; rep < repetitions; ++rep) {
        Rng rng(derive_seed(seed, rep));
        std::vector<std::vector<std::string>> folds(k);
        std::size_t dealt = 0;
        for (auto stratum : strata) {
            rng.shuffle(std::span<std::string>(stratum));
            for (auto& id : stratum) folds[dealt++ % k].push_back(std::move(id));
        }
        plan.assignments.push_back(std::move(folds));
    }
    return plan;
}

}  // namespace creq
