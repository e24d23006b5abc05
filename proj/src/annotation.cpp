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

#include "creq/annotation.hpp"

#include <algorithm>
#include <mutex>
#include <set>
#include <span>

#include <fmt/format.h>

#include "creq/domain_counts.hpp"
#include "creq/rng.hpp"
#include "creq/text.hpp"

namespace creq {

using nlohmann::json;

bool Assignment::assigned(const std::string& annotator, const std::string& sentence_id) const {
    const auto it = queues.find(annotator);
    return it != queues.end() && std::find(it->second.begin(), it->second.end(), sentence_id) != it->second.end();
}

Assignment assign_tasks(const std::vector<std::string>& sentence_ids, const std::vector<std::string>& annotators,
                        const AssignmentPlan& plan) {
    const std::size_t m = annotators.size();
    if (m == 0) throw ValidationError("assignment needs at least one annotator");
    if (std::set<std::string>(annotators.begin(), annotators.end()).size() != m) {
        throw ValidationError("annotator ids must be unique");
    }
    for (const auto& a : annotators) {
        if (a.empty()) throw ValidationError("annotator id is empty");
    }
    std::size_t per_pair = 0;
    if (plan.overlap > 0) {
        if (m < 2) throw ValidationError("overlap needs at least two annotators");
        if (plan.overlap % (m - 1) != 0) {
            throw ValidationError(fmt::format("overlap {} does not split evenly over {} partners", plan.overlap, m - 1));
        }
        per_pair = plan.overlap / (m - 1);
    }
    const std::size_t needed = m * plan.unique + m * (m - 1) / 2 * per_pair;
    if (needed > sentence_ids.size()) {
        throw ValidationError(fmt::format("assignment needs {} sentences, pool has {}", needed, sentence_ids.size()));
    }

    Assignment out;
    out.annotators = annotators;
    std::map<std::string, std::size_t> order;
    for (std::size_t i = 0; i < sentence_ids.size(); ++i) order.emplace(sentence_ids[i], i);
    if (order.size() != sentence_ids.size()) throw ValidationError("sentence pool has duplicate ids");

    std::size_t cursor = 0;
    auto take = [&](std::size_t n) {
        std::vector<std::string> block(sentence_ids.begin() + static_cast<std::ptrdiff_t>(cursor),
                                       sentence_ids.begin() + static_cast<std::ptrdiff_t>(cursor + n));
        cursor += n;
        return block;
    };
    for (const auto& a : annotators) out.queues[a] = take(plan.unique);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
            auto block = take(per_pair);
            auto& qa = out.queues[annotators[i]];
            auto& qb = out.queues[annotators[j]];
            qa.insert(qa.end(), block.begin(), block.end());
            qb.insert(qb.end(), block.begin(), block.end());
            out.shared[{annotators[i], annotators[j]}] = std::move(block);
        }
    }
    for (std::size_t i = 0; i < m; ++i) {
        auto& q = out.queues[annotators[i]];
        std::sort(q.begin(), q.end(), [&](const auto& x, const auto& y) { return order.at(x) < order.at(y); });
        if (plan.shuffle) {
            Rng rng(derive_seed(plan.seed, i));
            rng.shuffle(std::span<std::string>(q));
        }
    }
    return out;
}

std::vector<CategoryDescriptor> category_schema() {
    std::vector<CategoryDescriptor> out;
    for (const auto c : kAllCategories) {
        out.push_back({std::string(category_key(c)), std::string(category_name(c)), category_values(c), is_dependent(c)});
    }
    return out;
}

json sentence_to_json(const Sentence& s) {
    return {{"id", s.id}, {"text", s.text}, {"document_id", s.document_id}, {"domain", s.domain}, {"position", s.position}};
}

namespace {

json optional_sentence(const std::optional<Sentence>& s) { return s ? sentence_to_json(*s) : json(nullptr); }

std::optional<Sentence> copy_of(const Sentence* s) {
    if (!s) return std::nullopt;
    return *s;
}

json progress_json(const AnnotatorProgress& p) {
    return {{"annotator", p.annotator}, {"assigned", p.assigned}, {"labeled", p.labeled}, {"deferred", p.deferred}};
}

}  // namespace

json task_to_json(const AnnotationTask& t) {
    json cats = json::array();
    for (const auto& c : t.categories) {
        cats.push_back({{"key", c.key}, {"name", c.name}, {"values", c.values}, {"dependent", c.dependent}});
    }
    return {{"sentence", sentence_to_json(t.sentence)},
            {"predecessor", optional_sentence(t.predecessor)},
            {"successor", optional_sentence(t.successor)},
            {"categories", cats},
            {"known_cues", t.known_cues},
            {"progress", progress_json(t.progress)}};
}

json context_to_json(const SentenceContext& c) {
    return {{"sentence", sentence_to_json(c.sentence)},
            {"predecessor", optional_sentence(c.predecessor)},
            {"successor", optional_sentence(c.successor)}};
}

json progress_to_json(const std::vector<AnnotatorProgress>& progress) {
    json rows = json::array();
    std::size_t assigned = 0, labeled = 0;
    for (const auto& p : progress) {
        rows.push_back(progress_json(p));
        assigned += p.assigned;
        labeled += p.labeled;
    }
    return {{"annotators", rows}, {"assigned", assigned}, {"labeled", labeled}};
}

ServiceConfig service_config_from_json(const json& j) {
    if (!j.is_object()) throw ValidationError("service config must be an object");
    ServiceConfig c;
    try {
        c.annotators = j.at("annotators").get<std::vector<std::string>>();
        c.plan.unique = j.value("unique", std::size_t{0});
        c.plan.overlap = j.value("overlap", std::size_t{0});
        c.plan.shuffle = j.value("shuffle", false);
        c.plan.seed = j.value("seed", std::uint64_t{0});
        c.store_options.snapshot_interval = j.value("snapshot_interval", std::size_t{100});
    } catch (const json::exception& e) {
        throw ValidationError(std::string("invalid service config: ") + e.what());
    }
    return c;
}

AnnotationService::AnnotationService(LabeledCorpus corpus, ServiceConfig config)
    : corpus_(std::move(corpus)), config_(std::move(config)) {
    std::vector<std::string> ids;
    ids.reserve(corpus_.size());
    for (const auto& s : corpus_.sentences()) ids.push_back(s.id);
    assignment_ = assign_tasks(ids, config_.annotators, config_.plan);
    if (!config_.lexicon_path.empty() && std::filesystem::exists(config_.lexicon_path)) {
        lexicon_ = load_lexicon(config_.lexicon_path);
    }
    store_ = std::make_unique<LabelStore>(config_.store_dir, config_.store_options);
}

void AnnotationService::require_annotator(const std::string& annotator) const {
    if (!assignment_.queues.contains(annotator)) throw NotFoundError("unknown annotator '" + annotator + "'");
}

AnnotatorProgress AnnotationService::progress_locked(const std::string& annotator) const {
    AnnotatorProgress p;
    p.annotator = annotator;
    const auto& q = assignment_.queues.at(annotator);
    p.assigned = q.size();
    for (const auto& id : q) {
        if (store_->current(id, annotator)) {
            ++p.labeled;
        } else if (store_->deferred(annotator, id)) {
            ++p.deferred;
        }
    }
    return p;
}

AnnotationTask AnnotationService::next_task(const std::string& annotator) const {
    std::shared_lock lock(mutex_);
    require_annotator(annotator);
    const std::string* pick = nullptr;
    const std::string* oldest_deferred = nullptr;
    std::uint64_t oldest = 0;
    for (const auto& id : assignment_.queues.at(annotator)) {
        if (store_->current(id, annotator)) continue;
        if (const auto d = store_->deferred(annotator, id)) {
            if (!oldest_deferred || *d < oldest) {
                oldest_deferred = &id;
                oldest = *d;
            }
            continue;
        }
        pick = &id;
        break;
    }
    if (!pick) pick = oldest_deferred;
    if (!pick) throw ExhaustedError("assignment of '" + annotator + "' is exhausted");

    AnnotationTask t;
    t.sentence = *corpus_.find(*pick);
    t.predecessor = copy_of(corpus_.predecessor(*pick));
    t.successor = copy_of(corpus_.successor(*pick));
    t.categories = category_schema();
    for (const auto& e : lexicon_.entries()) t.known_cues.push_back(e.phrase);
    t.progress = progress_locked(annotator);
    return t;
}

SentenceContext AnnotationService::context(const std::string& sentence_id) const {
    const Sentence* s = corpus_.find(sentence_id);
    if (!s) throw NotFoundError("unknown sentence '" + sentence_id + "'");
    return {*s, copy_of(corpus_.predecessor(sentence_id)), copy_of(corpus_.successor(sentence_id))};
}

Acknowledgment AnnotationService::submit_label(const CausalLabelRecord& record) {
    validate_label(record);
    std::unique_lock lock(mutex_);
    require_annotator(record.annotator);
    if (!corpus_.find(record.sentence_id)) throw NotFoundError("unknown sentence '" + record.sentence_id + "'");
    if (!assignment_.assigned(record.annotator, record.sentence_id)) {
        throw ValidationError("sentence '" + record.sentence_id + "' is not assigned to '" + record.annotator + "'");
    }
    for (const auto& cue : record.cue_phrases) {
        if (!lexicon_.find(cue) && !lexicon_.find_surface(cue)) {
            throw ValidationError("cue phrase '" + cue + "' is not in the lexicon; add it first");
        }
    }
    return store_->append_label(record);
}

std::uint64_t AnnotationService::defer(const std::string& annotator, const std::string& sentence_id) {
    std::unique_lock lock(mutex_);
    require_annotator(annotator);
    if (!corpus_.find(sentence_id)) throw NotFoundError("unknown sentence '" + sentence_id + "'");
    if (!assignment_.assigned(annotator, sentence_id)) {
        throw ValidationError("sentence '" + sentence_id + "' is not assigned to '" + annotator + "'");
    }
    if (store_->current(sentence_id, annotator)) throw ValidationError("sentence '" + sentence_id + "' is already labeled");
    return store_->append_defer(annotator, sentence_id);
}

CueAddResult AnnotationService::add_cue_phrase(const std::string& phrase, SyntacticType type,
                                               std::optional<Relationship> relationship_class) {
    CueAddResult r;
    r.phrase = text::normalize_phrase(phrase);
    if (r.phrase.empty()) throw ValidationError("cue phrase is empty");
    CueEntry entry;
    entry.phrase = r.phrase;
    entry.syntactic_type = type;
    entry.relationship_class = relationship_class;
    std::unique_lock lock(mutex_);
    CueLexicon next = lexicon_;
    r.added = next.add(entry);
    if (r.added) {
        if (!config_.lexicon_path.empty()) save_lexicon(next, config_.lexicon_path);
        lexicon_ = std::move(next);
        store_->append_cue(r.phrase, std::string(to_string(type)));
    }
    r.lexicon_size = lexicon_.size();
    return r;
}

std::vector<AnnotatorProgress> AnnotationService::progress() const {
    std::shared_lock lock(mutex_);
    std::vector<AnnotatorProgress> out;
    for (const auto& a : assignment_.annotators) out.push_back(progress_locked(a));
    return out;
}

CueLexicon AnnotationService::lexicon() const {
    std::shared_lock lock(mutex_);
    return lexicon_;
}

std::map<std::string, std::int64_t> AnnotationService::cue_usage() const {
    std::shared_lock lock(mutex_);
    std::map<std::string, std::int64_t> out;
    for (const auto& e : lexicon_.entries()) out[e.phrase] = 0;
    for (const auto& r : store_->labels()) {
        std::set<std::size_t> hit;
        for (const auto& cue : r.cue_phrases) {
            auto i = lexicon_.find(cue);
            if (!i) i = lexicon_.find_surface(cue);
            if (i) hit.insert(*i);
        }
        for (const auto i : hit) ++out[lexicon_.entries()[i].phrase];
    }
    return out;
}

std::string AnnotationService::export_jsonl() const { return store_->export_jsonl(); }

}  // namespace creq
