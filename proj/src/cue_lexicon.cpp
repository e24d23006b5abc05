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

#include "creq/cue_lexicon.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <unordered_map>

#include <fmt/format.h>

#include "creq/csv.hpp"
#include "creq/error.hpp"
#include "creq/text.hpp"

namespace creq {

std::string_view to_string(SyntacticType t) {
    switch (t) {
        case SyntacticType::conjunction: return "conjunction";
        case SyntacticType::adverb: return "adverb";
        case SyntacticType::pronoun: return "pronoun";
        case SyntacticType::adjective: return "adjective";
        case SyntacticType::preposition: return "preposition";
        case SyntacticType::verb: return "verb";
    }
    return "?";
}

SyntacticType parse_syntactic_type(std::string_view s) {
    const auto v = text::to_lower(text::trim(s));
    for (auto t : {SyntacticType::conjunction, SyntacticType::adverb, SyntacticType::pronoun,
                   SyntacticType::adjective, SyntacticType::preposition, SyntacticType::verb}) {
        if (v == to_string(t) || v == std::string(to_string(t)) + "s") return t;
    }
    throw ValidationError("unknown syntactic type '" + std::string(s) + "'");
}

namespace {

bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

bool ends_with(std::string_view s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

std::string third_person(const std::string& w) {
    if (ends_with(w, "s") || ends_with(w, "x") || ends_with(w, "z") || ends_with(w, "ch") || ends_with(w, "sh"))
        return w + "es";
    if (w.size() > 1 && w.back() == 'y' && !is_vowel(w[w.size() - 2])) return w.substr(0, w.size() - 1) + "ies";
    return w + "s";
}

std::string past_tense(const std::string& w) {
    // Final-stress doubling cannot be derived from spelling alone.
    static const std::unordered_map<std::string, std::string> irregular = {
        {"permit", "permitted"}, {"admit", "admitted"}, {"commit", "committed"}, {"submit", "submitted"},
        {"omit", "omitted"},     {"occur", "occurred"}, {"prefer", "preferred"}, {"control", "controlled"},
    };
    if (auto it = irregular.find(w); it != irregular.end()) return it->second;
    if (w.back() == 'e') return w + "d";
    if (w.size() > 1 && w.back() == 'y' && !is_vowel(w[w.size() - 2])) return w.substr(0, w.size() - 1) + "ied";
    return w + "ed";
}

using Alternatives = std::vector<std::vector<std::string>>;

Alternatives expand_token(const std::string& tok) {
    if (tok.size() > 2 && tok.front() == '(' && tok.back() == ')') {
        Alternatives out{{}};
        for (auto& a : expand_token(tok.substr(1, tok.size() - 2))) out.push_back(std::move(a));
        return out;
    }
    for (const std::string_view marker : {"(s/ed)", "(s)"}) {
        if (ends_with(tok, marker) && tok.size() > marker.size()) {
            const std::string stem = tok.substr(0, tok.size() - marker.size());
            Alternatives out{{stem}, {third_person(stem)}};
            if (marker == "(s/ed)") out.push_back({past_tense(stem)});
            return out;
        }
    }
    if (tok.find('/') != std::string::npos) {
        Alternatives out;
        std::size_t start = 0;
        while (start <= tok.size()) {
            const auto slash = std::min(tok.find('/', start), tok.size());
            if (slash > start) {
                for (auto& a : expand_token(tok.substr(start, slash - start))) out.push_back(std::move(a));
            }
            start = slash + 1;
        }
        return out;
    }
    return {text::words(tok)};
}

}  // namespace

std::vector<std::vector<std::string>> expand_cue_notation(std::string_view notation) {
    const auto norm = text::normalize_phrase(notation);
    if (norm.empty()) throw ValidationError("cue phrase is empty");
    Alternatives acc{{}};
    std::size_t start = 0;
    while (start < norm.size()) {
        const auto space = std::min(norm.find(' ', start), norm.size());
        const auto options = expand_token(norm.substr(start, space - start));
        Alternatives next;
        for (const auto& prefix : acc) {
            for (const auto& opt : options) {
                auto v = prefix;
                v.insert(v.end(), opt.begin(), opt.end());
                next.push_back(std::move(v));
            }
        }
        acc = std::move(next);
        start = space + 1;
    }
    std::erase_if(acc, [](const auto& v) { return v.empty(); });
    std::sort(acc.begin(), acc.end());
    acc.erase(std::unique(acc.begin(), acc.end()), acc.end());
    if (acc.empty()) throw ValidationError("cue phrase '" + std::string(notation) + "' has no words");
    return acc;
}

std::string CueEntry::base() const {
    std::string b = text::normalize_phrase(phrase);
    for (const std::string_view marker : {"(s/ed)", "(s)"}) {
        for (auto pos = b.find(marker); pos != std::string::npos; pos = b.find(marker)) b.erase(pos, marker.size());
    }
    return b;
}

std::vector<std::vector<std::string>> CueEntry::variants() const { return expand_cue_notation(phrase); }

void validate_cue_entry(const CueEntry& entry) {
    if (text::normalize_phrase(entry.phrase).empty()) throw ValidationError("cue phrase is empty");
    if (entry.relationship_class && entry.syntactic_type != SyntacticType::verb)
        throw ValidationError("relationship class on non-verb cue '" + entry.phrase + "'");
    if (!entry.relationship_class && entry.syntactic_type == SyntacticType::verb)
        throw ValidationError("verb cue '" + entry.phrase + "' needs a relationship class");
    if (entry.causal_count < 0 || entry.noncausal_count < 0) throw ValidationError("negative cue count");
    (void)expand_cue_notation(entry.phrase);
}

struct CueLexicon::Trie {
    struct Node {
        std::unordered_map<std::string, std::uint32_t> children;
        std::vector<std::size_t> entries;
    };
    std::vector<Node> nodes{Node{}};

    void insert(const std::vector<std::string>& words, std::size_t entry) {
        std::uint32_t at = 0;
        for (const auto& w : words) {
            auto it = nodes[at].children.find(w);
            if (it == nodes[at].children.end()) {
                nodes.push_back(Node{});
                it = nodes[at].children.emplace(w, static_cast<std::uint32_t>(nodes.size() - 1)).first;
            }
            at = it->second;
        }
        auto& e = nodes[at].entries;
        if (std::find(e.begin(), e.end(), entry) == e.end()) e.push_back(entry);
    }

    [[nodiscard]] const Node* child(const Node& n, const std::string& w) const {
        const auto it = n.children.find(w);
        return it == n.children.end() ? nullptr : &nodes[it->second];
    }
};

CueLexicon::CueLexicon() : trie_(std::make_unique<Trie>()) {}

CueLexicon::CueLexicon(std::vector<CueEntry> entries) : CueLexicon() {
    for (auto& e : entries) {
        const std::string name = e.phrase;
        if (!add(std::move(e))) throw ValidationError("duplicate cue phrase '" + name + "'");
    }
}

CueLexicon::CueLexicon(const CueLexicon& other)
    : entries_(other.entries_), by_name_(other.by_name_), trie_(std::make_unique<Trie>(*other.trie_)) {}

CueLexicon& CueLexicon::operator=(const CueLexicon& other) {
    if (this != &other) {
        entries_ = other.entries_;
        by_name_ = other.by_name_;
        trie_ = std::make_unique<Trie>(*other.trie_);
    }
    return *this;
}

CueLexicon::CueLexicon(CueLexicon&&) noexcept = default;
CueLexicon& CueLexicon::operator=(CueLexicon&&) noexcept = default;
CueLexicon::~CueLexicon() = default;

bool CueLexicon::add(CueEntry entry) {
    entry.phrase = text::normalize_phrase(entry.phrase);
    validate_cue_entry(entry);
    if (by_name_.contains(entry.phrase) || by_name_.contains(entry.base())) return false;
    entries_.push_back(std::move(entry));
    index(entries_.size() - 1);
    return true;
}

void CueLexicon::index(std::size_t i) {
    const auto& e = entries_[i];
    by_name_.emplace(e.phrase, i);
    by_name_.emplace(e.base(), i);
    for (const auto& v : e.variants()) trie_->insert(v, i);
}

std::optional<std::size_t> CueLexicon::find(std::string_view phrase) const {
    const auto it = by_name_.find(text::normalize_phrase(phrase));
    if (it == by_name_.end()) return std::nullopt;
    return it->second;
}

std::optional<std::size_t> CueLexicon::find_surface(std::string_view surface) const {
    if (auto direct = find(surface)) return direct;
    const auto ws = text::words(surface);
    if (ws.empty()) return std::nullopt;
    const Trie::Node* node = &trie_->nodes[0];
    for (const auto& w : ws) {
        node = trie_->child(*node, w);
        if (!node) return std::nullopt;
    }
    if (node->entries.empty()) return std::nullopt;
    return node->entries.front();
}

std::vector<CueMatch> CueLexicon::match(std::string_view input) const {
    const auto tokens = text::tokenize(input);
    std::vector<CueMatch> out;
    std::size_t i = 0;
    while (i < tokens.size()) {
        const Trie::Node* node = &trie_->nodes[0];
        std::size_t best_end = 0;
        std::size_t best_entry = 0;
        for (std::size_t j = i; j < tokens.size() && tokens[j].kind == text::TokenKind::word; ++j) {
            node = trie_->child(*node, tokens[j].value);
            if (!node) break;
            if (!node->entries.empty()) {
                best_end = j + 1;
                best_entry = node->entries.front();
            }
        }
        if (best_end == 0) {
            ++i;
            continue;
        }
        out.push_back(CueMatch{best_entry, entries_[best_entry].base(), tokens[i].begin, tokens[best_end - 1].end});
        i = best_end;
    }
    return out;
}

std::vector<std::size_t> CueLexicon::occurring(std::string_view input) const {
    const auto tokens = text::tokenize(input);
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const Trie::Node* node = &trie_->nodes[0];
        for (std::size_t j = i; j < tokens.size() && tokens[j].kind == text::TokenKind::word; ++j) {
            node = trie_->child(*node, tokens[j].value);
            if (!node) break;
            out.insert(out.end(), node->entries.begin(), node->entries.end());
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<CueMatch> match_cues(std::string_view input, const CueLexicon& lexicon) {
    if (lexicon.empty()) throw ValidationError("cue lexicon is empty");
    return lexicon.match(input);
}

CueLexicon read_lexicon_csv(std::istream& in, const std::string& source) {
    csv::Reader reader(in);
    const auto header_row = reader.next();
    if (!header_row) throw ParseError(source, 1, "empty lexicon file");
    const csv::Header h(*header_row);
    for (const char* col : {"phrase", "syntactic_type", "relationship_class"}) {
        if (!h.has(col)) throw ParseError(source, 1, std::string("missing column '") + col + "'");
    }
    const bool counts = h.has("causal_count") && h.has("noncausal_count");
    CueLexicon lexicon;
    while (auto row = reader.next()) {
        if (row->size() == 1 && text::trim((*row)[0]).empty()) continue;
        try {
            CueEntry e;
            e.phrase = h.get(*row, "phrase");
            e.syntactic_type = parse_syntactic_type(h.get(*row, "syntactic_type"));
            const std::string cls(text::trim(h.get(*row, "relationship_class")));
            if (!cls.empty()) e.relationship_class = parse_relationship(cls);
            if (counts) {
                const std::string c(text::trim(h.get(*row, "causal_count")));
                const std::string n(text::trim(h.get(*row, "noncausal_count")));
                if (!c.empty()) e.causal_count = std::stoll(c);
                if (!n.empty()) e.noncausal_count = std::stoll(n);
            }
            const std::string name = e.phrase;
            if (!lexicon.add(std::move(e))) throw ValidationError("duplicate cue phrase '" + name + "'");
        } catch (const ParseError&) {
            throw;
        } catch (const std::exception& e) {
            throw ParseError(source, reader.line(), e.what());
        }
    }
    return lexicon;
}

CueLexicon load_lexicon(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open lexicon '" + path.string() + "'");
    return read_lexicon_csv(in, path.string());
}

void write_lexicon_csv(const CueLexicon& lexicon, std::ostream& out) {
    csv::write_row(out, {"phrase", "syntactic_type", "relationship_class", "causal_count", "noncausal_count"});
    for (const auto& e : lexicon.entries()) {
        csv::write_row(out, {e.phrase, std::string(to_string(e.syntactic_type)),
                             e.relationship_class ? std::string(to_string(*e.relationship_class)) : std::string(),
                             std::to_string(e.causal_count), std::to_string(e.noncausal_count)});
    }
}

void save_lexicon(const CueLexicon& lexicon, const std::filesystem::path& path) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write lexicon '" + tmp.string() + "'");
        write_lexicon_csv(lexicon, out);
        if (!out.flush()) throw IoError("cannot write lexicon '" + tmp.string() + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot replace lexicon '" + path.string() + "': " + ec.message());
}

double CueOccurrence::precision() const {
    if (total() == 0) throw UndefinedError("cue precision is undefined: the phrase occurs in no labelled sentence");
    return static_cast<double>(causal) / static_cast<double>(total());
}

std::vector<CueOccurrence> cue_occurrences(const LabeledCorpus& corpus, const CueLexicon& lexicon) {
    const auto& sentences = corpus.sentences();
    const auto n = static_cast<std::ptrdiff_t>(sentences.size());
    std::vector<int> causal(sentences.size(), -1);
    for (std::size_t i = 0; i < sentences.size(); ++i) {
        if (auto g = corpus.gold_causal(sentences[i].id)) causal[i] = *g ? 1 : 0;
    }
    std::vector<CueOccurrence> total(lexicon.size());
#pragma omp parallel
    {
        std::vector<CueOccurrence> local(lexicon.size());
#pragma omp for schedule(static)
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            if (causal[i] < 0) continue;
            for (const auto e : lexicon.occurring(sentences[i].text)) {
                (causal[i] ? local[e].causal : local[e].noncausal) += 1;
            }
        }
#pragma omp critical
        for (std::size_t e = 0; e < local.size(); ++e) {
            total[e].causal += local[e].causal;
            total[e].noncausal += local[e].noncausal;
        }
    }
    return total;
}

CueLexicon recount(const CueLexicon& lexicon, const LabeledCorpus& corpus) {
    const auto occ = cue_occurrences(corpus, lexicon);
    auto entries = lexicon.entries();
    for (std::size_t i = 0; i < entries.size(); ++i) {
        entries[i].causal_count = occ[i].causal;
        entries[i].noncausal_count = occ[i].noncausal;
    }
    return CueLexicon(std::move(entries));
}

double cue_precision(const LabeledCorpus& corpus, std::string_view phrase) {
    CueLexicon single;
    single.add(CueEntry{std::string(phrase), SyntacticType::conjunction, std::nullopt, 0, 0});
    return cue_occurrences(corpus, single).front().precision();
}

double cue_precision(const CueEntry& entry) {
    return CueOccurrence{entry.causal_count, entry.noncausal_count}.precision();
}

std::string_view to_string(Ambiguity a) { return a == Ambiguity::ambiguous ? "ambiguous" : "non_ambiguous"; }

double round_half_up(double value, int decimals) {
    const double scale = std::pow(10.0, decimals);
    const double scaled = value * scale;
    return std::floor(scaled + 0.5 + 1e-9 * std::max(1.0, std::fabs(scaled))) / scale;
}

Ambiguity classify_ambiguity(double precision, double threshold, std::optional<int> decimals) {
    if (!(precision >= 0.0 && precision <= 1.0)) throw ValidationError(fmt::format("precision {} outside [0, 1]", precision));
    if (!(threshold >= 0.0 && threshold <= 1.0)) throw ValidationError(fmt::format("threshold {} outside [0, 1]", threshold));
    const double p = decimals ? round_half_up(precision, *decimals) : precision;
    return p >= threshold ? Ambiguity::non_ambiguous : Ambiguity::ambiguous;
}

namespace {

struct DomainScan {
    std::int64_t causal_sentences = 0;
    std::int64_t cue_occurrences = 0;
    std::map<std::string, std::int64_t> annotated;
};

}  // namespace

std::vector<DomainCueTable> domain_cue_tables(const LabeledCorpus& corpus, const CueLexicon& lexicon,
                                              const DomainCueOptions& options) {
    std::map<std::string, DomainScan> scans;
    for (const auto& s : corpus.sentences()) {
        const auto* g = corpus.gold(s.id);
        if (!g || !g->causal) continue;
        auto& d = scans[s.domain];
        ++d.causal_sentences;
        for (const auto& raw : g->cue_phrases) {
            auto name = text::normalize_phrase(raw);
            if (text::words(name).empty()) continue;
            if (auto e = lexicon.find_surface(name)) name = lexicon.entries()[*e].base();
            ++d.annotated[name];
            ++d.cue_occurrences;
        }
    }
    std::vector<DomainCueTable> out;
    for (auto& [domain, scan] : scans) {
        if (scan.causal_sentences < options.min_causal || scan.annotated.empty()) continue;
        std::vector<std::string> ids;
        for (const auto& s : corpus.sentences()) {
            if (s.domain == domain) ids.push_back(s.id);
        }
        const auto sub = corpus.subset(ids);

        std::vector<CueEntry> entries;
        for (const auto& [name, count] : scan.annotated) {
            if (auto e = lexicon.find(name)) {
                entries.push_back(lexicon.entries()[*e]);
            } else {
                entries.push_back(CueEntry{name, SyntacticType::conjunction, std::nullopt, 0, 0});
            }
        }
        const CueLexicon local(entries);
        const auto occ = cue_occurrences(sub, local);

        std::vector<RankedCue> ranked;
        std::size_t i = 0;
        for (const auto& [name, count] : scan.annotated) {
            RankedCue r;
            r.phrase = name;
            r.occurrences = count;
            r.relative_frequency = static_cast<double>(count) / static_cast<double>(scan.cue_occurrences);
            r.containing_sentences = occ[i].total();
            // Annotated phrases the tokenizer cannot find (e.g. split by punctuation) count as causal hits.
            r.precision = occ[i].total() > 0 ? occ[i].precision() : 1.0;
            ranked.push_back(std::move(r));
            ++i;
        }

        DomainCueTable t;
        t.domain = domain;
        t.causal_sentences = scan.causal_sentences;
        t.cue_occurrences = scan.cue_occurrences;
        const auto top = std::min(options.top_n, ranked.size());

        auto by_freq = ranked;
        std::stable_sort(by_freq.begin(), by_freq.end(), [](const RankedCue& a, const RankedCue& b) {
            if (a.occurrences != b.occurrences) return a.occurrences > b.occurrences;
            if (a.precision != b.precision) return a.precision > b.precision;
            return a.phrase < b.phrase;
        });
        t.most_frequent.assign(by_freq.begin(), by_freq.begin() + static_cast<std::ptrdiff_t>(top));

        auto by_prec = ranked;
        std::stable_sort(by_prec.begin(), by_prec.end(), [](const RankedCue& a, const RankedCue& b) {
            if (a.precision != b.precision) return a.precision > b.precision;
            if (a.occurrences != b.occurrences) return a.occurrences > b.occurrences;
            return a.phrase < b.phrase;
        });
        t.most_precise.assign(by_prec.begin(), by_prec.begin() + static_cast<std::ptrdiff_t>(top));

        std::stable_sort(by_prec.begin(), by_prec.end(), [](const RankedCue& a, const RankedCue& b) {
            if (a.precision != b.precision) return a.precision < b.precision;
            if (a.occurrences != b.occurrences) return a.occurrences > b.occurrences;
            return a.phrase < b.phrase;
        });
        t.least_precise.assign(by_prec.begin(), by_prec.begin() + static_cast<std::ptrdiff_t>(top));
        out.push_back(std::move(t));
    }
    if (out.empty()) {
        throw ValidationError(fmt::format("no domain has at least {} causal sentences with annotated cue phrases",
                                          options.min_causal));
    }
    return out;
}

nlohmann::json cue_stats_json(const CueLexicon& lexicon, double threshold) {
    using nlohmann::json;
    json rows = json::array();
    for (const auto& e : lexicon.entries()) {
        json row = {{"phrase", e.phrase},
                    {"syntactic_type", to_string(e.syntactic_type)},
                    {"relationship_class", e.relationship_class ? json(to_string(*e.relationship_class)) : json(nullptr)},
                    {"causal", e.causal_count},
                    {"not_causal", e.noncausal_count}};
        if (e.causal_count + e.noncausal_count > 0) {
            const double p = cue_precision(e);
            row["precision"] = round_half_up(p, 2);
            row["precision_exact"] = p;
            row["class"] = to_string(classify_ambiguity(p, threshold, 2));
        } else {
            row["precision"] = nullptr;
            row["class"] = nullptr;
        }
        rows.push_back(std::move(row));
    }
    return {{"threshold", threshold}, {"entries", rows}};
}

std::string cue_stats_text(const CueLexicon& lexicon, double threshold) {
    std::string out = fmt::format("{:<12} {:<20} {:<8} {:>7} {:>10} {:>9}\n", "type", "phrase", "class", "causal",
                                  "not causal", "precision");
    for (const auto& e : lexicon.entries()) {
        std::string prec = "n/a";
        if (e.causal_count + e.noncausal_count > 0) {
            const double p = cue_precision(e);
            prec = fmt::format("{:.2f}{}", round_half_up(p, 2),
                               classify_ambiguity(p, threshold, 2) == Ambiguity::non_ambiguous ? "*" : " ");
        }
        out += fmt::format("{:<12} {:<20} {:<8} {:>7} {:>10} {:>9}\n", to_string(e.syntactic_type), e.phrase,
                           e.relationship_class ? to_string(*e.relationship_class) : "", e.causal_count,
                           e.noncausal_count, prec);
    }
    return out;
}

namespace {

nlohmann::json ranked_json(const std::vector<RankedCue>& list) {
    auto arr = nlohmann::json::array();
    for (const auto& r : list) {
        arr.push_back({{"phrase", r.phrase},
                       {"relative_frequency", r.relative_frequency},
                       {"occurrences", r.occurrences},
                       {"precision", r.precision},
                       {"containing_sentences", r.containing_sentences}});
    }
    return arr;
}

std::string ranked_text(const std::vector<RankedCue>& list, bool precision) {
    std::string s;
    for (const auto& r : list) {
        if (!s.empty()) s += ", ";
        s += fmt::format("{} ({:.1f}%)", r.phrase, 100.0 * (precision ? r.precision : r.relative_frequency));
    }
    return s;
}

}  // namespace

nlohmann::json domain_cue_tables_json(const std::vector<DomainCueTable>& tables) {
    auto arr = nlohmann::json::array();
    for (const auto& t : tables) {
        arr.push_back({{"domain", t.domain},
                       {"causal_sentences", t.causal_sentences},
                       {"cue_occurrences", t.cue_occurrences},
                       {"most_frequent", ranked_json(t.most_frequent)},
                       {"most_precise", ranked_json(t.most_precise)},
                       {"least_precise", ranked_json(t.least_precise)}});
    }
    return arr;
}

std::string domain_cue_tables_text(const std::vector<DomainCueTable>& tables) {
    std::string out;
    for (const auto& t : tables) {
        out += fmt::format("{} ({} causal sentences, {} cue occurrences)\n", t.domain, t.causal_sentences,
                           t.cue_occurrences);
        out += "  most frequent: " + ranked_text(t.most_frequent, false) + "\n";
        out += "  most precise:  " + ranked_text(t.most_precise, true) + "\n";
        out += "  least precise: " + ranked_text(t.least_precise, true) + "\n";
    }
    return out;
}

}  // namespace creq
