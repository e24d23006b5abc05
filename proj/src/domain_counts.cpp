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

#include "creq/domain_counts.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <span>

#include "creq/csv.hpp"
#include "creq/error.hpp"
#include "creq/rng.hpp"
#include "creq/text.hpp"

namespace creq {

std::string_view category_name(Category c) {
    switch (c) {
        case Category::causality: return "Causality";
        case Category::is_explicit: return "Explicit";
        case Category::marked: return "Marked";
        case Category::single_cause: return "SingleCause";
        case Category::single_effect: return "SingleEffect";
        case Category::event_chain: return "EventChain";
        case Category::single_sentence: return "SingleSentence";
        case Category::temporality: return "Temporality";
        case Category::relationship: return "Relationship";
    }
    return "?";
}

std::string_view category_key(Category c) {
    switch (c) {
        case Category::causality: return "causal";
        case Category::is_explicit: return "explicit";
        case Category::marked: return "marked";
        case Category::single_cause: return "single_cause";
        case Category::single_effect: return "single_effect";
        case Category::event_chain: return "event_chain";
        case Category::single_sentence: return "single_sentence";
        case Category::temporality: return "temporality";
        case Category::relationship: return "relationship";
    }
    return "?";
}

Category parse_category(std::string_view name) {
    std::string n;
    for (const char ch : text::to_lower(name)) {
        if (ch != '_' && ch != ' ' && ch != '-') n.push_back(ch);
    }
    if (n == "causal" || n == "causality") return Category::causality;
    for (const auto c : kAllCategories) {
        std::string key;
        for (const char ch : category_key(c)) {
            if (ch != '_') key.push_back(ch);
        }
        if (n == key || n == text::to_lower(category_name(c))) return c;
    }
    throw ValidationError("unknown category '" + std::string(name) + "'");
}

std::vector<std::string> category_values(Category c) {
    switch (c) {
        case Category::temporality: return {"before", "overlap", "during"};
        case Category::relationship: return {"cause", "enable", "prevent"};
        default: return {"0", "1"};
    }
}

std::optional<std::size_t> category_value(const CausalLabelRecord& r, Category c) {
    auto b = [](const std::optional<bool>& v) -> std::optional<std::size_t> {
        if (!v) return std::nullopt;
        return *v ? 1 : 0;
    };
    switch (c) {
        case Category::causality: return r.causal ? 1 : 0;
        case Category::is_explicit: return b(r.is_explicit);
        case Category::marked: return b(r.marked);
        case Category::single_cause: return b(r.single_cause);
        case Category::single_effect: return b(r.single_effect);
        case Category::event_chain: return b(r.event_chain);
        case Category::single_sentence: return b(r.single_sentence);
        case Category::temporality:
            if (!r.temporality) return std::nullopt;
            return static_cast<std::size_t>(*r.temporality);
        case Category::relationship:
            if (!r.relationship) return std::nullopt;
            return static_cast<std::size_t>(*r.relationship);
    }
    return std::nullopt;
}

namespace {

DomainCounts empty_counts(std::string domain) {
    DomainCounts d;
    d.domain = std::move(domain);
    for (const auto c : kAllCategories) d.counts[c] = std::vector<std::int64_t>(category_values(c).size(), 0);
    return d;
}

void accumulate(DomainCounts& into, const DomainCounts& row) {
    into.sentences += row.sentences;
    for (const auto& [c, v] : row.counts) {
        auto& dst = into.counts[c];
        for (std::size_t i = 0; i < v.size(); ++i) dst[i] += v[i];
    }
}

}  // namespace

DomainCounts DomainCountTable::totals() const {
    auto t = empty_counts("Sum");
    for (const auto& r : rows) accumulate(t, r);
    return t;
}

const DomainCounts* DomainCountTable::find(std::string_view domain) const {
    for (const auto& r : rows) {
        if (r.domain == domain) return &r;
    }
    return nullptr;
}

bool DomainCountTable::declared_sum_matches() const {
    if (!declared_sum) return true;
    const auto t = totals();
    return t.sentences == declared_sum->sentences && t.counts == declared_sum->counts;
}

DomainCountTable domain_counts(const LabeledCorpus& corpus) {
    std::map<std::string, DomainCounts> by_domain;
    for (const auto& s : corpus.sentences()) {
        auto [it, inserted] = by_domain.try_emplace(s.domain, empty_counts(s.domain));
        auto& row = it->second;
        ++row.sentences;
        const auto* g = corpus.gold(s.id);
        if (g == nullptr) continue;
        for (const auto c : kAllCategories) {
            if (const auto v = category_value(*g, c)) ++row.counts[c][*v];
        }
    }
    DomainCountTable table;
    for (auto& [_, row] : by_domain) table.rows.push_back(std::move(row));
    return table;
}

namespace {

struct Column {
    Category category;
    std::size_t value;
    const char* name;
};

const std::vector<Column>& count_columns() {
    static const std::vector<Column> cols = {
        {Category::causality, 0, "causal_0"},         {Category::causality, 1, "causal_1"},
        {Category::is_explicit, 0, "explicit_0"},     {Category::is_explicit, 1, "explicit_1"},
        {Category::marked, 0, "marked_0"},            {Category::marked, 1, "marked_1"},
        {Category::single_cause, 0, "single_cause_0"}, {Category::single_cause, 1, "single_cause_1"},
        {Category::single_effect, 0, "single_effect_0"}, {Category::single_effect, 1, "single_effect_1"},
        {Category::event_chain, 0, "event_chain_0"},  {Category::event_chain, 1, "event_chain_1"},
        {Category::single_sentence, 0, "single_sentence_0"}, {Category::single_sentence, 1, "single_sentence_1"},
        {Category::temporality, 0, "before"},         {Category::temporality, 1, "overlap"},
        {Category::temporality, 2, "during"},         {Category::relationship, 0, "cause"},
        {Category::relationship, 1, "enable"},        {Category::relationship, 2, "prevent"},
    };
    return cols;
}

std::int64_t parse_count(const std::string& raw, const char* column) {
    const auto v = std::string(text::trim(raw));
    if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos) {
        throw ValidationError(std::string("column '") + column + "' must hold a non-negative integer, got '" + raw + "'");
    }
    return std::stoll(v);
}

std::int64_t sum(const std::vector<std::int64_t>& v) { return std::accumulate(v.begin(), v.end(), std::int64_t{0}); }

}  // namespace

DomainCountTable import_domain_counts_csv(std::istream& in, const DomainCountImportOptions& options,
                                          const std::string& source) {
    csv::Reader reader(in);
    const auto header_row = reader.next();
    if (!header_row) throw ParseError(source, 1, "empty domain count file");
    const csv::Header h(*header_row);
    if (!h.has("domain")) throw ParseError(source, 1, "missing column 'domain'");
    for (const auto& col : count_columns()) {
        if (!h.has(col.name)) throw ParseError(source, 1, std::string("missing column '") + col.name + "'");
    }
    DomainCountTable table;
    if (options.invert_single_sentence) {
        table.warnings.emplace_back(
            "single_sentence columns imported with inverted polarity: column '1' is read as the two-sentence "
            "(single_sentence = false) count");
    }
    while (auto row = reader.next()) {
        if (row->size() == 1 && text::trim((*row)[0]).empty()) continue;
        try {
            auto d = empty_counts(std::string(text::trim(h.get(*row, "domain"))));
            if (d.domain.empty()) throw ValidationError("empty domain name");
            for (const auto& col : count_columns()) d.counts[col.category][col.value] = parse_count(h.get(*row, col.name), col.name);
            if (options.invert_single_sentence) {
                auto& ss = d.counts[Category::single_sentence];
                std::swap(ss[0], ss[1]);
            }
            d.sentences = h.has("sentences") ? parse_count(h.get(*row, "sentences"), "sentences") : sum(d.counts[Category::causality]);
            if (d.domain == "Sum") {
                table.declared_sum = std::move(d);
            } else {
                table.rows.push_back(std::move(d));
            }
        } catch (const ValidationError& e) {
            throw ParseError(source, reader.line(), e.what());
        }
    }
    std::sort(table.rows.begin(), table.rows.end(), [](const auto& a, const auto& b) { return a.domain < b.domain; });

    for (const auto& r : table.rows) {
        const auto labeled = sum(r.counts.at(Category::causality));
        if (labeled != r.sentences) {
            table.warnings.push_back(r.domain + ": causal_0 + causal_1 = " + std::to_string(labeled) +
                                     " differs from sentences = " + std::to_string(r.sentences));
        }
        for (const auto c : kAllCategories) {
            if (!is_dependent(c)) continue;
            const auto s = sum(r.counts.at(c));
            if (s != r.causal()) {
                table.warnings.push_back(r.domain + ": " + std::string(category_name(c)) + " counts sum to " +
                                         std::to_string(s) + " but the domain has " + std::to_string(r.causal()) +
                                         " causal sentences");
            }
        }
    }
    if (!table.declared_sum_matches()) table.warnings.emplace_back("declared Sum row differs from the column totals");
    const auto t = table.totals();
    const auto& temp = t.counts.at(Category::temporality);
    if (temp[1] > temp[2]) {
        table.warnings.push_back("temporality: overlap (" + std::to_string(temp[1]) + ") exceeds during (" +
                                 std::to_string(temp[2]) +
                                 "); expected the opposite order. Counts preserved verbatim.");
    }
    return table;
}

DomainCountTable load_domain_counts(const std::string& path, const DomainCountImportOptions& options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open domain count file '" + path + "'");
    return import_domain_counts_csv(in, options, path);
}

void write_domain_counts_csv(const DomainCountTable& table, std::ostream& out, const DomainCountImportOptions& options) {
    csv::Row header{"domain"};
    for (const auto& col : count_columns()) header.emplace_back(col.name);
    header.emplace_back("sentences");
    csv::write_row(out, header);
    auto emit = [&](const DomainCounts& r) {
        csv::Row row{r.domain};
        for (const auto& col : count_columns()) {
            auto v = col.value;
            if (options.invert_single_sentence && col.category == Category::single_sentence) v = 1 - v;
            row.push_back(std::to_string(r.counts.at(col.category).at(v)));
        }
        row.push_back(std::to_string(r.sentences));
        csv::write_row(out, row);
    };
    for (const auto& r : table.rows) emit(r);
    emit(table.totals());
}

LabeledCorpus expand_domain_counts(const DomainCountTable& table, std::uint64_t seed, std::vector<std::string>* warnings) {
    LabeledCorpus corpus;
    std::uint64_t stream = 0;
    for (const auto& r : table.rows) {
        const auto causal = r.causal();
        if (causal > r.sentences) throw ValidationError(r.domain + ": more causal sentences than sentences");
        const std::string doc = "doc-" + r.domain;
        corpus.add_document({doc, r.domain, std::nullopt, std::nullopt});
        std::vector<CausalLabelRecord> labels(static_cast<std::size_t>(causal));
        for (const auto c : kAllCategories) {
            if (!is_dependent(c)) continue;
            std::vector<std::size_t> values;
            const auto& counts = r.counts.at(c);
            for (std::size_t v = 0; v < counts.size(); ++v) values.insert(values.end(), static_cast<std::size_t>(counts[v]), v);
            if (values.size() > labels.size()) {
                throw ValidationError(r.domain + ": " + std::string(category_name(c)) + " counts exceed causal sentences");
            }
            if (values.size() < labels.size()) {
                const auto mode = static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
                if (warnings != nullptr) {
                    warnings->push_back(r.domain + ": padded " + std::to_string(labels.size() - values.size()) + " " +
                                        std::string(category_name(c)) + " values with '" + category_values(c)[mode] + "'");
                }
                values.resize(labels.size(), mode);
            }
            Rng rng(derive_seed(seed, stream++));
            rng.shuffle(std::span<std::size_t>(values));
            for (std::size_t i = 0; i < labels.size(); ++i) {
                auto& l = labels[i];
                const bool b = values[i] == 1;
                switch (c) {
                    case Category::is_explicit: l.is_explicit = b; break;
                    case Category::marked: l.marked = b; break;
                    case Category::single_cause: l.single_cause = b; break;
                    case Category::single_effect: l.single_effect = b; break;
                    case Category::event_chain: l.event_chain = b; break;
                    case Category::single_sentence: l.single_sentence = b; break;
                    case Category::temporality: l.temporality = static_cast<Temporality>(values[i]); break;
                    case Category::relationship: l.relationship = static_cast<Relationship>(values[i]); break;
                    case Category::causality: break;
                }
            }
        }
        std::vector<bool> is_causal(static_cast<std::size_t>(r.sentences), false);
        std::fill(is_causal.begin(), is_causal.begin() + causal, true);
        Rng order(derive_seed(seed, stream++));
        for (std::size_t i = is_causal.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(order.below(i));
            const bool tmp = is_causal[i - 1];
            is_causal[i - 1] = is_causal[j];
            is_causal[j] = tmp;
        }
        std::size_t next_label = 0;
        for (std::size_t i = 0; i < is_causal.size(); ++i) {
            Sentence s;
            s.id = r.domain + "-" + std::to_string(i);
            s.text = "Synthetic requirement sentence " + std::to_string(i) + " of the " + r.domain + " documents.";
            s.document_id = doc;
            s.domain = r.domain;
            s.position = i;
            corpus.add_sentence(s);
            CausalLabelRecord l;
            if (is_causal[i]) {
                l = labels[next_label++];
                l.causal = true;
            }
            l.sentence_id = s.id;
            l.annotator = "gold";
            corpus.add_label(std::move(l));
        }
    }
    return corpus;
}

}  // namespace creq
