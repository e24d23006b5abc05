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

#ifndef CREQ_DOMAIN_COUNTS_HPP
#define CREQ_DOMAIN_COUNTS_HPP

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "creq/corpus.hpp"

namespace creq {

/// The nine label categories. Every category except causality is dependent:
/// it is defined only for causal sentences.
enum class Category {
    causality,
    is_explicit,
    marked,
    single_cause,
    single_effect,
    event_chain,
    single_sentence,
    temporality,
    relationship,
};

inline constexpr std::array kAllCategories = {
    Category::causality,    Category::is_explicit,     Category::marked,
    Category::single_cause, Category::single_effect,   Category::event_chain,
    Category::single_sentence, Category::temporality,  Category::relationship,
};

/// Display name ("Causality", "Explicit", "SingleSentence", ...).
std::string_view category_name(Category c);
/// Key used in files and JSON ("causal", "explicit", "single_sentence", ...).
std::string_view category_key(Category c);
Category parse_category(std::string_view name);
/// Value labels: {"0","1"} for binary categories, the three enum names otherwise.
std::vector<std::string> category_values(Category c);
constexpr bool is_dependent(Category c) { return c != Category::causality; }

/// Index into category_values() for the record, or nullopt when the field is absent.
std::optional<std::size_t> category_value(const CausalLabelRecord& record, Category c);

/// Per-domain label counts (the appendix distribution table shape).
struct DomainCounts {
    std::string domain;
    std::int64_t sentences = 0;
    std::map<Category, std::vector<std::int64_t>> counts;

    [[nodiscard]] std::int64_t causal() const { return counts.at(Category::causality).at(1); }
    [[nodiscard]] std::int64_t value(Category c, std::size_t v) const { return counts.at(c).at(v); }
};

/// Rows sorted by domain plus any discrepancies noticed while importing.
struct DomainCountTable {
    std::vector<DomainCounts> rows;
    std::optional<DomainCounts> declared_sum;  ///< the file's "Sum" row, if any
    std::vector<std::string> warnings;

    [[nodiscard]] DomainCounts totals() const;
    [[nodiscard]] const DomainCounts* find(std::string_view domain) const;
    /// True when there is no declared sum row or it equals totals() exactly.
    [[nodiscard]] bool declared_sum_matches() const;
};

/// Gold-label counts per domain. Sentences without labels count toward
/// `sentences` only.
DomainCountTable domain_counts(const LabeledCorpus& corpus);

struct DomainCountImportOptions {
    /// The source layout's single-sentence "1" column holds the two-sentence
    /// count; map it to single_sentence=false.
    bool invert_single_sentence = true;
};

/// Reads the CSV layout
/// domain,causal_0,causal_1,explicit_0,explicit_1,marked_0,marked_1,single_cause_0,
/// single_cause_1,single_effect_0,single_effect_1,event_chain_0,event_chain_1,
/// single_sentence_0,single_sentence_1,before,overlap,during,cause,enable,prevent,sentences
/// A row whose domain is "Sum" is kept as declared_sum. Counts are preserved
/// verbatim; inconsistencies become warnings.
DomainCountTable import_domain_counts_csv(std::istream& in, const DomainCountImportOptions& options = {},
                                          const std::string& source = "<domain counts>");
DomainCountTable load_domain_counts(const std::string& path, const DomainCountImportOptions& options = {});
/// Inverse of import_domain_counts_csv under the same options.
void write_domain_counts_csv(const DomainCountTable& table, std::ostream& out,
                             const DomainCountImportOptions& options = {});

/// Synthesizes a sentence-level corpus (annotator "gold") whose per-domain
/// marginal counts equal the table. Non-causal count is `sentences - causal`.
/// Value-to-sentence assignment inside a domain is a seeded shuffle per
/// category, so joint distributions carry no information. Ternary categories
/// whose counts fall short of the causal count are padded with the domain's
/// most frequent value (reported in warnings).
LabeledCorpus expand_domain_counts(const DomainCountTable& table, std::uint64_t seed,
                                   std::vector<std::string>* warnings = nullptr);

}  // namespace creq

#endif  // CREQ_DOMAIN_COUNTS_HPP
