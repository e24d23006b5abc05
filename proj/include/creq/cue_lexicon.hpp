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

#ifndef CREQ_CUE_LEXICON_HPP
#define CREQ_CUE_LEXICON_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "creq/corpus.hpp"

namespace creq {

enum class SyntacticType { conjunction, adverb, pronoun, adjective, preposition, verb };

std::string_view to_string(SyntacticType t);
SyntacticType parse_syntactic_type(std::string_view s);

/// A cue phrase in table notation. Verb inflections are written as
/// "cause(s/ed)" or "lead(s) to", optional words as "so (that)" and
/// alternatives as "to this/that end".
struct CueEntry {
    std::string phrase;  ///< normalized notation
    SyntacticType syntactic_type = SyntacticType::conjunction;
    std::optional<Relationship> relationship_class;  ///< verbs only
    std::int64_t causal_count = 0;
    std::int64_t noncausal_count = 0;

    /// Phrase with inflection markers removed: "cause(s/ed)" -> "cause".
    [[nodiscard]] std::string base() const;
    /// Every surface form the entry matches, each a lowercase word sequence.
    [[nodiscard]] std::vector<std::vector<std::string>> variants() const;
};

/// Throws ValidationError for an empty phrase or a class/type mismatch.
void validate_cue_entry(const CueEntry& entry);

/// Surface forms of one notation string; see CueEntry.
std::vector<std::vector<std::string>> expand_cue_notation(std::string_view notation);

struct CueMatch {
    std::size_t entry = 0;  ///< index into CueLexicon::entries()
    std::string phrase;     ///< base form of the entry
    std::size_t begin = 0;  ///< byte span in the input text
    std::size_t end = 0;
};

/// Phrase inventory plus a token trie over all surface forms.
class CueLexicon {
public:
    CueLexicon();
    explicit CueLexicon(std::vector<CueEntry> entries);
    CueLexicon(const CueLexicon& other);
    CueLexicon& operator=(const CueLexicon& other);
    CueLexicon(CueLexicon&&) noexcept;
    CueLexicon& operator=(CueLexicon&&) noexcept;
    ~CueLexicon();

    /// Returns false (and leaves the lexicon unchanged) when the normalized
    /// phrase is already present. Throws for an invalid entry.
    bool add(CueEntry entry);

    [[nodiscard]] const std::vector<CueEntry>& entries() const noexcept { return entries_; }
    [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }
    [[nodiscard]] bool empty() const noexcept { return entries_.empty(); }
    /// Lookup by notation or base form.
    [[nodiscard]] std::optional<std::size_t> find(std::string_view phrase) const;
    /// Entry whose surface forms include the given phrase text ("causes" -> "cause(s/ed)").
    [[nodiscard]] std::optional<std::size_t> find_surface(std::string_view text) const;

    /// Case-insensitive matches over word tokens, scanned left to right;
    /// at each position the longest surface form wins and matches never overlap.
    [[nodiscard]] std::vector<CueMatch> match(std::string_view text) const;
    /// Indices of every entry with at least one surface form occurring in the
    /// text as a contiguous word sequence, regardless of overlap. Sorted, unique.
    [[nodiscard]] std::vector<std::size_t> occurring(std::string_view text) const;

private:
    struct Trie;
    void index(std::size_t entry);

    std::vector<CueEntry> entries_;
    std::map<std::string, std::size_t> by_name_;
    std::unique_ptr<Trie> trie_;
};

std::vector<CueMatch> match_cues(std::string_view text, const CueLexicon& lexicon);

/// Header: phrase,syntactic_type,relationship_class[,causal_count,noncausal_count].
CueLexicon read_lexicon_csv(std::istream& in, const std::string& source = "<lexicon>");
CueLexicon load_lexicon(const std::filesystem::path& path);
void write_lexicon_csv(const CueLexicon& lexicon, std::ostream& out);
/// Writes to a temporary file next to `path`, then renames over it.
void save_lexicon(const CueLexicon& lexicon, const std::filesystem::path& path);

/// Sentences (by gold label) containing a phrase.
struct CueOccurrence {
    std::int64_t causal = 0;
    std::int64_t noncausal = 0;

    [[nodiscard]] std::int64_t total() const noexcept { return causal + noncausal; }
    /// causal / total; throws UndefinedError when total is 0.
    [[nodiscard]] double precision() const;
};

/// Per-entry sentence counts, each sentence counted at most once per entry.
/// Unlabelled sentences are skipped.
std::vector<CueOccurrence> cue_occurrences(const LabeledCorpus& corpus, const CueLexicon& lexicon);
/// Copy of the lexicon with its counts replaced by a scan of `corpus`.
CueLexicon recount(const CueLexicon& lexicon, const LabeledCorpus& corpus);

/// Pr(causal | sentence contains phrase). The phrase may use table notation.
/// Throws UndefinedError when no labelled sentence contains it.
double cue_precision(const LabeledCorpus& corpus, std::string_view phrase);
/// Precision from stored counts; throws UndefinedError when both are 0.
double cue_precision(const CueEntry& entry);

enum class Ambiguity { ambiguous, non_ambiguous };

std::string_view to_string(Ambiguity a);
/// non_ambiguous iff precision >= threshold. With `decimals`, the precision is
/// first rounded half-up to that many places (the value a printed table shows).
Ambiguity classify_ambiguity(double precision, double threshold = 0.8, std::optional<int> decimals = std::nullopt);

/// Half-up rounding to `decimals` places with a guard against binary
/// representation error (0.125 -> 0.13).
double round_half_up(double value, int decimals);

struct RankedCue {
    std::string phrase;
    double relative_frequency = 0.0;  ///< share of the domain's annotated cue occurrences
    std::int64_t occurrences = 0;
    double precision = 0.0;
    std::int64_t containing_sentences = 0;
};

struct DomainCueTable {
    std::string domain;
    std::int64_t causal_sentences = 0;
    std::int64_t cue_occurrences = 0;
    std::vector<RankedCue> most_frequent;
    std::vector<RankedCue> most_precise;
    std::vector<RankedCue> least_precise;
};

struct DomainCueOptions {
    std::int64_t min_causal = 100;
    std::size_t top_n = 5;
};

/// Frequencies come from the cue phrases annotated on the domain's causal
/// sentences (gold labels); annotated text is mapped to its lexicon entry when
/// one matches. Precision is measured over all labelled sentences of the domain.
/// Ties rank by precision, then frequency, then phrase. Throws when no domain
/// has `min_causal` causal sentences.
std::vector<DomainCueTable> domain_cue_tables(const LabeledCorpus& corpus, const CueLexicon& lexicon,
                                              const DomainCueOptions& options = {});

/// Per-entry report: every entry with counts, precision and ambiguity class.
nlohmann::json cue_stats_json(const CueLexicon& lexicon, double threshold = 0.8);
std::string cue_stats_text(const CueLexicon& lexicon, double threshold = 0.8);
nlohmann::json domain_cue_tables_json(const std::vector<DomainCueTable>& tables);
std::string domain_cue_tables_text(const std::vector<DomainCueTable>& tables);

}  // namespace creq

#endif  // CREQ_CUE_LEXICON_HPP
