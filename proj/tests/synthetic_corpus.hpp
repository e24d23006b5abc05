#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "creq/corpus.hpp"
#include "creq/rng.hpp"

namespace creq::testing {

struct PlantedCorpusOptions {
    std::size_t per_class = 200;
    /// Share of sentences per class whose cue presence agrees with the label.
    double agreement = 0.7;
    /// Probability that a sentence carries its class's marker word.
    double marker_rate = 0.0;
    std::uint64_t seed = 1;
};

/// Balanced corpus of filler-word sentences. Agreeing causal sentences start
/// with a cue ("if", "because", "when", "due to"); agreeing non-causal ones
/// have none; disagreeing sentences swap that. Filler words match no cue.
inline LabeledCorpus planted_corpus(const PlantedCorpusOptions& o) {
    static const std::vector<std::string> filler = {
        "system", "user", "data",  "display", "record", "store",  "module", "interface", "value", "field",
        "screen", "page", "list",  "button",  "report", "export", "import", "account",   "login", "profile",
        "file",   "menu", "table", "column",  "row",    "item",   "entry",  "message",   "panel", "window"};
    static const std::vector<std::string> cues = {"if", "because", "when", "due to"};
    Rng rng(o.seed);
    LabeledCorpus corpus;
    const auto agreeing = static_cast<std::size_t>(o.agreement * static_cast<double>(o.per_class) + 0.5);
    std::size_t pos = 0;
    for (int label = 1; label >= 0; --label) {
        std::vector<std::uint8_t> agree(o.per_class, 0);
        for (std::size_t i = 0; i < agreeing; ++i) agree[i] = 1;
        rng.shuffle(std::span<std::uint8_t>(agree));
        for (std::size_t i = 0; i < o.per_class; ++i) {
            const bool with_cue = agree[i] ? label == 1 : label == 0;
            std::string t = with_cue ? cues[rng.below(cues.size())] + " the " : "the ";
            const auto len = 4 + rng.below(6);
            for (std::uint64_t k = 0; k < len; ++k) t += filler[rng.below(filler.size())] + " ";
            if (rng.bernoulli(o.marker_rate)) t += label ? "alarm" : "archive";
            t += "shall work.";
            const std::string id = (label ? "c" : "n") + std::to_string(i);
            corpus.add_sentence({id, t, "doc" + std::to_string(pos / 50), "synthetic", pos % 50});
            ++pos;
            CausalLabelRecord r;
            r.sentence_id = id;
            r.annotator = "gold";
            r.causal = label == 1;
            if (r.causal) {
                r.is_explicit = r.marked = r.single_sentence = r.single_cause = r.single_effect = true;
                r.event_chain = false;
                r.relationship = Relationship::cause;
                r.temporality = Temporality::before;
            }
            corpus.add_label(r);
        }
    }
    return corpus;
}

}  // namespace creq::testing
