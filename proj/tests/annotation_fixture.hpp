#pragma once

#include <filesystem>
#include <string>

#include "test_support.hpp"

#include "creq/annotation.hpp"
#include "creq/corpus.hpp"

namespace creq::testing {

/// Three documents of four sentences each: d0-0 .. d2-3.
inline LabeledCorpus small_pool() {
    LabeledCorpus c;
    for (int d = 0; d < 3; ++d) {
        const std::string doc = "d" + std::to_string(d);
        c.add_document({doc, "Testing", std::nullopt, std::nullopt});
        for (int p = 0; p < 4; ++p) {
            c.add_sentence({doc + "-" + std::to_string(p), "Sentence " + std::to_string(p) + " of document " + doc + ".",
                            doc, "Testing", static_cast<std::size_t>(p)});
        }
    }
    return c;
}

inline CausalLabelRecord full_causal(std::string sentence, std::string annotator) {
    CausalLabelRecord r;
    r.sentence_id = std::move(sentence);
    r.annotator = std::move(annotator);
    r.causal = true;
    r.is_explicit = true;
    r.marked = true;
    r.single_sentence = true;
    r.single_cause = true;
    r.single_effect = true;
    r.event_chain = false;
    r.relationship = Relationship::enable;
    r.temporality = Temporality::before;
    r.cue_phrases = {"if"};
    return r;
}

inline CausalLabelRecord not_causal(std::string sentence, std::string annotator) {
    CausalLabelRecord r;
    r.sentence_id = std::move(sentence);
    r.annotator = std::move(annotator);
    return r;
}

/// Service over small_pool() with annotators a and b, plan (5, 2); the
/// lexicon is a private copy of the shipped one.
inline ServiceConfig small_config(const TempDir& dir) {
    std::filesystem::copy_file(data_file("cue_lexicon.csv"), dir / "cues.csv",
                               std::filesystem::copy_options::overwrite_existing);
    ServiceConfig cfg;
    cfg.annotators = {"a", "b"};
    cfg.plan.unique = 5;
    cfg.plan.overlap = 2;
    cfg.store_dir = dir / "store";
    cfg.lexicon_path = dir / "cues.csv";
    cfg.store_options.clock = [] { return std::string("2026-01-01T00:00:00.000Z"); };
    return cfg;
}

}  // namespace creq::testing
