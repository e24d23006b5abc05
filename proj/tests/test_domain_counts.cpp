#include <algorithm>
#include <sstream>

#include "doctest.h"
#include "test_support.hpp"

#include "creq/domain_counts.hpp"
#include "creq/error.hpp"

using namespace creq;

namespace {

DomainCountTable shipped(const DomainCountImportOptions& o = {}) {
    return load_domain_counts(testing::data_file("domain_counts.csv").string(), o);
}

bool has_warning(const std::vector<std::string>& w, const std::string& needle) {
    return std::any_of(w.begin(), w.end(), [&](const std::string& s) { return s.find(needle) != std::string::npos; });
}

const char* kHeader =
    "domain,causal_0,causal_1,explicit_0,explicit_1,marked_0,marked_1,single_cause_0,single_cause_1,"
    "single_effect_0,single_effect_1,event_chain_0,event_chain_1,single_sentence_0,single_sentence_1,"
    "before,overlap,during,cause,enable,prevent,sentences\n";

}  // namespace

TEST_CASE("category names and keys") {
    for (const auto c : kAllCategories) {
        CHECK(parse_category(category_key(c)) == c);
        CHECK(parse_category(category_name(c)) == c);
        CHECK(category_values(c).size() == (c == Category::temporality || c == Category::relationship ? 3u : 2u));
        CHECK(is_dependent(c) == (c != Category::causality));
    }
    CHECK(category_values(Category::relationship) == std::vector<std::string>{"cause", "enable", "prevent"});
    CHECK_THROWS_AS(parse_category("Causalness"), ValidationError);
}

TEST_CASE("the shipped domain table imports with its known inconsistencies") {
    const auto t = shipped();
    CHECK(t.rows.size() == 18);
    CHECK(std::is_sorted(t.rows.begin(), t.rows.end(), [](const auto& a, const auto& b) { return a.domain < b.domain; }));
    REQUIRE(t.declared_sum.has_value());
    CHECK(t.declared_sum_matches());
    const auto sum = t.totals();
    CHECK(sum.sentences == 14983);
    CHECK(sum.causal() == 4215);
    CHECK(sum.value(Category::single_sentence, 0) == 288);
    CHECK(t.find("Banking") != nullptr);
    CHECK(t.find("Sum") == nullptr);
    CHECK(has_warning(t.warnings, "Data Analytics: causal_0 + causal_1 = 2699 differs from sentences = 2700"));
    CHECK(has_warning(t.warnings, "Health: causal_0 + causal_1"));
    CHECK(has_warning(t.warnings, "Physics: causal_0 + causal_1"));
    CHECK(has_warning(t.warnings, "Relationship counts sum to"));
    CHECK(has_warning(t.warnings, "temporality: overlap"));
    CHECK_FALSE(has_warning(t.warnings, "declared Sum row"));

    const auto raw = shipped({.invert_single_sentence = false});
    CHECK(raw.totals().value(Category::single_sentence, 1) == 288);
    CHECK(raw.totals().value(Category::single_sentence, 0) == 3927);
}

TEST_CASE("write then import preserves every count") {
    const auto t = shipped();
    std::ostringstream out;
    write_domain_counts_csv(t, out);
    std::istringstream in(out.str());
    const auto back = import_domain_counts_csv(in);
    REQUIRE(back.rows.size() == t.rows.size());
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        CHECK(back.rows[i].domain == t.rows[i].domain);
        CHECK(back.rows[i].sentences == t.rows[i].sentences);
        CHECK(back.rows[i].counts == t.rows[i].counts);
    }
    CHECK(back.declared_sum_matches());
    CHECK(back.warnings == t.warnings);
}

TEST_CASE("import errors and the declared sum check") {
    std::istringstream missing("domain,causal_0\nA,1\n");
    CHECK_THROWS_AS(import_domain_counts_csv(missing), ParseError);
    std::istringstream negative(std::string(kHeader) + "A,1,1,0,1,0,1,0,1,0,1,1,0,0,1,1,0,0,1,0,0,2\n"
                                                       "B,1,-1,0,1,0,1,0,1,0,1,1,0,0,1,1,0,0,1,0,0,2\n");
    try {
        import_domain_counts_csv(negative, {}, "neg.csv");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
    std::istringstream bad_sum(std::string(kHeader) + "A,1,1,0,1,0,1,0,1,0,1,1,0,0,1,1,0,0,1,0,0,2\n"
                                                      "Sum,1,2,0,1,0,1,0,1,0,1,1,0,0,1,1,0,0,1,0,0,2\n");
    const auto t = import_domain_counts_csv(bad_sum);
    CHECK(t.rows.size() == 1);
    CHECK_FALSE(t.declared_sum_matches());
    CHECK(has_warning(t.warnings, "declared Sum row"));
    CHECK_THROWS_AS(load_domain_counts("/nonexistent/counts.csv"), IoError);
}

TEST_CASE("expanding the table reproduces its marginals") {
    const auto t = shipped();
    std::vector<std::string> warnings;
    const auto corpus = expand_domain_counts(t, 11, &warnings);
    CHECK(corpus.size() == static_cast<std::size_t>(t.totals().sentences));
    CHECK(has_warning(warnings, "Relationship values"));
    const auto back = domain_counts(corpus);
    REQUIRE(back.rows.size() == t.rows.size());
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& want = t.rows[i];
        const auto& got = back.rows[i];
        CAPTURE(want.domain);
        CHECK(got.sentences == want.sentences);
        CHECK(got.causal() == want.causal());
        CHECK(got.value(Category::causality, 0) == want.sentences - want.causal());
        for (const auto c : {Category::is_explicit, Category::marked, Category::single_cause, Category::single_effect,
                             Category::event_chain, Category::single_sentence}) {
            CHECK(got.counts.at(c) == want.counts.at(c));
        }
        for (const auto c : {Category::temporality, Category::relationship}) {
            std::int64_t total = 0;
            for (std::size_t v = 0; v < 3; ++v) {
                CHECK(got.value(c, v) >= want.value(c, v));
                total += got.value(c, v);
            }
            CHECK(total == want.causal());
        }
    }
    std::ostringstream a, b;
    write_corpus_jsonl(expand_domain_counts(t, 11), a);
    write_corpus_jsonl(expand_domain_counts(t, 11), b);
    CHECK(a.str() == b.str());
}
