#include <algorithm>
#include <set>
#include <sstream>

#include "doctest.h"
#include "test_support.hpp"

#include "creq/corpus.hpp"
#include "creq/error.hpp"
#include "creq/rng.hpp"

using namespace creq;

namespace {

CausalLabelRecord causal(std::string sid, std::string who) {
    CausalLabelRecord r;
    r.sentence_id = std::move(sid);
    r.annotator = std::move(who);
    r.causal = true;
    r.is_explicit = r.marked = r.single_sentence = r.single_cause = r.single_effect = true;
    r.event_chain = false;
    r.relationship = Relationship::prevent;
    r.temporality = Temporality::overlap;
    return r;
}

CausalLabelRecord plain(std::string sid, std::string who) {
    CausalLabelRecord r;
    r.sentence_id = std::move(sid);
    r.annotator = std::move(who);
    return r;
}

const char* kJsonl =
    R"({"document":{"id":"d1","domain":"Banking","year":2019,"date":"2019-04-02"}}
{"id":"s1","text":"If the card is locked, the user shall be notified.","document_id":"d1","domain":"Banking","position":0,"labels":[{"annotator":"x","causal":true,"explicit":true,"marked":true,"single_sentence":true,"single_cause":true,"single_effect":true,"event_chain":false,"relationship":"cause","temporality":"before","cue_phrases":["  If "]},{"annotator":"gold","causal":false}]}
{"id":"s2","text":"The system shows the balance.","document_id":"d1","domain":"Banking","position":1}

{"id":"s3","text":"Reports are exported nightly.","document_id":"d2","domain":"Health","position":0,"labels":[{"annotator":"x","causal":false}]}
)";

LabeledCorpus mixed(std::size_t causal_n, std::size_t plain_n, std::size_t unlabeled_n) {
    LabeledCorpus c;
    std::size_t pos = 0;
    auto add = [&](const std::string& id) { c.add_sentence({id, "Sentence " + id + ".", "d", "X", pos++}); };
    for (std::size_t i = 0; i < causal_n; ++i) {
        add("c" + std::to_string(i));
        c.add_label(causal("c" + std::to_string(i), "gold"));
    }
    for (std::size_t i = 0; i < plain_n; ++i) {
        add("n" + std::to_string(i));
        c.add_label(plain("n" + std::to_string(i), "gold"));
    }
    for (std::size_t i = 0; i < unlabeled_n; ++i) add("u" + std::to_string(i));
    return c;
}

}  // namespace

TEST_CASE("dependent fields are present exactly for causal labels") {
    CHECK_NOTHROW(validate_label(plain("s", "a")));
    CHECK_NOTHROW(validate_label(causal("s", "a")));
    auto missing = causal("s", "a");
    missing.temporality.reset();
    CHECK_THROWS_WITH_AS(validate_label(missing), doctest::Contains("temporality"), ValidationError);
    auto extra = plain("s", "a");
    extra.marked = false;
    CHECK_THROWS_WITH_AS(validate_label(extra), doctest::Contains("marked"), ValidationError);
    CHECK_THROWS_AS(validate_label(plain("", "a")), ValidationError);
    CHECK_THROWS_AS(validate_label(plain("s", "")), ValidationError);
}

TEST_CASE("label JSON round trip") {
    auto r = causal("s9", "ann");
    r.cue_phrases = {"because"};
    const auto j = label_to_json(r);
    CHECK(j["relationship"] == "prevent");
    CHECK(j["temporality"] == "overlap");
    CHECK(label_from_json(j) == r);
    const auto bare = label_to_json(r, false);
    CHECK_FALSE(bare.contains("sentence_id"));
    CHECK(label_from_json(bare, "s9") == r);
    CHECK_FALSE(label_to_json(plain("s", "a")).contains("marked"));

    CHECK(label_from_json(nlohmann::json::parse(R"({"annotator":"a","causal":false,"cue_phrases":["  So   THAT "]})"), "s")
              .cue_phrases == std::vector<std::string>{"so that"});
    CHECK_THROWS_AS(label_from_json(nlohmann::json::parse(R"({"annotator":"a","causal":"yes"})"), "s"), ValidationError);
    CHECK_THROWS_AS(label_from_json(nlohmann::json::parse(R"({"causal":false})"), "s"), ValidationError);
    CHECK_THROWS_AS(label_from_json(nlohmann::json::parse(R"({"annotator":"a","causal":true})"), "s"), ValidationError);
    CHECK_THROWS_AS(label_from_json(nlohmann::json::parse(R"({"annotator":"a","causal":false,"marked":1})"), "s"),
                    ValidationError);
    CHECK_THROWS_AS(parse_relationship("because"), ValidationError);
    CHECK(parse_temporality(" During ") == Temporality::during);
}

TEST_CASE("JSONL corpus parsing") {
    std::istringstream in(kJsonl);
    const auto c = parse_corpus_jsonl(in);
    CHECK(c.size() == 3);
    CHECK(c.labels().size() == 3);
    CHECK(c.documents().at("d1").year == 2019);
    CHECK(c.documents().at("d1").date == "2019-04-02");
    CHECK(c.domains() == std::vector<std::string>{"Banking", "Health"});
    REQUIRE(c.gold("s1") != nullptr);
    CHECK(c.gold("s1")->annotator == "gold");
    CHECK(c.gold_causal("s1") == false);
    CHECK(c.gold("s3")->annotator == "x");
    CHECK(c.gold("s2") == nullptr);
    CHECK_FALSE(c.gold_causal("s2").has_value());
    CHECK(c.labels_for("s1")[0]->cue_phrases == std::vector<std::string>{"if"});
    CHECK(c.successor("s1")->id == "s2");
    CHECK(c.predecessor("s2")->id == "s1");
    CHECK(c.predecessor("s1") == nullptr);
    CHECK(c.successor("s3") == nullptr);
    CHECK(c.find("nope") == nullptr);
}

TEST_CASE("JSONL write then read is a fixed point") {
    std::istringstream in(kJsonl);
    const auto c = parse_corpus_jsonl(in);
    std::ostringstream first;
    write_corpus_jsonl(c, first);
    std::istringstream again(first.str());
    const auto back = parse_corpus_jsonl(again);
    std::ostringstream second;
    write_corpus_jsonl(back, second);
    CHECK(first.str() == second.str());
    CHECK(back.labels() == c.labels());
    CHECK(back.documents().at("d1").date == c.documents().at("d1").date);
}

TEST_CASE("JSONL errors carry the line number") {
    const auto line_of = [](const std::string& text) -> std::size_t {
        std::istringstream in(text);
        try {
            parse_corpus_jsonl(in, "c.jsonl");
        } catch (const ParseError& e) {
            return e.line();
        }
        return 0;
    };
    const std::string ok = R"({"id":"a","text":"t.","document_id":"d","domain":"X","position":0})";
    CHECK(line_of(ok + "\n{not json\n") == 2);
    CHECK(line_of(ok + "\n" + ok + "\n") == 2);
    CHECK(line_of(R"({"id":"a","text":"t.","document_id":"d","domain":"X","position":-1})") == 1);
    CHECK(line_of(R"({"id":"a","text":"","document_id":"d","domain":"X","position":0})") == 1);
    CHECK(line_of(R"({"id":"a","document_id":"d","domain":"X","position":0})") == 1);
    CHECK(line_of("\n\n" + ok + "\n" + R"({"id":"b","text":"u.","document_id":"d","domain":"X","position":0})") == 4);
    CHECK(line_of(ok + "\n") == 0);
    CHECK_THROWS_AS(load_corpus("/nonexistent/corpus.jsonl"), IoError);
}

TEST_CASE("CSV corpus with several annotators per sentence") {
    std::istringstream in(
        "id,text,document_id,domain,position,annotator,causal,explicit,marked,single_sentence,single_cause,"
        "single_effect,event_chain,relationship,temporality,cue_phrases\n"
        "s1,\"If it fails, retry.\",d1,Banking,0,a,yes,1,true,1,1,1,no,enable,before,if; Due To \n"
        "s1,\"If it fails, retry.\",d1,Banking,0,b,0,,,,,,,,,\n"
        "s2,\"A line, with \"\"quotes\"\"\nand a newline.\",d1,Banking,1,,,,,,,,,,,\n");
    const auto c = parse_corpus_csv(in);
    CHECK(c.size() == 2);
    CHECK(c.labels().size() == 2);
    const auto* a = c.labels_for("s1")[0];
    CHECK(a->causal);
    CHECK(a->relationship == Relationship::enable);
    CHECK(a->cue_phrases == std::vector<std::string>{"if", "due to"});
    CHECK_FALSE(c.labels_for("s1")[1]->causal);
    CHECK(c.find("s2")->text == "A line, with \"quotes\"\nand a newline.");
    CHECK(c.labels_for("s2").empty());

    std::istringstream bad(
        "id,text,document_id,domain,position,annotator,causal\n"
        "s1,t.,d,X,0,a,0\n"
        "s2,u.,d,X,1,a,maybe\n");
    try {
        parse_corpus_csv(bad, "c.csv");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
    std::istringstream no_col("id,text,document_id,domain\ns1,t.,d,X\n");
    CHECK_THROWS_AS(parse_corpus_csv(no_col), ParseError);
    std::istringstream bad_pos("id,text,document_id,domain,position\ns1,t.,d,X,1.5\n");
    CHECK_THROWS_AS(parse_corpus_csv(bad_pos), ParseError);
    std::istringstream partial("id,text,document_id,domain,position,annotator,causal,explicit\ns1,t.,d,X,0,a,1,1\n");
    CHECK_THROWS_AS(parse_corpus_csv(partial), ParseError);
}

TEST_CASE("load_corpus picks the format from the extension") {
    testing::TempDir dir("corpus");
    {
        std::ofstream out(dir / "c.jsonl");
        out << kJsonl;
        std::ofstream csv(dir / "c.csv");
        csv << "id,text,document_id,domain,position\ns1,t.,d,X,0\n";
    }
    CHECK(load_corpus(dir / "c.jsonl").size() == 3);
    CHECK(load_corpus(dir / "c.csv").size() == 1);
    CHECK(load_corpus(dir / "c.csv", CorpusFormat::csv).size() == 1);
    CHECK_THROWS_AS(load_corpus(dir / "c.csv", CorpusFormat::jsonl), ParseError);
}

TEST_CASE("corpus mutation guards") {
    LabeledCorpus c;
    c.add_sentence({"s1", "One.", "d", "X", 0});
    CHECK_THROWS_AS(c.add_sentence({"s1", "Again.", "d", "X", 1}), ValidationError);
    CHECK_THROWS_AS(c.add_sentence({"s2", "   ", "d", "X", 1}), ValidationError);
    CHECK_THROWS_AS(c.add_sentence({"s2", "Two.", "d", "X", 0}), ValidationError);
    CHECK_THROWS_AS(c.add_sentence({"", "Two.", "d", "X", 1}), ValidationError);
    CHECK_NOTHROW(c.add_sentence({"s2", "Two.", "e", "X", 0}));
    CHECK_THROWS_AS(c.add_label(plain("zz", "a")), ValidationError);
    c.add_label(plain("s1", "a"));
    CHECK_THROWS_AS(c.add_label(causal("s1", "a")), ValidationError);
    CHECK_NOTHROW(c.add_label(causal("s1", "b")));
    CHECK(c.gold("s1")->annotator == "a");
    CHECK_THROWS_AS((void)c.subset({"s1", "missing"}), ValidationError);
    const auto sub = c.subset({"s2", "s1"});
    CHECK(sub.sentences().front().id == "s1");
    CHECK(sub.labels().size() == 2);
}

TEST_CASE("stratify keeps domains above the threshold") {
    LabeledCorpus c;
    for (int i = 0; i < 5; ++i) c.add_sentence({"a" + std::to_string(i), "A.", "d", "Big", static_cast<std::size_t>(i)});
    c.add_sentence({"b0", "B.", "e", "Small", 0});
    CHECK(stratify(c, 0).size() == 2);
    const auto s = stratify(c, 2);
    REQUIRE(s.size() == 1);
    CHECK(s.at("Big").size() == 5);
}

TEST_CASE("random undersampling balances the classes") {
    const auto c = mixed(30, 70, 5);
    const auto u = random_undersample(c, 3);
    CHECK(u.size() == 60);
    std::size_t pos = 0;
    for (const auto& s : u.sentences()) {
        REQUIRE(u.gold_causal(s.id).has_value());
        pos += *u.gold_causal(s.id);
    }
    CHECK(pos == 30);
    // corpus order survives
    std::vector<std::size_t> order;
    for (const auto& s : u.sentences()) order.push_back(s.position);
    CHECK(std::is_sorted(order.begin(), order.end()));
    std::vector<std::string> ids_a, ids_b, ids_c;
    for (const auto& s : u.sentences()) ids_a.push_back(s.id);
    const auto again = random_undersample(c, 3), other = random_undersample(c, 4);
    for (const auto& s : again.sentences()) ids_b.push_back(s.id);
    for (const auto& s : other.sentences()) ids_c.push_back(s.id);
    CHECK(ids_a == ids_b);
    CHECK(ids_a != ids_c);
    CHECK(random_undersample(mixed(10, 10, 0), 1).size() == 20);
    CHECK_THROWS_AS(random_undersample(mixed(0, 10, 3), 1), ValidationError);
}

TEST_CASE("k-fold plans are stratified partitions") {
    const auto c = mixed(23, 41, 6);
    Rng rng(4);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t k = 2 + rng.below(9);
        const auto plan = split_kfold(c, k, 3, rng.next());
        REQUIRE(plan.assignments.size() == 3);
        for (std::size_t rep = 0; rep < 3; ++rep) {
            std::multiset<std::string> seen;
            std::size_t lo = SIZE_MAX, hi = 0, clo = SIZE_MAX, chi = 0;
            for (std::size_t f = 0; f < k; ++f) {
                const auto& ids = plan.test_ids(rep, f);
                seen.insert(ids.begin(), ids.end());
                lo = std::min(lo, ids.size());
                hi = std::max(hi, ids.size());
                const auto nc = static_cast<std::size_t>(
                    std::count_if(ids.begin(), ids.end(), [](const std::string& id) { return id[0] == 'c'; }));
                clo = std::min(clo, nc);
                chi = std::max(chi, nc);
                CHECK(plan.train_ids(rep, f).size() + ids.size() == c.size());
            }
            CHECK(seen.size() == c.size());
            CHECK(std::set<std::string>(seen.begin(), seen.end()).size() == c.size());
            CHECK(hi - lo <= 1);
            CHECK(chi - clo <= 1);
        }
    }
    const auto a = split_kfold(c, 5, 2, 9), b = split_kfold(c, 5, 2, 9);
    CHECK(a.assignments == b.assignments);
    CHECK(a.assignments[0] != a.assignments[1]);
    CHECK(fold_plan_to_json(a)["k"] == 5);
    CHECK_THROWS_AS(split_kfold(c, 1, 1, 0), ValidationError);
    CHECK_THROWS_AS(split_kfold(c, 71, 1, 0), ValidationError);
    CHECK_THROWS_AS(split_kfold(c, 5, 0, 0), ValidationError);
}
