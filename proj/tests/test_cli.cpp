#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "annotation_fixture.hpp"
#include "synthetic_corpus.hpp"
#include "test_support.hpp"

#include "creq/cli.hpp"
#include "creq/digest.hpp"
#include "creq/label_store.hpp"

using namespace creq;
using nlohmann::json;
using creq::testing::TempDir;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string write_corpus(const TempDir& dir) {
    const auto path = (dir / "corpus.jsonl").string();
    std::ofstream out(path);
    write_corpus_jsonl(creq::testing::planted_corpus({40, 0.8, 0.3, 2}), out);
    return path;
}

}  // namespace

TEST_CASE("detect with the rule method writes predictions and a manifest") {
    TempDir dir("cli-detect");
    const auto corpus = write_corpus(dir);
    const auto out = (dir / "pred.jsonl").string();
    const auto lex = creq::testing::data_file("cue_lexicon.csv").string();
    const auto r = run({"detect", "--input", corpus, "--method", "rule", "--lexicon", lex, "--out", out});
    REQUIRE(r.code == kExitOk);
    const auto preds = creq::testing::slurp(out);
    CHECK(std::count(preds.begin(), preds.end(), '\n') == 80);
    const auto m = json::parse(creq::testing::slurp(out + ".manifest.json"));
    CHECK(m["command"] == "detect");
    CHECK(m["inputs"].size() == 2);
    CHECK(m["inputs"][0]["sha256"] == sha256_file(corpus));
    CHECK(m["outputs"][0]["sha256"] == sha256_file(out));
    CHECK(m["versions"].contains("creq"));

    const auto again = (dir / "pred2.jsonl").string();
    CHECK(run({"detect", "--input", corpus, "--lexicon", lex, "--out", again}).code == kExitOk);
    CHECK(creq::testing::slurp(again) == preds);

    const auto ext = run({"detect", "--input", corpus, "--method", "external", "--predictions", out});
    CHECK(ext.code == kExitOk);
    CHECK(ext.out == preds);
}

TEST_CASE("train then detect with the model") {
    TempDir dir("cli-train");
    const auto corpus = write_corpus(dir);
    const auto model = (dir / "nb.json").string();
    auto r = run({"train", "--corpus", corpus, "--algorithm", "nb", "--params", "alpha: 0.5, embed: TF-IDF", "--seed", "3",
                  "--out", model});
    REQUIRE(r.code == kExitOk);
    CHECK(json::parse(creq::testing::slurp(model + ".manifest.json"))["seed"] == 3);
    r = run({"detect", "--input", corpus, "--method", "model", "--model", model});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("\"score\"") != std::string::npos);
    CHECK(run({"train", "--corpus", corpus}).code == kExitValidation);
}

TEST_CASE("agreement, prevalence and cue-stats reports") {
    auto r = run({"agreement", "--matrices", creq::testing::data_file("agreement_matrices.csv").string()});
    REQUIRE(r.code == kExitOk);
    const auto agr = json::parse(r.out);
    CHECK(agr["run"]["inputs"].size() == 1);
    CHECK(agr.dump().find("0.579") != std::string::npos);

    r = run({"prevalence", "--counts", creq::testing::data_file("domain_counts.csv").string(), "--min-stratum", "100",
             "--alpha", "0.05"});
    REQUIRE(r.code == kExitOk);
    const auto prev = json::parse(r.out);
    CHECK_FALSE(prev["tests"].is_null());
    CHECK(prev["headline"][0]["name"] == "causal");

    r = run({"cue-stats", "--lexicon", creq::testing::data_file("cue_lexicon.csv").string(), "--format", "text"});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("in case of") != std::string::npos);
}

TEST_CASE("evaluate the rule baseline over a small plan") {
    TempDir dir("cli-eval");
    const auto corpus = write_corpus(dir);
    auto r = run({"evaluate", "--corpus", corpus, "--method", "rule", "--folds", "4", "--repetitions", "2", "--seed", "5"});
    REQUIRE(r.code == kExitOk);
    const auto j = json::parse(r.out);
    CHECK(j["report"]["accuracy"].get<double>() == doctest::Approx(0.8).epsilon(0.02));
    CHECK(j["run"]["seed"] == 5);
    CHECK(j["report"]["folds"] == 8);  // test folds averaged: 4 x 2

    const auto grid = (dir / "grid.json").string();
    std::ofstream(grid) << R"({"alpha": ["0.5", "1"]})";
    r = run({"evaluate", "--corpus", corpus, "--method", "nb", "--grid", grid, "--folds", "3", "--repetitions", "1",
             "--format", "text"});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("alpha: 0.5") != std::string::npos);
    CHECK(run({"evaluate", "--corpus", corpus, "--method", "external"}).code == kExitValidation);
    CHECK(run({"evaluate", "--corpus", corpus, "--folds", "1"}).code == kExitValidation);
}

TEST_CASE("lifecycle on the pre-processing fixture") {
    TempDir dir("cli-life");
    const auto out = (dir / "suite.json").string();
    const auto violin = (dir / "violin.csv").string();
    const auto r = run({"lifecycle", "--requirements", creq::testing::fixture("requirements_preprocess.jsonl").string(),
                        "--invalid-author", "migration", "--out", out, "--violin-out", violin});
    REQUIRE(r.code == kExitOk);
    const auto j = json::parse(creq::testing::slurp(out));
    CHECK(j["preprocess"]["kept"] == 4);
    CHECK(j["preprocess"]["single_entry"] == 3);
    CHECK(std::filesystem::exists(violin));
    CHECK(json::parse(creq::testing::slurp(out + ".manifest.json"))["outputs"].size() == 2);
}

TEST_CASE("serve --export replays the store log") {
    TempDir dir("cli-serve");
    {
        LabelStore store(dir / "store");
        store.append_label(creq::testing::full_causal("s2", "a"));
        store.append_label(creq::testing::not_causal("s1", "b"));
        store.append_label(creq::testing::not_causal("s2", "a"));
    }
    const auto out = (dir / "labels.jsonl").string();
    auto r = run({"serve", "--store", (dir / "store").string(), "--export", out});
    REQUIRE(r.code == kExitOk);
    const auto first = creq::testing::slurp(out);
    CHECK(first == replay_log(dir / "store" / "log.jsonl").export_jsonl());
    CHECK(first.find("\"s1\"") < first.find("\"s2\""));
    r = run({"serve", "--store", (dir / "store").string(), "--export", out});
    CHECK(creq::testing::slurp(out) == first);
    CHECK(run({"serve", "--store", (dir / "empty").string(), "--export", out}).code == kExitIo);
}

TEST_CASE("exit codes") {
    CHECK(run({}).code == kExitValidation);
    CHECK(run({"nonsense"}).code == kExitValidation);
    CHECK(run({"detect", "--input", "x.jsonl", "--frobnicate"}).code == kExitValidation);
    CHECK(run({"detect", "--input", "/nonexistent/corpus.jsonl"}).code == kExitIo);
    CHECK(run({"agreement"}).code == kExitValidation);
    CHECK(run({"--help"}).code == kExitOk);
    const auto r = run({"agreement", "--matrices", "/nonexistent.csv"});
    CHECK(r.code == kExitIo);
    CHECK(r.err.find("error:") == 0);
}
