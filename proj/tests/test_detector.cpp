#include <cmath>
#include <sstream>

#include "doctest.h"
#include "test_support.hpp"

#include "creq/classifiers.hpp"
#include "creq/cue_lexicon.hpp"
#include "creq/detector.hpp"
#include "creq/error.hpp"
#include "creq/features.hpp"
#include "creq/rng.hpp"

using namespace creq;

namespace {

const CueLexicon& table_lexicon() {
    static const CueLexicon lex = load_lexicon(testing::data_file("cue_lexicon.csv"));
    return lex;
}

FeatureMatrix dense(const std::vector<std::vector<double>>& rows) {
    FeatureMatrix m;
    m.dim = rows.empty() ? 0 : rows[0].size();
    for (const auto& r : rows) {
        SparseRow s;
        for (std::size_t i = 0; i < r.size(); ++i) {
            if (r[i] != 0.0) {
                s.index.push_back(static_cast<std::uint32_t>(i));
                s.value.push_back(r[i]);
            }
        }
        m.rows.push_back(std::move(s));
    }
    return m;
}

// Two word blobs; label 1 rows use words 0..4, label 0 rows words 5..9.
std::pair<FeatureMatrix, std::vector<std::uint8_t>> separable(std::uint64_t seed, std::size_t n) {
    Rng rng(seed);
    std::vector<std::vector<double>> rows;
    std::vector<std::uint8_t> y;
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint8_t label = i % 2;
        std::vector<double> r(10, 0.0);
        for (int k = 0; k < 3; ++k) r[(label ? 0 : 5) + rng.below(5)] += 1.0;
        rows.push_back(r);
        y.push_back(label);
    }
    return {dense(rows), y};
}

std::pair<FeatureMatrix, std::vector<std::uint8_t>> noisy(std::uint64_t seed, std::size_t n, std::size_t dim) {
    Rng rng(seed);
    std::vector<std::vector<double>> rows;
    std::vector<std::uint8_t> y;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> r(dim, 0.0);
        const std::uint8_t label = rng.bernoulli(0.5);
        for (int k = 0; k < 4; ++k) r[rng.below(dim)] += 1.0;
        if (rng.bernoulli(0.8)) r[label ? 0 : 1] += 1.0;
        rows.push_back(r);
        y.push_back(label);
    }
    y[0] = 0;
    y[1] = 1;
    return {dense(rows), y};
}

double training_accuracy(const Classifier& c, const FeatureMatrix& x, const std::vector<std::uint8_t>& y) {
    std::size_t ok = 0;
    for (std::size_t i = 0; i < y.size(); ++i) ok += c.decide(c.predict_proba(x.rows[i])) == (y[i] == 1);
    return static_cast<double>(ok) / static_cast<double>(y.size());
}

}  // namespace

TEST_CASE("embedding names") {
    CHECK(parse_embedding("BoW") == Embedding::bow);
    CHECK(parse_embedding("TF-IDF") == Embedding::tfidf);
    CHECK(parse_embedding("tfidf") == Embedding::tfidf);
    CHECK_THROWS_AS(parse_embedding("word2vec"), ValidationError);
}

TEST_CASE("bag of words counts and identical rows") {
    const std::vector<std::string> texts = {"the system shall log the error", "the system shall log the error", "Error!"};
    const auto f = Featurizer::fit(texts, Embedding::bow);
    const auto m = f.transform(texts);
    CHECK(m.rows[0] == m.rows[1]);
    CHECK(m.rows[0].at(*f.vocabulary().id("the")) == 2.0);
    CHECK(m.rows[2].at(*f.vocabulary().id("error")) == 1.0);
    CHECK(m.rows[2].nnz() == 1);
    CHECK(f.transform("unseen words only").nnz() == 0);
}

TEST_CASE("tf-idf on a three document toy corpus matches the formula") {
    const std::vector<std::string> texts = {"a b", "a c", "a a d"};
    const auto f = Featurizer::fit(texts, Embedding::tfidf);
    const auto m = f.transform(texts);
    const double n = 3.0;
    const double idf_a = std::log((1 + n) / (1 + 3)) + 1;
    const double idf_1 = std::log((1 + n) / (1 + 1)) + 1;
    const auto id = [&](const char* t) { return *f.vocabulary().id(t); };
    // doc 0: a=1*idf_a, b=1*idf_1
    const double n0 = std::sqrt(idf_a * idf_a + idf_1 * idf_1);
    CHECK(m.rows[0].at(id("a")) == doctest::Approx(idf_a / n0).epsilon(1e-12));
    CHECK(m.rows[0].at(id("b")) == doctest::Approx(idf_1 / n0).epsilon(1e-12));
    // doc 2: a=2*idf_a, d=1*idf_1
    const double n2 = std::sqrt(4 * idf_a * idf_a + idf_1 * idf_1);
    CHECK(m.rows[2].at(id("a")) == doctest::Approx(2 * idf_a / n2).epsilon(1e-12));
    CHECK(m.rows[2].at(id("d")) == doctest::Approx(idf_1 / n2).epsilon(1e-12));
    // A term in every document weighs less than a same-tf term in one document.
    CHECK(m.rows[0].at(id("a")) < m.rows[0].at(id("b")));
}

TEST_CASE("tf-idf rows have unit norm") {
    Rng rng(7);
    const std::vector<std::string> words = {"if", "the", "user", "clicks", "then", "system", "fails", "error", "shown"};
    std::vector<std::string> texts;
    for (int i = 0; i < 300; ++i) {
        std::string t;
        const auto len = 1 + rng.below(12);
        for (std::uint64_t k = 0; k < len; ++k) t += words[rng.below(words.size())] + " ";
        texts.push_back(t);
    }
    const auto f = Featurizer::fit(texts, Embedding::tfidf);
    const auto serial = f.transform(texts, Execution::serial);
    const auto parallel = f.transform(texts, Execution::parallel);
    for (std::size_t i = 0; i < texts.size(); ++i) {
        CHECK(std::abs(std::sqrt(serial.rows[i].squared_norm()) - 1.0) < 1e-9);
        CHECK(serial.rows[i] == parallel.rows[i]);
        for (const double v : serial.rows[i].value) CHECK(v >= 0.0);
    }
}

TEST_CASE("featurizer errors, fingerprints and persistence") {
    const std::vector<std::string> none = {"...", "!?"};
    CHECK_THROWS_AS(Featurizer::fit(none, Embedding::bow), ValidationError);
    const std::vector<std::string> a = {"alpha beta", "gamma"};
    const std::vector<std::string> b = {"alpha beta", "delta"};
    const auto fa = Featurizer::fit(a, Embedding::bow);
    CHECK(fa.fingerprint() != Featurizer::fit(b, Embedding::bow).fingerprint());
    CHECK(fa.fingerprint() != Featurizer::fit(a, Embedding::tfidf).fingerprint());
    const auto back = Featurizer::from_json(fa.to_json());
    CHECK(back.fingerprint() == fa.fingerprint());
    CHECK(back.transform("gamma alpha") == fa.transform("gamma alpha"));
    auto j = fa.to_json();
    j["vocabulary"][0] = "zeta";
    CHECK_THROWS_AS(Featurizer::from_json(j), ValidationError);
}

TEST_CASE("grid hyperparameter strings are accepted verbatim") {
    const std::vector<std::pair<std::string, std::string>> rows = {
        {"nb", "alpha: 1, fit_prior: True, embed: BoW"},
        {"svm", "C: 50, gamma: 0.001, kernel: rbf, embed: BoW"},
        {"rf", "criterion: entropy, max_features: auto, n_estimators: 500, embed: BoW"},
        {"dt", "criterion: gini, max_features: auto, splitter: random, embed: TF-IDF"},
        {"lr", "C: 1, solver: liblinear, embed: TF-IDF"},
        {"ab", "algorithm: SAMME.R, n_estimators: 200, embed: BoW"},
        {"knn", "algorithm: ball_tree, n_neighbors: 20, weights: distance, embed: TF-IDF"},
    };
    for (const auto& [algo, params] : rows) {
        const auto spec = parse_classifier_spec(algo, params);
        CHECK(spec.params_string() == params);
        CHECK(spec_from_json(spec_to_json(spec)) == spec);
        if (spec.algorithm == Algorithm::svm) {
            CHECK_THROWS_AS(make_classifier(spec, 0), ValidationError);
        } else {
            CHECK(make_classifier(spec, 0) != nullptr);
        }
    }
    CHECK_THROWS_AS(parse_classifier_spec("nb", "alpha: 1, depth: 3"), ValidationError);
    CHECK_THROWS_AS(parse_classifier_spec("nb", "alpha 1"), ValidationError);
    CHECK_THROWS_AS(parse_classifier_spec("rule", "embed: BoW"), ValidationError);
    CHECK_THROWS_AS(make_classifier(parse_classifier_spec("nb", "alpha: x"), 0), ValidationError);
    CHECK_THROWS_AS(make_classifier(parse_classifier_spec("external", ""), 0), ValidationError);
    CHECK(parse_classifier_spec("rule", "").embedding == std::nullopt);
    CHECK(parse_classifier_spec("lr", "").embedding == Embedding::bow);
}

TEST_CASE("naive Bayes fits separable data and its posteriors sum to one") {
    const auto [x, y] = separable(3, 40);
    NaiveBayes nb(1.0, true);
    nb.fit(x, y);
    CHECK(training_accuracy(nb, x, y) == 1.0);
    const auto [xn, yn] = noisy(5, 200, 30);
    nb.fit(xn, yn);
    for (const auto& r : xn.rows) {
        const auto p = nb.posterior(r);
        CHECK(std::abs(p[0] + p[1] - 1.0) < 1e-12);
    }
}

TEST_CASE("naive Bayes matches a hand-evaluated posterior") {
    // class 1: rows (2,0) and (1,1); class 0: row (0,3). alpha = 1, fitted prior.
    const auto x = dense({{2, 0}, {1, 1}, {0, 3}});
    const std::vector<std::uint8_t> y = {1, 1, 0};
    NaiveBayes nb(1.0, true);
    nb.fit(x, y);
    // theta1 = ((3+1)/(4+2), (1+1)/(4+2)); theta0 = ((0+1)/(3+2), (3+1)/(3+2))
    const auto q = dense({{1, 2}}).rows[0];
    const double j1 = std::log(2.0 / 3) + std::log(4.0 / 6) + 2 * std::log(2.0 / 6);
    const double j0 = std::log(1.0 / 3) + std::log(1.0 / 5) + 2 * std::log(4.0 / 5);
    CHECK(nb.predict_proba(q) == doctest::Approx(std::exp(j1) / (std::exp(j0) + std::exp(j1))).epsilon(1e-12));
    NaiveBayes flat(1.0, false);
    flat.fit(x, y);
    const double k1 = std::log(4.0 / 6) + 2 * std::log(2.0 / 6);
    const double k0 = std::log(1.0 / 5) + 2 * std::log(4.0 / 5);
    CHECK(flat.predict_proba(q) == doctest::Approx(std::exp(k1) / (std::exp(k0) + std::exp(k1))).epsilon(1e-12));
}

TEST_CASE("logistic regression reaches the minimum found by a grid search") {
    const auto x = dense({{1, 0}, {2, 1}, {0, 1}, {1, 2}, {0.5, 0.5}, {2, 2}});
    const std::vector<std::uint8_t> y = {1, 1, 0, 0, 1, 0};
    LogisticRegression lr(1.0);
    lr.fit(x, y);
    // Oracle: direct evaluation of the regularized loss over a grid.
    const auto loss = [&](double w0, double w1, double b) {
        double f = 0.5 * (w0 * w0 + w1 * w1);
        for (std::size_t i = 0; i < y.size(); ++i) {
            const double z = b + w0 * x.rows[i].at(0) + w1 * x.rows[i].at(1);
            f += std::log1p(std::exp(y[i] ? -z : z));
        }
        return f;
    };
    double best = 1e300, bw0 = 0, bw1 = 0, bb = 0;
    for (double w0 = -4; w0 <= 4; w0 += 0.02) {
        for (double w1 = -4; w1 <= 4; w1 += 0.02) {
            for (double b = -3; b <= 3; b += 0.05) {
                const double f = loss(w0, w1, b);
                if (f < best) best = f, bw0 = w0, bw1 = w1, bb = b;
            }
        }
    }
    const auto& w = lr.weights();
    CHECK(std::abs(w[0] - bw0) < 0.05);
    CHECK(std::abs(w[1] - bw1) < 0.05);
    CHECK(std::abs(lr.intercept() - bb) < 0.1);
    CHECK(loss(w[0], w[1], lr.intercept()) <= best + 1e-9);
    CHECK(lr.objective(x, y, w, lr.intercept()) == doctest::Approx(loss(w[0], w[1], lr.intercept())).epsilon(1e-12));
}

TEST_CASE("logistic regression score is the sigmoid of the linear term") {
    LogisticRegression lr(1.0);
    lr.set_parameters({0.5, -1.25}, 0.3);
    const auto row = dense({{2, 1}}).rows[0];
    const double z = 0.3 + 0.5 * 2 - 1.25 * 1;
    CHECK(lr.decision_function(row) == doctest::Approx(z).epsilon(1e-15));
    CHECK(lr.predict_proba(row) == doctest::Approx(1.0 / (1.0 + std::exp(-z))).epsilon(1e-15));
}

TEST_CASE("knn breaks an equal-distance tie toward not causal") {
    const auto x = dense({{1, 0}, {0, 1}});
    const std::vector<std::uint8_t> y = {1, 0};
    Knn knn(2, KnnWeights::uniform);
    knn.fit(x, y);
    const auto q = dense({{1, 1}}).rows[0];
    CHECK(knn.predict_proba(q) == 0.5);
    CHECK_FALSE(knn.decide(knn.predict_proba(q)));
    Knn weighted(2, KnnWeights::distance);
    weighted.fit(x, y);
    CHECK_FALSE(weighted.decide(weighted.predict_proba(q)));
    // An exact match decides alone under distance weighting.
    CHECK(weighted.predict_proba(x.rows[0]) == 1.0);
    // Closer neighbor dominates: distances 1 and 3 give weights 1 and 1/3.
    const auto line = dense({{0}, {4}});
    Knn w2(2, KnnWeights::distance);
    w2.fit(line, y);
    CHECK(w2.predict_proba(dense({{1}}).rows[0]) == doctest::Approx(1.0 / (1.0 + 1.0 / 3)).epsilon(1e-12));
}

TEST_CASE("decision trees split sparse features") {
    const auto [x, y] = separable(11, 60);
    for (const auto crit : {SplitCriterion::gini, SplitCriterion::entropy}) {
        TreeOptions o;
        o.criterion = crit;
        DecisionTree dt(o, 1);
        dt.fit(x, y);
        CHECK(training_accuracy(dt, x, y) == 1.0);
    }
    // XOR on two binary features needs two levels.
    const auto xor_x = dense({{0, 0}, {1, 0}, {0, 1}, {1, 1}, {0, 0}, {1, 0}, {0, 1}, {1, 1}});
    const std::vector<std::uint8_t> xor_y = {0, 1, 1, 0, 0, 1, 1, 0};
    DecisionTree full;
    full.fit(xor_x, xor_y);
    CHECK(training_accuracy(full, xor_x, xor_y) == 1.0);
    CHECK(full.depth() == 2);
    TreeOptions stump;
    stump.max_depth = 1;
    DecisionTree shallow(stump);
    shallow.fit(xor_x, xor_y);
    CHECK(shallow.depth() <= 1);
    TreeOptions rnd;
    rnd.splitter = Splitter::random;
    DecisionTree r(rnd, 9);
    r.fit(xor_x, xor_y);
    CHECK(training_accuracy(r, xor_x, xor_y) == 1.0);
}

TEST_CASE("decision tree thresholds fall between distinct values") {
    const auto x = dense({{1}, {2}, {3}, {4}});
    const std::vector<std::uint8_t> y = {0, 0, 1, 1};
    DecisionTree dt;
    dt.fit(x, y);
    REQUIRE(dt.nodes().size() == 3);
    CHECK(dt.nodes()[0].threshold == 2.5);
    const auto with_zero = dense({{0}, {0}, {3}, {4}});
    DecisionTree z;
    z.fit(with_zero, y);
    CHECK(z.nodes()[0].threshold == 1.5);
}

TEST_CASE("trained models are deterministic and survive serialization") {
    const auto [x, y] = noisy(21, 160, 25);
    const auto [hx, hy] = noisy(22, 60, 25);
    const std::vector<std::pair<std::string, std::string>> specs = {
        {"nb", "alpha: 1, fit_prior: True"},
        {"lr", "C: 1, solver: liblinear"},
        {"knn", "algorithm: ball_tree, n_neighbors: 20, weights: distance"},
        {"dt", "criterion: gini, max_features: auto, splitter: random"},
        {"rf", "criterion: entropy, max_features: auto, n_estimators: 25"},
        {"ab", "algorithm: SAMME.R, n_estimators: 30"},
        {"ab", "algorithm: SAMME, n_estimators: 30"},
    };
    for (const auto& [algo, params] : specs) {
        CAPTURE(algo);
        const auto spec = parse_classifier_spec(algo, params);
        auto a = make_classifier(spec, 99);
        auto b = make_classifier(spec, 99);
        a->fit(x, y);
        b->fit(x, y);
        const auto back = classifier_from_json(nlohmann::json::parse(a->to_json().dump()));
        CHECK(training_accuracy(*a, x, y) > 0.7);
        for (const auto& r : hx.rows) {
            const double s = a->predict_proba(r);
            CHECK(s >= 0.0);
            CHECK(s <= 1.0);
            CHECK(s == b->predict_proba(r));
            CHECK(back->predict_proba(r) == doctest::Approx(s).epsilon(1e-12));
        }
        CHECK(a->predict_proba(hx, Execution::parallel) == a->predict_proba(hx, Execution::serial));
    }
}

TEST_CASE("training rejects degenerate labels and misaligned input") {
    const auto x = dense({{1, 0}, {0, 1}});
    const std::vector<std::uint8_t> same = {1, 1};
    const std::vector<std::uint8_t> short_y = {1};
    for (const auto* algo : {"nb", "lr", "knn", "dt", "rf", "ab"}) {
        auto c = make_classifier(parse_classifier_spec(algo, ""), 0);
        CHECK_THROWS_AS(c->fit(x, same), ValidationError);
        CHECK_THROWS_AS(c->fit(x, short_y), ValidationError);
        CHECK_THROWS_AS((void)c->predict_proba(x.rows[0]), ValidationError);
    }
}

TEST_CASE("adaboost stops once a stump is perfect") {
    const auto x = dense({{1, 0}, {1, 0}, {0, 1}, {0, 1}});
    const std::vector<std::uint8_t> y = {1, 1, 0, 0};
    AdaBoost ab(200, 1.0, BoostAlgorithm::samme_r);
    ab.fit(x, y);
    CHECK(ab.size() == 1);
    CHECK(ab.predict_proba(x.rows[0]) > 0.99);
    CHECK(ab.predict_proba(x.rows[2]) < 0.01);
}

TEST_CASE("rule baseline examples") {
    const auto& lex = table_lexicon();
    CHECK(rule_based_classify("If the process fails, an error message is shown.", lex).label);
    CHECK(rule_based_classify("If the process fails, an error message is shown.", lex).score == 1.0);
    const auto no = rule_based_classify("The database stores user records.", lex, "s1");
    CHECK_FALSE(no.label);
    CHECK(no.score == 0.0);
    CHECK(no.sentence_id == "s1");
    CHECK(rule_based_classify("Any items or issues which will limit the options available to the platform "
                              "developers should be described.",
                              lex)
              .label);
}

TEST_CASE("rule baseline is causal exactly when a cue matches") {
    const auto& lex = table_lexicon();
    const std::vector<std::string> words = {"the", "system", "if", "because", "shall", "data", "so", "that", "user",
                                            "causes", "leads", "to", "after", "report", "when", "order", ",", "."};
    Rng rng(42);
    for (int i = 0; i < 2000; ++i) {
        std::string t;
        const auto len = rng.below(10);
        for (std::uint64_t k = 0; k < len; ++k) t += words[rng.below(words.size())] + " ";
        CHECK(rule_based_classify(t, lex).label == !match_cues(t, lex).empty());
    }
}

TEST_CASE("tag-enriched input sequences") {
    const std::vector<TaggedToken> tokens = {
        {"If", "SCONJ", "mark"},    {"the", "DET", "det"},          {"process", "NOUN", "nsubj"},
        {"fails", "VERB", "advcl"}, {",", "PUNCT", "punct"},        {"an", "DET", "det"},
        {"error", "NOUN", "compound"}, {"message", "NOUN", "nsubjpass"}, {"is", "AUX", "auxpass"},
        {"shown", "VERB", "ROOT"},  {".", "PUNCT", "punct"},
    };
    CHECK(enrich_sequence(tokens, TagMode::pos) ==
          "If_SCONJ the_DET process_NOUN fails_VERB ,_PUNCT an_DET error_NOUN message_NOUN is_AUX shown_VERB ._PUNCT");
    CHECK(enrich_sequence(tokens, TagMode::dep) ==
          "If_mark the_det process_nsubj fails_advcl ,_punct an_det error_compound message_nsubjpass is_auxpass "
          "shown_ROOT ._punct");
    CHECK(enrich_sequence({}, TagMode::pos).empty());
}

TEST_CASE("text models train, predict and persist") {
    std::vector<std::string> texts;
    std::vector<std::uint8_t> y;
    for (int i = 0; i < 20; ++i) {
        texts.push_back(i % 2 ? "if the user clicks then the system responds" : "the database stores records");
        y.push_back(i % 2);
    }
    const auto spec = parse_classifier_spec("nb", "alpha: 1, fit_prior: True, embed: TF-IDF");
    const auto model = TextModel::train(spec, texts, y, 1);
    CHECK(model.predict("the user clicks").label);
    CHECK_FALSE(model.predict("database records").label);

    testing::TempDir dir("model");
    model.save(dir / "m.json");
    const auto back = TextModel::load(dir / "m.json");
    CHECK(back.predict("the user clicks").score == doctest::Approx(model.predict("the user clicks").score).epsilon(1e-12));
    CHECK(back.spec() == spec);

    const std::vector<std::string> ids = {"a"};
    const std::vector<std::string> q = {"the user clicks"};
    CHECK(model.predict(model.featurizer()->transform(q), ids)[0].label);
    const auto other = Featurizer::fit(q, Embedding::tfidf);
    CHECK_THROWS_WITH_AS((void)model.predict(other.transform(q), ids), doctest::Contains("vocabulary mismatch"), ValidationError);

    const auto rule = TextModel::rule_based(table_lexicon());
    rule.save(dir / "r.json");
    CHECK(TextModel::load(dir / "r.json").predict("If it fails, stop.").label);
    CHECK_THROWS_AS(TextModel::train(parse_classifier_spec("svm", ""), texts, y, 1), ValidationError);
    CHECK_THROWS_AS(TextModel::load(dir / "missing.json"), IoError);
}

TEST_CASE("external predictions") {
    LabeledCorpus corpus;
    corpus.add_sentence({"s1", "one", "d", "x", 0});
    corpus.add_sentence({"s2", "two", "d", "x", 1});
    std::istringstream ok(R"({"sentence_id":"s1","label":true,"score":0.9}
{"sentence_id":"s2","score":0.2}
)");
    const auto p = read_predictions_jsonl(ok, &corpus);
    REQUIRE(p.size() == 2);
    CHECK(p[0].label);
    CHECK_FALSE(p[1].label);
    std::ostringstream out;
    write_predictions_jsonl(p, out);
    std::istringstream again(out.str());
    CHECK(read_predictions_jsonl(again, &corpus) == p);

    std::istringstream unknown(R"({"sentence_id":"s9","label":true,"score":0.9})");
    CHECK_THROWS_WITH_AS(read_predictions_jsonl(unknown, &corpus), doctest::Contains("s9"), ParseError);
    std::istringstream dup("{\"sentence_id\":\"s1\",\"score\":0.9}\n{\"sentence_id\":\"s1\",\"score\":0.1}\n");
    CHECK_THROWS_WITH_AS(read_predictions_jsonl(dup, &corpus), doctest::Contains("duplicate"), ParseError);
    std::istringstream range(R"({"sentence_id":"s1","score":1.5})");
    CHECK_THROWS_AS(read_predictions_jsonl(range, &corpus), ParseError);
    CHECK_THROWS_AS(load_external_predictions("/nonexistent/p.jsonl"), IoError);
}
