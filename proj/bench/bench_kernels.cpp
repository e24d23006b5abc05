// Serial vs parallel runs of the OpenMP kernels, plus the reference kernels
// they replace. Run with --benchmark_filter=... to narrow.

#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "creq/classifiers.hpp"
#include "creq/corpus.hpp"
#include "creq/cue_lexicon.hpp"
#include "creq/detector.hpp"
#include "creq/domain_counts.hpp"
#include "creq/evaluation.hpp"
#include "creq/features.hpp"
#include "creq/lifecycle.hpp"
#include "creq/prevalence.hpp"
#include "creq/reference.hpp"
#include "creq/rng.hpp"
#include "creq/stats.hpp"

using namespace creq;

namespace {

const char* kWords[] = {"system", "shall", "display", "user", "record", "sensor", "value", "report", "store",
                        "alarm",  "valve", "signal",  "door", "light",  "timer",  "error", "message", "log"};
const char* kCues[] = {"if", "because", "when", "due to", "so that", "in case of"};

LabeledCorpus synthetic(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    LabeledCorpus c;
    for (std::size_t i = 0; i < n; ++i) {
        const bool causal = rng.bernoulli(0.5);
        std::string text = causal ? std::string(kCues[rng.below(6)]) + " the " : "the ";
        const std::size_t len = 6 + rng.below(14);
        for (std::size_t w = 0; w < len; ++w) text += std::string(kWords[rng.below(18)]) + " ";
        text += "shall work.";
        const auto id = "s" + std::to_string(i);
        c.add_sentence({id, text, "doc" + std::to_string(i / 20), "Bench", i % 20});
        CausalLabelRecord r;
        r.sentence_id = id;
        r.annotator = "gold";
        r.causal = causal;
        if (causal) {
            r.is_explicit = r.marked = r.single_sentence = r.single_cause = r.single_effect = true;
            r.event_chain = false;
            r.relationship = Relationship::cause;
            r.temporality = Temporality::before;
        }
        c.add_label(r);
    }
    return c;
}

std::vector<std::string> texts_of(const LabeledCorpus& c) {
    std::vector<std::string> t;
    for (const auto& s : c.sentences()) t.push_back(s.text);
    return t;
}

Execution mode(const benchmark::State& state) { return state.range(0) ? Execution::parallel : Execution::serial; }

void BM_Featurize(benchmark::State& state) {
    const auto texts = texts_of(synthetic(5000, 1));
    const auto f = Featurizer::fit(texts, Embedding::tfidf);
    for (auto _ : state) benchmark::DoNotOptimize(f.transform(texts, mode(state)));
}
BENCHMARK(BM_Featurize)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_PredictKnn(benchmark::State& state) {
    const auto corpus = synthetic(3000, 2);
    const auto texts = texts_of(corpus);
    std::vector<std::string> ids;
    for (const auto& s : corpus.sentences()) ids.push_back(s.id);
    const auto model = TextModel::train(parse_classifier_spec("knn", "n_neighbors: 5"), texts, gold_labels(corpus, ids), 1);
    for (auto _ : state) benchmark::DoNotOptimize(model.predict(corpus, mode(state)));
}
BENCHMARK(BM_PredictKnn)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_CrossValidateNb(benchmark::State& state) {
    const auto corpus = synthetic(4000, 3);
    CvOptions o;
    o.k = 10;
    o.repetitions = 2;
    o.allow_unbalanced = true;
    o.execution = mode(state);
    const auto spec = parse_classifier_spec("nb", "");
    for (auto _ : state) benchmark::DoNotOptimize(repeated_cv(corpus, spec, o));
}
BENCHMARK(BM_CrossValidateNb)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_OneVsRest(benchmark::State& state) {
    const auto table = load_domain_counts(std::string(CREQ_DATA_DIR) + "/domain_counts.csv");
    OneVsRestOptions o;
    o.execution = mode(state);
    for (auto _ : state) benchmark::DoNotOptimize(domain_independence_report(table, o));
}
BENCHMARK(BM_OneVsRest)->Arg(0)->Arg(1);

void BM_DeriveFeatures(benchmark::State& state) {
    Rng rng(4);
    std::vector<RequirementRecord> records;
    for (int i = 0; i < 3000; ++i) {
        RequirementRecord r;
        r.id = "R" + std::to_string(i);
        r.description = "If the valve opens, the sensor shall report. The log is kept. When the door closes, the light turns off.";
        r.creation_date = "2020-01-01";
        r.state_log = std::vector<StateEntry>{{"a", "2020-01-01T00:00:00Z", "NF"}, {"b", "2020-02-01T00:00:00Z", "EC"}};
        records.push_back(r);
    }
    const auto detector = TextModel::rule_based(load_lexicon(std::string(CREQ_DATA_DIR) + "/cue_lexicon.csv"));
    for (auto _ : state) benchmark::DoNotOptimize(derive_all(records, detector, mode(state)));
}
BENCHMARK(BM_DeriveFeatures)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

std::vector<double> random_sample(std::size_t n) {
    Rng rng(n);
    std::vector<double> v(n);
    for (auto& x : v) x = static_cast<double>(rng.below(n / 4 + 1));
    return v;
}

void BM_MidranksSort(benchmark::State& state) {
    const auto v = random_sample(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(stats::midranks(v));
}
BENCHMARK(BM_MidranksSort)->Arg(256)->Arg(4096);

void BM_MidranksReference(benchmark::State& state) {
    const auto v = random_sample(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(reference::midranks_quadratic(v));
}
BENCHMARK(BM_MidranksReference)->Arg(256)->Arg(4096);

}  // namespace

BENCHMARK_MAIN();
