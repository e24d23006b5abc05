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

#include "creq/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "creq/agreement.hpp"
#include "creq/annotation.hpp"
#include "creq/classifiers.hpp"
#include "creq/corpus.hpp"
#include "creq/cue_lexicon.hpp"
#include "creq/detector.hpp"
#include "creq/domain_counts.hpp"
#include "creq/error.hpp"
#include "creq/evaluation.hpp"
#include "creq/http_api.hpp"
#include "creq/label_store.hpp"
#include "creq/lifecycle.hpp"
#include "creq/manifest.hpp"
#include "creq/prevalence.hpp"

namespace creq {

using nlohmann::json;

namespace {

struct Common {
    std::string out;
    std::string manifest;
    std::string format = "json";
    std::uint64_t seed = 42;
};

struct Run {
    Common common;
    RunManifest manifest;
    std::ostream* out = nullptr;
    std::ostream* err = nullptr;
};

void add_common(CLI::App* sub, Common& c, bool with_seed, bool with_format = true) {
    sub->add_option("--out", c.out, "Output file (default: standard output)");
    sub->add_option("--manifest", c.manifest, "Manifest path (default: <out>.manifest.json)");
    if (with_format) sub->add_option("--format", c.format, "json or text")->check(CLI::IsMember({"json", "text"}));
    if (with_seed) sub->add_option("--seed", c.seed, "Random seed");
}

void write_atomically(const std::filesystem::path& path, const std::string& content) {
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw IoError("cannot write " + tmp);
        f << content;
        if (!f.flush()) throw IoError("write to " + tmp + " failed");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot write " + path.string() + ": " + ec.message());
}

void finish_manifest(Run& run) {
    std::string path = run.common.manifest;
    if (path.empty() && !run.common.out.empty()) path = run.common.out + ".manifest.json";
    if (path.empty()) return;
    run.manifest.created_at = utc_timestamp();
    write_manifest(run.manifest, path);
}

/// Writes the primary artifact to --out (or stdout) and the manifest beside it.
void emit(Run& run, const std::string& content) {
    if (run.common.out.empty()) {
        *run.out << content;
    } else {
        write_atomically(run.common.out, content);
        run.manifest.add_output(run.common.out);
    }
    finish_manifest(run);
}

void emit_report(Run& run, json report, const std::string& text) {
    if (run.common.format == "text") {
        emit(run, text);
        return;
    }
    report["run"] = run_summary_json(run.manifest);
    emit(run, report.dump(2) + "\n");
}

LabeledCorpus read_corpus(Run& run, const std::string& path) {
    auto c = load_corpus(path);
    run.manifest.add_input(path);
    return c;
}

CueLexicon read_lexicon(Run& run, const std::string& path) {
    auto l = load_lexicon(path);
    run.manifest.add_input(path);
    return l;
}

std::string default_lexicon() { return std::string(CREQ_DATA_DIR) + "/cue_lexicon.csv"; }

// ---- detect -----------------------------------------------------------------

struct DetectArgs {
    std::string input, method = "rule", lexicon = default_lexicon(), model, predictions;
};

void cmd_detect(Run& run, const DetectArgs& a) {
    const auto corpus = read_corpus(run, a.input);
    std::vector<Prediction> preds;
    if (a.method == "rule") {
        preds = TextModel::rule_based(read_lexicon(run, a.lexicon)).predict(corpus);
    } else if (a.method == "model") {
        if (a.model.empty()) throw ValidationError("--method model needs --model");
        const auto m = TextModel::load(a.model);
        run.manifest.add_input(a.model);
        preds = m.predict(corpus);
    } else {
        if (a.predictions.empty()) throw ValidationError("--method external needs --predictions");
        preds = load_external_predictions(a.predictions, &corpus);
        run.manifest.add_input(a.predictions);
    }
    std::ostringstream s;
    write_predictions_jsonl(preds, s);
    emit(run, s.str());
}

// ---- agreement --------------------------------------------------------------

struct AgreementArgs {
    std::string corpus, matrices;
};

void cmd_agreement(Run& run, const AgreementArgs& a) {
    if (a.corpus.empty() == a.matrices.empty()) throw ValidationError("give exactly one of --corpus and --matrices");
    AgreementReport report;
    if (!a.corpus.empty()) {
        report = agreement_report(read_corpus(run, a.corpus));
    } else {
        std::ifstream in(a.matrices);
        if (!in) throw IoError("cannot open " + a.matrices);
        report = agreement_report(read_agreement_matrices_csv(in, a.matrices));
        run.manifest.add_input(a.matrices);
    }
    emit_report(run, agreement_report_json(report), agreement_report_text(report));
}

// ---- prevalence -------------------------------------------------------------

struct PrevalenceArgs {
    std::string corpus, counts;
    std::int64_t min_stratum = 100;
    double alpha = 0.05;
    bool no_yates = false;
};

void cmd_prevalence(Run& run, const PrevalenceArgs& a) {
    if (a.corpus.empty() == a.counts.empty()) throw ValidationError("give exactly one of --corpus and --counts");
    DomainCountTable table;
    if (!a.corpus.empty()) {
        table = domain_counts(read_corpus(run, a.corpus));
    } else {
        table = load_domain_counts(a.counts);
        run.manifest.add_input(a.counts);
    }
    OneVsRestOptions o;
    o.min_stratum = a.min_stratum;
    o.alpha = a.alpha;
    o.two_by_two = a.no_yates ? ContinuityCorrection::none : ContinuityCorrection::yates;
    const auto dist = category_distribution(table);
    const auto tests = domain_independence_report(table, o);
    json headline = json::array();
    for (const auto& h : headline_ratios(dist)) {
        headline.push_back({{"name", h.name}, {"numerator", h.numerator}, {"denominator", h.denominator}, {"ratio", h.ratio}});
    }
    json report = {{"distribution", distribution_json(dist)},
                   {"headline", headline},
                   {"tests", category_tests_json(tests, o)},
                   {"warnings", table.warnings}};
    std::string text = distribution_text(dist) + "\n";
    for (const auto& h : headline_ratios(dist)) text += fmt::format("{:<18} {:6.2f}%\n", h.name, 100 * h.ratio);
    text += "\n" + category_tests_text(tests);
    emit_report(run, std::move(report), text);
}

// ---- cue-stats --------------------------------------------------------------

struct CueStatsArgs {
    std::string lexicon = default_lexicon(), corpus;
    double threshold = 0.8;
    bool domains = false;
    std::int64_t min_causal = 100;
    std::size_t top = 5;
};

void cmd_cue_stats(Run& run, const CueStatsArgs& a) {
    auto lexicon = read_lexicon(run, a.lexicon);
    if (a.domains) {
        if (a.corpus.empty()) throw ValidationError("--domains needs --corpus");
        const auto tables = domain_cue_tables(read_corpus(run, a.corpus), lexicon, {a.min_causal, a.top});
        emit_report(run, {{"domains", domain_cue_tables_json(tables)}}, domain_cue_tables_text(tables));
        return;
    }
    if (!a.corpus.empty()) lexicon = recount(lexicon, read_corpus(run, a.corpus));
    emit_report(run, {{"cues", cue_stats_json(lexicon, a.threshold)}}, cue_stats_text(lexicon, a.threshold));
}

// ---- train ------------------------------------------------------------------

struct TrainArgs {
    std::string corpus, algorithm = "nb", params;
    bool undersample = false;
};

void cmd_train(Run& run, const TrainArgs& a) {
    if (run.common.out.empty()) throw ValidationError("train needs --out for the model file");
    auto corpus = read_corpus(run, a.corpus);
    if (a.undersample) corpus = random_undersample(corpus, run.common.seed);
    const auto spec = parse_classifier_spec(a.algorithm, a.params);
    std::vector<std::string> texts, ids;
    for (const auto& s : corpus.sentences()) {
        if (!corpus.gold(s.id)) continue;
        texts.push_back(s.text);
        ids.push_back(s.id);
    }
    const auto labels = gold_labels(corpus, ids);
    const auto model = TextModel::train(spec, texts, labels, run.common.seed);
    run.manifest.seed = run.common.seed;
    emit(run, model.to_json().dump() + "\n");
}

// ---- evaluate ---------------------------------------------------------------

struct EvaluateArgs {
    std::string corpus, method = "rule", params, lexicon = default_lexicon(), predictions, grid;
    std::size_t folds = 10, repetitions = 5;
    bool undersample = false, pooled = false, allow_unbalanced = false, serial = false;
};

ParamGrid read_grid(Run& run, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open grid file " + path);
    run.manifest.add_input(path);
    try {
        return json::parse(in).get<ParamGrid>();
    } catch (const json::exception& e) {
        throw ValidationError(path + ": grid must map names to lists of strings: " + e.what());
    }
}

void cmd_evaluate(Run& run, const EvaluateArgs& a) {
    auto corpus = read_corpus(run, a.corpus);
    if (a.undersample) corpus = random_undersample(corpus, run.common.seed);
    run.manifest.seed = run.common.seed;

    CvOptions o;
    o.k = a.folds;
    o.repetitions = a.repetitions;
    o.seed = run.common.seed;
    o.pooled = a.pooled;
    o.allow_unbalanced = a.allow_unbalanced;
    o.execution = a.serial ? Execution::serial : Execution::parallel;

    CueLexicon lexicon;
    std::map<std::string, Prediction> external;
    const auto spec = parse_classifier_spec(a.method, a.params);
    if (spec.algorithm == Algorithm::rule_based) {
        lexicon = read_lexicon(run, a.lexicon);
        o.lexicon = &lexicon;
    } else if (spec.algorithm == Algorithm::external) {
        if (a.predictions.empty()) throw ValidationError("--method external needs --predictions");
        for (auto& p : load_external_predictions(a.predictions, &corpus)) external.emplace(p.sentence_id, p);
        run.manifest.add_input(a.predictions);
        o.external = &external;
    }

    json report;
    std::vector<ReportRow> rows;
    if (!a.grid.empty()) {
        const auto grid = grid_search(spec, read_grid(run, a.grid), corpus, o);
        json entries = json::array();
        for (const auto& e : grid.entries) {
            entries.push_back({{"hyperparameters", e.spec.params_string()}, {"report", report_to_json(e.report)}});
            rows.push_back({std::string(to_string(e.spec.algorithm)), e.spec.params_string(), e.report});
        }
        report = {{"best", spec_to_json(grid.best)}, {"selection", grid.selection}, {"grid", entries}};
    } else {
        const auto cv = repeated_cv(corpus, spec, o);
        rows.push_back({std::string(to_string(spec.algorithm)), spec.params_string(), cv.report});
        report = {{"spec", spec_to_json(spec)}, {"report", report_to_json(cv.report)}, {"folds", fold_plan_to_json(cv.plan)}};
    }
    report["table"] = report_table_json(rows);
    emit_report(run, std::move(report), format_report_table(rows));
}

// ---- lifecycle --------------------------------------------------------------

struct LifecycleArgs {
    std::string requirements, lexicon = default_lexicon(), model, invalid_author, alternative = "two-sided";
    std::string features_out, violin_out;
    double alpha = 0.05;
    std::size_t exact_limit = 12;
};

void cmd_lifecycle(Run& run, const LifecycleArgs& a) {
    const auto records = load_requirements(a.requirements);
    run.manifest.add_input(a.requirements);
    std::optional<TextModel> detector;
    if (!a.model.empty()) {
        detector = TextModel::load(a.model);
        run.manifest.add_input(a.model);
    } else {
        detector = TextModel::rule_based(read_lexicon(run, a.lexicon));
    }
    PreprocessReport pre;
    const auto kept = preprocess(records, {a.invalid_author}, &pre);
    const auto features = derive_all(kept, *detector);

    SuiteOptions o;
    o.alpha = a.alpha;
    o.mwu.exact_limit = a.exact_limit;
    if (a.alternative == "less") o.mwu.alternative = Alternative::less;
    else if (a.alternative == "greater") o.mwu.alternative = Alternative::greater;
    const auto suite = hypothesis_suite(features, o);

    if (!a.features_out.empty()) {
        std::string s;
        for (const auto& f : features) s += features_to_json(f).dump() + "\n";
        write_atomically(a.features_out, s);
        run.manifest.add_output(a.features_out);
    }
    if (!a.violin_out.empty()) {
        std::ostringstream s;
        write_violin_csv(features, o.bins, s);
        write_atomically(a.violin_out, s.str());
        run.manifest.add_output(a.violin_out);
    }
    json prep = {{"input", pre.input},
                 {"missing_log", pre.missing_log},
                 {"invalid_author", pre.invalid_author},
                 {"single_entry", pre.single_entry},
                 {"kept", pre.kept}};
    const std::string text = fmt::format("records {} | no log {} | invalid author {} | single entry {} | kept {}\n\n",
                                         pre.input, pre.missing_log, pre.invalid_author, pre.single_entry, pre.kept) +
                             format_suite(suite);
    emit_report(run, {{"preprocess", prep}, {"suite", suite_to_json(suite)}}, text);
}

// ---- serve ------------------------------------------------------------------

struct ServeArgs {
    std::string corpus, config, lexicon, store, host = "127.0.0.1", export_path;
    int port = 8080;
};

void cmd_serve(Run& run, const ServeArgs& a) {
    std::string store = a.store;
    if (store.empty()) {
        if (const char* env = std::getenv(kStoreEnvVar)) store = env;
    }
    if (store.empty()) throw ValidationError(std::string("no store directory: set ") + kStoreEnvVar + " or pass --store");

    if (!a.export_path.empty()) {
        // Export reads the existing store without opening it for writing.
        const auto path = std::filesystem::path(store) / "log.jsonl";
        if (!std::filesystem::exists(path)) throw IoError("no annotation log at " + path.string());
        run.manifest.add_input(path);
        run.common.out = a.export_path;
        emit(run, replay_log(path).export_jsonl());
        return;
    }
    if (a.corpus.empty() || a.config.empty()) throw ValidationError("serve needs --corpus and --config");
    auto corpus = read_corpus(run, a.corpus);
    std::ifstream in(a.config);
    if (!in) throw IoError("cannot open " + a.config);
    ServiceConfig cfg;
    try {
        cfg = service_config_from_json(json::parse(in));
    } catch (const json::exception& e) {
        throw ValidationError(a.config + ": " + e.what());
    }
    cfg.store_dir = store;
    cfg.lexicon_path = a.lexicon.empty() ? std::filesystem::path(store) / "cues.csv" : std::filesystem::path(a.lexicon);
    AnnotationService service(std::move(corpus), cfg);
    *run.err << "serving " << kApiPrefix << " on http://" << a.host << ":" << a.port << "\n";
    if (!serve(service, a.host, a.port)) throw IoError(fmt::format("cannot listen on {}:{}", a.host, a.port));
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Causality in requirements: detection, annotation statistics and life-cycle analysis", "creq"};
    app.require_subcommand(1);
    app.set_version_flag("--version", library_versions().at("creq"));

    Run run;
    run.out = &out;
    run.err = &err;
    std::function<void()> action;

    DetectArgs det;
    auto* s = app.add_subcommand("detect", "Label sentences as causal or not");
    s->add_option("--input", det.input, "Corpus (JSONL or CSV)")->required();
    s->add_option("--method", det.method)->check(CLI::IsMember({"rule", "model", "external"}));
    s->add_option("--lexicon", det.lexicon, "Cue lexicon CSV for the rule method");
    s->add_option("--model", det.model, "Model file from `train`");
    s->add_option("--predictions", det.predictions, "External predictions JSONL");
    add_common(s, run.common, false, false);
    s->callback([&] { action = [&] { cmd_detect(run, det); }; });

    AgreementArgs agr;
    s = app.add_subcommand("agreement", "Inter-annotator agreement per category");
    s->add_option("--corpus", agr.corpus, "Corpus with two annotators on overlapping sentences");
    s->add_option("--matrices", agr.matrices, "CSV of 2x2 agreement matrices");
    add_common(s, run.common, false);
    s->callback([&] { action = [&] { cmd_agreement(run, agr); }; });

    PrevalenceArgs prev;
    s = app.add_subcommand("prevalence", "Category distribution and domain independence tests");
    s->add_option("--corpus", prev.corpus);
    s->add_option("--counts", prev.counts, "Per-domain count CSV");
    s->add_option("--min-stratum", prev.min_stratum)->check(CLI::NonNegativeNumber);
    s->add_option("--alpha", prev.alpha)->check(CLI::Range(0.0, 1.0));
    s->add_flag("--no-yates", prev.no_yates, "Skip the continuity correction on 2x2 tables");
    add_common(s, run.common, false);
    s->callback([&] { action = [&] { cmd_prevalence(run, prev); }; });

    CueStatsArgs cue;
    s = app.add_subcommand("cue-stats", "Cue phrase precision and ambiguity");
    s->add_option("--lexicon", cue.lexicon);
    s->add_option("--corpus", cue.corpus, "Recount occurrences on this corpus");
    s->add_option("--threshold", cue.threshold)->check(CLI::Range(0.0, 1.0));
    s->add_flag("--domains", cue.domains, "Per-domain frequency and precision rankings");
    s->add_option("--min-causal", cue.min_causal);
    s->add_option("--top", cue.top);
    add_common(s, run.common, false);
    s->callback([&] { action = [&] { cmd_cue_stats(run, cue); }; });

    TrainArgs tr;
    s = app.add_subcommand("train", "Fit a classifier on the whole corpus");
    s->add_option("--corpus", tr.corpus)->required();
    s->add_option("--algorithm", tr.algorithm, "nb, lr, knn, dt, rf, ab");
    s->add_option("--params", tr.params, "\"name: value, ...\"");
    s->add_flag("--undersample", tr.undersample);
    add_common(s, run.common, true, false);
    s->callback([&] { action = [&] { cmd_train(run, tr); }; });

    EvaluateArgs ev;
    s = app.add_subcommand("evaluate", "Repeated stratified cross-validation");
    s->add_option("--corpus", ev.corpus)->required();
    s->add_option("--method", ev.method, "rule, external or an algorithm name");
    s->add_option("--params", ev.params);
    s->add_option("--lexicon", ev.lexicon);
    s->add_option("--predictions", ev.predictions);
    s->add_option("--grid", ev.grid, "JSON grid of hyperparameter values");
    s->add_option("--folds", ev.folds)->check(CLI::Range(2, 1000));
    s->add_option("--repetitions", ev.repetitions)->check(CLI::Range(1, 1000));
    s->add_flag("--undersample", ev.undersample);
    s->add_flag("--pooled", ev.pooled, "Metrics from the summed confusion matrix");
    s->add_flag("--allow-unbalanced", ev.allow_unbalanced);
    s->add_flag("--serial", ev.serial, "Run folds on one thread");
    add_common(s, run.common, true);
    s->callback([&] { action = [&] { cmd_evaluate(run, ev); }; });

    LifecycleArgs lc;
    s = app.add_subcommand("lifecycle", "Causality against requirement life-cycle features");
    s->add_option("--requirements", lc.requirements)->required();
    s->add_option("--lexicon", lc.lexicon);
    s->add_option("--model", lc.model, "Detector model (default: rule baseline)");
    s->add_option("--invalid-author", lc.invalid_author, "Author whose log entries do not count");
    s->add_option("--alpha", lc.alpha)->check(CLI::Range(0.0, 1.0));
    s->add_option("--alternative", lc.alternative)->check(CLI::IsMember({"two-sided", "less", "greater"}));
    s->add_option("--exact-limit", lc.exact_limit);
    s->add_option("--features-out", lc.features_out);
    s->add_option("--violin-out", lc.violin_out);
    add_common(s, run.common, false);
    s->callback([&] { action = [&] { cmd_lifecycle(run, lc); }; });

    ServeArgs sv;
    s = app.add_subcommand("serve", "Annotation HTTP service");
    s->add_option("--corpus", sv.corpus);
    s->add_option("--config", sv.config, "Assignment config JSON");
    s->add_option("--lexicon", sv.lexicon, "Lexicon file the service extends (default: <store>/cues.csv)");
    s->add_option("--store", sv.store, std::string("Store directory (default: $") + kStoreEnvVar + ")");
    s->add_option("--host", sv.host);
    s->add_option("--port", sv.port)->check(CLI::Range(0, 65535));
    s->add_option("--export", sv.export_path, "Write current labels as JSONL and exit");
    s->add_option("--manifest", run.common.manifest);
    s->callback([&] { action = [&] { cmd_serve(run, sv); }; });

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitValidation;
    }

    run.manifest.command = app.get_subcommands().front()->get_name();
    run.manifest.arguments = args;
    run.manifest.versions = library_versions();
    try {
        action();
        return kExitOk;
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    }
}

}  // namespace creq
