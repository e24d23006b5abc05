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

#include "creq/evaluation.hpp"

#include <algorithm>
#include <exception>
#include <set>

#include <fmt/format.h>

#include "creq/error.hpp"
#include "creq/rng.hpp"

namespace creq {

Confusion& Confusion::operator+=(const Confusion& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    tn += o.tn;
    return *this;
}

namespace {

ClassMetrics class_metrics(std::int64_t hit, std::int64_t false_alarm, std::int64_t miss) {
    ClassMetrics m;
    m.support = static_cast<double>(hit + miss);
    if (hit + false_alarm == 0) {
        m.precision_undefined = true;
    } else {
        m.precision = static_cast<double>(hit) / static_cast<double>(hit + false_alarm);
    }
    if (hit + miss == 0) {
        m.recall_undefined = true;
    } else {
        m.recall = static_cast<double>(hit) / static_cast<double>(hit + miss);
    }
    if (m.precision + m.recall > 0) m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    return m;
}

void add_flags(EvaluationReport& r) {
    if (r.causal.precision_undefined) r.flags.emplace_back("causal precision undefined (causal never predicted)");
    if (r.causal.recall_undefined) r.flags.emplace_back("causal recall undefined (no causal sentence)");
    if (r.not_causal.precision_undefined) r.flags.emplace_back("not-causal precision undefined (not-causal never predicted)");
    if (r.not_causal.recall_undefined) r.flags.emplace_back("not-causal recall undefined (no not-causal sentence)");
}

}  // namespace

EvaluationReport metrics_from_confusion(const Confusion& c) {
    if (c.total() <= 0) throw ValidationError("cannot evaluate zero predictions");
    EvaluationReport r;
    r.causal = class_metrics(c.tp, c.fp, c.fn);
    r.not_causal = class_metrics(c.tn, c.fn, c.fp);
    r.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
    r.macro_precision = (r.causal.precision + r.not_causal.precision) / 2.0;
    r.macro_recall = (r.causal.recall + r.not_causal.recall) / 2.0;
    r.macro_f1 = (r.causal.f1 + r.not_causal.f1) / 2.0;
    r.confusion = c;
    add_flags(r);
    return r;
}

Confusion confusion_matrix(std::span<const Prediction> predictions, const std::map<std::string, bool>& gold) {
    std::map<std::string_view, const Prediction*> by_id;
    for (const auto& p : predictions) {
        if (!by_id.emplace(p.sentence_id, &p).second) throw ValidationError("duplicate prediction for '" + p.sentence_id + "'");
    }
    Confusion c;
    for (const auto& [id, truth] : gold) {
        const auto it = by_id.find(id);
        if (it == by_id.end()) throw ValidationError("missing prediction for '" + id + "'");
        const bool predicted = it->second->label;
        if (truth) {
            (predicted ? c.tp : c.fn) += 1;
        } else {
            (predicted ? c.fp : c.tn) += 1;
        }
    }
    return c;
}

EvaluationReport evaluate(std::span<const Prediction> predictions, const std::map<std::string, bool>& gold) {
    return metrics_from_confusion(confusion_matrix(predictions, gold));
}

std::map<std::string, bool> gold_map(const LabeledCorpus& corpus) {
    std::map<std::string, bool> out;
    for (const auto& s : corpus.sentences()) {
        if (const auto g = corpus.gold_causal(s.id)) out.emplace(s.id, *g);
    }
    return out;
}

EvaluationReport average_reports(std::span<const EvaluationReport> reports) {
    if (reports.empty()) throw ValidationError("no reports to average");
    EvaluationReport r;
    const auto n = static_cast<double>(reports.size());
    auto mean_class = [&](auto pick) {
        ClassMetrics m;
        for (const auto& x : reports) {
            const ClassMetrics& c = pick(x);
            m.precision += c.precision;
            m.recall += c.recall;
            m.f1 += c.f1;
            m.support += c.support;
            m.precision_undefined |= c.precision_undefined;
            m.recall_undefined |= c.recall_undefined;
        }
        m.precision /= n;
        m.recall /= n;
        m.f1 /= n;
        m.support /= n;
        return m;
    };
    r.causal = mean_class([](const EvaluationReport& x) -> const ClassMetrics& { return x.causal; });
    r.not_causal = mean_class([](const EvaluationReport& x) -> const ClassMetrics& { return x.not_causal; });
    Confusion total;
    bool all_confusions = true;
    std::set<std::string> flags;
    for (const auto& x : reports) {
        r.accuracy += x.accuracy;
        r.macro_precision += x.macro_precision;
        r.macro_recall += x.macro_recall;
        r.macro_f1 += x.macro_f1;
        if (x.confusion) {
            total += *x.confusion;
        } else {
            all_confusions = false;
        }
        flags.insert(x.flags.begin(), x.flags.end());
    }
    r.accuracy /= n;
    r.macro_precision /= n;
    r.macro_recall /= n;
    r.macro_f1 /= n;
    if (all_confusions) r.confusion = total;
    r.folds = reports.size();
    r.flags.assign(flags.begin(), flags.end());
    return r;
}

CvResult cross_validate(const LabeledCorpus& corpus, const ClassifierSpec& spec, const FoldPlan& plan,
                        const CvOptions& options) {
    std::optional<TextModel> rule;
    if (spec.algorithm == Algorithm::rule_based) {
        if (!options.lexicon) throw ValidationError("the rule baseline needs a cue lexicon");
        rule = TextModel::rule_based(*options.lexicon);
    } else if (spec.algorithm == Algorithm::external) {
        if (!options.external) throw ValidationError("external specs need a predictions file");
    } else if (!is_trainable(spec.algorithm)) {
        (void)make_classifier(spec, 0);  // throws with the reason
    }

    const std::size_t jobs = plan.k * plan.repetitions;
    std::vector<EvaluationReport> reports(jobs);
    std::vector<std::exception_ptr> errors(jobs);
    const auto n = static_cast<std::ptrdiff_t>(jobs);
#pragma omp parallel for schedule(dynamic, 1) if (options.execution == Execution::parallel)
    for (std::ptrdiff_t job = 0; job < n; ++job) {
        try {
            const auto rep = static_cast<std::size_t>(job) / plan.k;
            const auto fold = static_cast<std::size_t>(job) % plan.k;
            std::map<std::string, bool> gold;
            for (const auto& id : plan.test_ids(rep, fold)) {
                if (const auto g = corpus.gold_causal(id)) gold.emplace(id, *g);
            }
            std::vector<Prediction> predictions;
            if (rule) {
                for (const auto& [id, truth] : gold) predictions.push_back(rule->predict(corpus.find(id)->text, id));
            } else if (spec.algorithm == Algorithm::external) {
                for (const auto& [id, truth] : gold) {
                    const auto it = options.external->find(id);
                    if (it == options.external->end()) throw ValidationError("no external prediction for '" + id + "'");
                    predictions.push_back(it->second);
                }
            } else {
                std::vector<std::string> texts;
                std::vector<std::uint8_t> y;
                for (const auto& id : plan.train_ids(rep, fold)) {
                    const auto g = corpus.gold_causal(id);
                    if (!g) continue;
                    texts.push_back(corpus.find(id)->text);
                    y.push_back(*g ? 1 : 0);
                }
                const auto model = TextModel::train(spec, texts, y, derive_seed(options.seed, static_cast<std::uint64_t>(job)));
                for (const auto& [id, truth] : gold) predictions.push_back(model.predict(corpus.find(id)->text, id));
            }
            reports[static_cast<std::size_t>(job)] = evaluate(predictions, gold);
        } catch (...) {
            errors[static_cast<std::size_t>(job)] = std::current_exception();
        }
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    CvResult result;
    result.plan = plan;
    result.fold_reports = reports;
    result.report = average_reports(reports);
    if (options.pooled) {
        auto pooled = metrics_from_confusion(*result.report.confusion);
        pooled.folds = result.report.folds;
        pooled.pooled = true;
        result.report = std::move(pooled);
    }
    result.report.repetitions = plan.repetitions;
    result.report.seed = options.seed;
    return result;
}

CvResult repeated_cv(const LabeledCorpus& corpus, const ClassifierSpec& spec, const CvOptions& options) {
    if (!options.allow_unbalanced) {
        std::size_t pos = 0, neg = 0;
        for (const auto& [id, g] : gold_map(corpus)) (g ? pos : neg) += 1;
        if (pos != neg)
            throw ValidationError(fmt::format(
                "corpus is unbalanced ({} causal, {} not causal); undersample it or allow unbalanced input", pos, neg));
    }
    return cross_validate(corpus, spec, split_kfold(corpus, options.k, options.repetitions, options.seed), options);
}

std::vector<ClassifierSpec> expand_grid(const ClassifierSpec& base, const ParamGrid& grid) {
    if (grid.empty()) throw ValidationError("empty parameter grid");
    std::vector<ClassifierSpec> specs{base};
    for (const auto& [name, values] : grid) {
        if (values.empty()) throw ValidationError("parameter grid entry '" + name + "' has no values");
        std::vector<ClassifierSpec> next;
        for (const auto& s : specs) {
            for (const auto& v : values) {
                ClassifierSpec t = s;
                if (name == "embed" || name == "embedding") {
                    t.embedding = parse_embedding(v);
                } else {
                    if (!hyperparameter_names(base.algorithm).contains(name))
                        throw ValidationError(fmt::format("unknown hyperparameter '{}' for {}", name, to_string(base.algorithm)));
                    t.params[name] = v;
                }
                next.push_back(std::move(t));
            }
        }
        specs = std::move(next);
    }
    return specs;
}

GridResult grid_search(const ClassifierSpec& base, const ParamGrid& grid, const LabeledCorpus& corpus,
                       const CvOptions& options) {
    const auto specs = expand_grid(base, grid);
    const auto plan = split_kfold(corpus, options.k, options.repetitions, options.seed);
    GridResult result;
    for (const auto& s : specs) result.entries.push_back({s, cross_validate(corpus, s, plan, options).report});
    const auto better = [](const GridEntry& a, const GridEntry& b) {
        if (a.report.accuracy != b.report.accuracy) return a.report.accuracy > b.report.accuracy;
        if (a.report.macro_f1 != b.report.macro_f1) return a.report.macro_f1 > b.report.macro_f1;
        return a.spec.params_string() < b.spec.params_string();
    };
    result.best = std::min_element(result.entries.begin(), result.entries.end(), better)->spec;
    return result;
}

nlohmann::json report_to_json(const EvaluationReport& r) {
    auto cls = [](const ClassMetrics& m) {
        return nlohmann::json{{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}, {"support", m.support},
                              {"precision_undefined", m.precision_undefined}, {"recall_undefined", m.recall_undefined}};
    };
    nlohmann::json j = {{"causal", cls(r.causal)},
                        {"not_causal", cls(r.not_causal)},
                        {"accuracy", r.accuracy},
                        {"macro_precision", r.macro_precision},
                        {"macro_recall", r.macro_recall},
                        {"macro_f1", r.macro_f1},
                        {"folds", r.folds},
                        {"repetitions", r.repetitions},
                        {"seed", r.seed},
                        {"aggregation", r.pooled ? "pooled confusion matrix" : "mean of fold scores"},
                        {"support_kind", r.folds > 1 ? "mean per test fold" : "count"},
                        {"flags", r.flags}};
    if (r.confusion) {
        j["confusion"] = {{"tp", r.confusion->tp}, {"fp", r.confusion->fp}, {"fn", r.confusion->fn}, {"tn", r.confusion->tn}};
    }
    return j;
}

std::string format_report_table(std::span<const ReportRow> rows) {
    std::size_t wa = 8, wh = 20;
    for (const auto& r : rows) {
        wa = std::max(wa, r.approach.size());
        wh = std::max(wh, r.hyperparameters.size());
    }
    std::string out = fmt::format("{:<{}}  {:<{}}  {:^22}  {:^22}  {:>8}\n", "", wa, "", wh, "Causal", "Not causal", "");
    out += fmt::format("{:<{}}  {:<{}}  {:>6} {:>6} {:>6}    {:>6} {:>6} {:>6}    {:>8}\n", "Approach", wa,
                       "Best hyperparameters", wh, "Rec", "Prec", "F1", "Rec", "Prec", "F1", "Accuracy");
    for (const auto& r : rows) {
        const auto& e = r.report;
        out += fmt::format("{:<{}}  {:<{}}  {:>6.2f} {:>6.2f} {:>6.2f}    {:>6.2f} {:>6.2f} {:>6.2f}    {:>8.2f}\n",
                           r.approach, wa, r.hyperparameters, wh, e.causal.recall, e.causal.precision, e.causal.f1,
                           e.not_causal.recall, e.not_causal.precision, e.not_causal.f1, e.accuracy);
    }
    if (!rows.empty()) {
        const auto& e = rows.front().report;
        out += fmt::format("Support: causal {:.1f}, not causal {:.1f}{}\n", e.causal.support, e.not_causal.support,
                           e.folds > 1 ? " (mean per test fold)" : "");
    }
    return out;
}

nlohmann::json report_table_json(std::span<const ReportRow> rows) {
    auto j = nlohmann::json::array();
    for (const auto& r : rows) {
        j.push_back({{"approach", r.approach}, {"hyperparameters", r.hyperparameters}, {"report", report_to_json(r.report)}});
    }
    return j;
}

}  // namespace creq
