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

#ifndef CREQ_EVALUATION_HPP
#define CREQ_EVALUATION_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "creq/classifiers.hpp"
#include "creq/corpus.hpp"
#include "creq/cue_lexicon.hpp"
#include "creq/detector.hpp"
#include "creq/parallel.hpp"

namespace creq {

struct Confusion {
    std::int64_t tp = 0, fp = 0, fn = 0, tn = 0;

    [[nodiscard]] std::int64_t total() const noexcept { return tp + fp + fn + tn; }
    Confusion& operator+=(const Confusion& o);
    bool operator==(const Confusion&) const = default;
};

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double support = 0.0;
    /// The class was never predicted (precision) or never occurs (recall); the metric is reported as 0.
    bool precision_undefined = false;
    bool recall_undefined = false;
};

struct EvaluationReport {
    ClassMetrics causal;
    ClassMetrics not_causal;
    double accuracy = 0.0;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
    std::size_t folds = 1;        ///< reports averaged into this one
    std::size_t repetitions = 1;
    std::uint64_t seed = 0;
    bool pooled = false;          ///< metrics from the summed confusion matrix instead of fold means
    std::optional<Confusion> confusion;
    std::vector<std::string> flags;
};

/// Metrics with each class in turn as the positive one.
EvaluationReport metrics_from_confusion(const Confusion& c);
Confusion confusion_matrix(std::span<const Prediction> predictions, const std::map<std::string, bool>& gold);
/// Every gold id needs exactly one prediction; predictions for other ids are ignored.
EvaluationReport evaluate(std::span<const Prediction> predictions, const std::map<std::string, bool>& gold);
/// Gold causal labels of every labeled sentence.
std::map<std::string, bool> gold_map(const LabeledCorpus& corpus);

/// Arithmetic mean of every metric; flags are merged. Supports are averaged.
EvaluationReport average_reports(std::span<const EvaluationReport> reports);

struct CvOptions {
    std::size_t k = 10;
    std::size_t repetitions = 5;
    std::uint64_t seed = 0;
    bool allow_unbalanced = false;
    bool pooled = false;
    Execution execution = Execution::parallel;
    /// Required for the rule baseline.
    const CueLexicon* lexicon = nullptr;
    /// Required for external specs: predictions keyed by sentence id.
    const std::map<std::string, Prediction>* external = nullptr;
};

struct CvResult {
    EvaluationReport report;
    FoldPlan plan;
    std::vector<EvaluationReport> fold_reports;  ///< [rep * k + fold]
};

/// Repeated stratified k-fold cross-validation. Training data of a fold is
/// taken in fold-plan order, so the result does not depend on corpus order.
CvResult repeated_cv(const LabeledCorpus& corpus, const ClassifierSpec& spec, const CvOptions& options);
/// Same, over a caller-supplied fold plan.
CvResult cross_validate(const LabeledCorpus& corpus, const ClassifierSpec& spec, const FoldPlan& plan,
                        const CvOptions& options);

/// Hyperparameter name to candidate values; "embed" varies the embedding.
using ParamGrid = std::map<std::string, std::vector<std::string>>;

struct GridEntry {
    ClassifierSpec spec;
    EvaluationReport report;
};

struct GridResult {
    ClassifierSpec best;
    std::vector<GridEntry> entries;  ///< in grid enumeration order
    std::string selection = "mean accuracy, then macro F1, then parameter string";
};

/// Every combination of the grid over `base`, all scored on the same fold plan.
std::vector<ClassifierSpec> expand_grid(const ClassifierSpec& base, const ParamGrid& grid);
GridResult grid_search(const ClassifierSpec& base, const ParamGrid& grid, const LabeledCorpus& corpus,
                       const CvOptions& options);

nlohmann::json report_to_json(const EvaluationReport& report);

struct ReportRow {
    std::string approach;
    std::string hyperparameters;
    EvaluationReport report;
};

/// Aligned text table with causal and not-causal recall, precision, F1 and accuracy per approach.
std::string format_report_table(std::span<const ReportRow> rows);
nlohmann::json report_table_json(std::span<const ReportRow> rows);

}  // namespace creq

#endif  // CREQ_EVALUATION_HPP
