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

#ifndef CREQ_CLASSIFIERS_HPP
#define CREQ_CLASSIFIERS_HPP

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "creq/features.hpp"

namespace creq {

enum class Algorithm {
    rule_based,
    naive_bayes,
    logistic_regression,
    knn,
    decision_tree,
    random_forest,
    ada_boost,
    svm,
    external,
};

std::string_view to_string(Algorithm a);
/// Accepts the enum names and the usual abbreviations (rule, nb, lr, knn, dt, rf, ab, svm).
Algorithm parse_algorithm(std::string_view s);
/// Hyperparameter names accepted for the algorithm ("embed" is handled separately).
const std::set<std::string>& hyperparameter_names(Algorithm a);
bool is_trainable(Algorithm a);

struct ClassifierSpec {
    Algorithm algorithm = Algorithm::rule_based;
    std::map<std::string, std::string> params;
    /// nullopt for the rule baseline and external predictions.
    std::optional<Embedding> embedding;

    [[nodiscard]] std::optional<std::string> param(const std::string& name) const;
    /// "alpha: 1, fit_prior: True, embed: BoW"
    [[nodiscard]] std::string params_string() const;
    bool operator==(const ClassifierSpec&) const = default;
};

/// Parses the "name: value, name: value" notation. An "embed" entry sets the
/// embedding. Unknown names are rejected. Feature-based algorithms default to BoW.
ClassifierSpec parse_classifier_spec(Algorithm algorithm, std::string_view params);
ClassifierSpec parse_classifier_spec(std::string_view algorithm, std::string_view params);

nlohmann::json spec_to_json(const ClassifierSpec& spec);
ClassifierSpec spec_from_json(const nlohmann::json& j);

/// Binary classifier over sparse rows. Label 1 is the causal class.
class Classifier {
public:
    virtual ~Classifier() = default;

    /// Throws ValidationError on misaligned input or single-class labels.
    virtual void fit(const FeatureMatrix& x, std::span<const std::uint8_t> y) = 0;
    /// Probability of the causal class. Requires fit().
    [[nodiscard]] virtual double predict_proba(const SparseRow& row) const = 0;
    /// Label for a score: score >= 0.5 unless the model documents otherwise.
    [[nodiscard]] virtual bool decide(double score) const { return score >= 0.5; }
    [[nodiscard]] virtual Algorithm algorithm() const = 0;
    [[nodiscard]] virtual nlohmann::json to_json() const = 0;

    [[nodiscard]] std::vector<double> predict_proba(const FeatureMatrix& x, Execution exec = Execution::serial) const;
};

/// Throws ValidationError for SVM, external and rule-based specs.
std::unique_ptr<Classifier> make_classifier(const ClassifierSpec& spec, std::uint64_t seed);
std::unique_ptr<Classifier> classifier_from_json(const nlohmann::json& j);

/// Multinomial NB with additive smoothing.
class NaiveBayes final : public Classifier {
public:
    explicit NaiveBayes(double alpha = 1.0, bool fit_prior = true);
    void fit(const FeatureMatrix& x, std::span<const std::uint8_t> y) override;
    [[nodiscard]] double predict_proba(const SparseRow& row) const override;
    /// Both class posteriors; they sum to 1.
    [[nodiscard]] std::array<double, 2> posterior(const SparseRow& row) const;
    [[nodiscard]] Algorithm algorithm() const override { return Algorithm::naive_bayes; }
    [[nodiscard]] nlohmann::json to_json() const override;
    static std::unique_ptr<NaiveBayes> from_json(const nlohmann::json& j);

private:
    double alpha_;
    bool fit_prior_;
    std::array<double, 2> log_prior_{};
    std::array<std::vector<double>, 2> log_prob_;
};

/// Minimizes 0.5*|w|^2 + C * sum log(1 + exp(-y (w.x + b))) with L-BFGS.
/// The intercept is not penalized.
class LogisticRegression final : public Classifier {
public:
    explicit LogisticRegression(double c = 1.0, int max_iter = 500, double tol = 1e-8);
    void fit(const FeatureMatrix& x, std::span<const std::uint8_t> y) override;
    [[nodiscard]] double predict_proba(const SparseRow& row) const override;
    [[nodiscard]] double decision_function(const SparseRow& row) const;
    [[nodiscard]] Algorithm algorithm() const override { return Algorithm::logistic_regression; }
    [[nodiscard]] nlohmann::json to_json() const override;
    static std::unique_ptr<LogisticRegression> from_json(const nlohmann::json& j);

    [[nodiscard]] const std::vector<double>& weights() const noexcept { return w_; }
    [[nodiscard]] double intercept() const noexcept { return b_; }
    void set_parameters(std::vector<double> w, double b);
    /// The regularized objective at (w, b); exposed for checking the optimizer.
    [[nodiscard]] double objective(const FeatureMatrix& x, std::span<const std::uint8_t> y,
                                   std::span<const double> w, double b) const;

private:
    double c_;
    int max_iter_;
    double tol_;
    std::vector<double> w_;
    double b_ = 0.0;
};

enum class KnnWeights { uniform, distance };

/// Brute-force Euclidean neighbors. Equal distances are ordered by training
/// index. The score is the (weighted) causal share of the neighbors and an
/// exact 0.5 is labeled not causal.
class Knn final : public Classifier {
public:
    explicit Knn(std::size_t k = 5, KnnWeights weights = KnnWeights::uniform);
    void fit(const FeatureMatrix& x, std::span<const std::uint8_t> y) override;
    [[nodiscard]] double predict_proba(const SparseRow& row) const override;
    [[nodiscard]] bool decide(double score) const override { return score > 0.5; }
    [[nodiscard]] Algorithm algorithm() const override { return Algorithm::knn; }
    [[nodiscard]] nlohmann::json to_json() const override;
    static std::unique_ptr<Knn> from_json(const nlohmann::json& j);

private:
    void index();

    std::size_t k_;
    KnnWeights weights_;
    std::vector<SparseRow> rows_;
    std::vector<std::uint8_t> y_;
    std::vector<double> norms_;
    std::vector<std::vector<std::pair<std::uint32_t, double>>> postings_;
};

enum class SplitCriterion { gini, entropy };
enum class Splitter { best, random };

struct TreeOptions {
    SplitCriterion criterion = SplitCriterion::gini;
    Splitter splitter = Splitter::best;
    /// Features examined per node; 0 means all.
    std::size_t max_features = 0;
    /// When set, replaces max_features at fit time (see resolve_max_features).
    std::string max_features_rule;
    /// 0 means unlimited.
    std::size_t max_depth = 0;
    std::size_t min_samples_split = 2;
};

/// Resolves "auto", "sqrt", "log2", "none", an integer or a fraction against `dim`.
std::size_t resolve_max_features(std::string_view value, std::size_t dim);

struct TreeNode {
    std::int32_t feature = -1;  ///< -1 marks a leaf
    double threshold = 0.0;     ///< rows with x <= threshold go left
    std::int32_t left = -1;
    std::int32_t right = -1;
    double value = 0.0;         ///< causal probability at the node
};

/// CART over sparse rows with sample weights. Absent features read as 0.
class DecisionTree final : public Classifier {
public:
    explicit DecisionTree(TreeOptions options = {}, std::uint64_t seed = 0);
    void fit(const FeatureMatrix& x, std::span<const std::uint8_t> y) override;
    /// Rows with zero weight are ignored.
    void fit(const FeatureMatrix& x, std::span<const std::uint8_t> y, std::span<const double> weights);
    [[nodiscard]] double predict_proba(const SparseRow& row) const override;
    [[nodiscard]] Algorithm algorithm() const override { return Algorithm::decision_tree; }
    [[nodiscard]] nlohmann::json to_json() const override;
    static std::unique_ptr<DecisionTree> from_json(const nlohmann::json& j);

    [[nodiscard]] const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
    [[nodiscard]] std::size_t depth() const;

private:
    friend class AdaBoost;
    friend class RandomForest;

    TreeOptions options_;
    std::uint64_t seed_;
    std::vector<TreeNode> nodes_;
};

/// Bagged trees; each tree sees a bootstrap sample and samples features per node.
class RandomForest final : public Classifier {
public:
    RandomForest(std::size_t n_estimators, TreeOptions options, bool bootstrap, std::uint64_t seed);
    void fit(const FeatureMatrix& x, std::span<const std::uint8_t> y) override;
    [[nodiscard]] double predict_proba(const SparseRow& row) const override;
    [[nodiscard]] Algorithm algorithm() const override { return Algorithm::random_forest; }
    [[nodiscard]] nlohmann::json to_json() const override;
    static std::unique_ptr<RandomForest> from_json(const nlohmann::json& j);

private:
    std::size_t n_estimators_;
    TreeOptions options_;
    bool bootstrap_;
    std::uint64_t seed_;
    std::vector<DecisionTree> trees_;
};

enum class BoostAlgorithm { samme, samme_r };

/// Boosted depth-1 trees. SAMME.R sums half log-odds of the stump leaves;
/// SAMME sums weighted stump votes.
class AdaBoost final : public Classifier {
public:
    AdaBoost(std::size_t n_estimators = 50, double learning_rate = 1.0, BoostAlgorithm variant = BoostAlgorithm::samme_r);
    void fit(const FeatureMatrix& x, std::span<const std::uint8_t> y) override;
    [[nodiscard]] double predict_proba(const SparseRow& row) const override;
    [[nodiscard]] Algorithm algorithm() const override { return Algorithm::ada_boost; }
    [[nodiscard]] nlohmann::json to_json() const override;
    static std::unique_ptr<AdaBoost> from_json(const nlohmann::json& j);

    [[nodiscard]] std::size_t size() const noexcept { return stumps_.size(); }

private:
    std::size_t n_estimators_;
    double learning_rate_;
    BoostAlgorithm variant_;
    std::vector<DecisionTree> stumps_;
    std::vector<double> stump_weights_;
};

}  // namespace creq

#endif  // CREQ_CLASSIFIERS_HPP
