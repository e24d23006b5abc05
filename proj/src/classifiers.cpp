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

#include "creq/classifiers.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>

#include <ceres/ceres.h>
#include <fmt/format.h>

#include "creq/error.hpp"
#include "creq/rng.hpp"
#include "creq/text.hpp"

namespace creq {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

double parse_number(const std::string& name, const std::string& value) {
    double out = 0.0;
    const auto* end = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc{} || ptr != end || !std::isfinite(out))
        throw ValidationError(fmt::format("hyperparameter {}: '{}' is not a number", name, value));
    return out;
}

std::size_t parse_count(const std::string& name, const std::string& value, std::size_t min = 1) {
    const double v = parse_number(name, value);
    if (v != std::floor(v) || v < static_cast<double>(min))
        throw ValidationError(fmt::format("hyperparameter {}: '{}' must be an integer >= {}", name, value, min));
    return static_cast<std::size_t>(v);
}

bool parse_flag(const std::string& name, const std::string& value) {
    const auto v = text::to_lower(value);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ValidationError(fmt::format("hyperparameter {}: '{}' is not a boolean", name, value));
}

std::string get_or(const ClassifierSpec& spec, const std::string& name, std::string fallback) {
    auto v = spec.param(name);
    return v ? *v : std::move(fallback);
}

void check_training_input(const FeatureMatrix& x, std::span<const std::uint8_t> y) {
    if (x.rows.size() != y.size())
        throw ValidationError(fmt::format("{} feature rows but {} labels", x.rows.size(), y.size()));
    if (y.empty()) throw ValidationError("no training rows");
    std::size_t pos = 0;
    for (const auto v : y) {
        if (v > 1) throw ValidationError("labels must be 0 or 1");
        pos += v;
    }
    if (pos == 0 || pos == y.size()) throw ValidationError("training labels contain a single class");
}

double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double softplus(double t) { return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t))); }

std::vector<SparseRow> rows_from_json(const nlohmann::json& j) {
    std::vector<SparseRow> rows;
    for (const auto& r : j) rows.push_back({r.at(0).get<std::vector<std::uint32_t>>(), r.at(1).get<std::vector<double>>()});
    return rows;
}

nlohmann::json rows_to_json(const std::vector<SparseRow>& rows) {
    auto j = nlohmann::json::array();
    for (const auto& r : rows) j.push_back({r.index, r.value});
    return j;
}

template <typename F>
auto guarded(const char* what, F&& f) {
    try {
        return f();
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(fmt::format("malformed {} model: {}", what, e.what()));
    }
}

}  // namespace

std::string_view to_string(Algorithm a) {
    switch (a) {
        case Algorithm::rule_based: return "rule_based";
        case Algorithm::naive_bayes: return "naive_bayes";
        case Algorithm::logistic_regression: return "logistic_regression";
        case Algorithm::knn: return "knn";
        case Algorithm::decision_tree: return "decision_tree";
        case Algorithm::random_forest: return "random_forest";
        case Algorithm::ada_boost: return "ada_boost";
        case Algorithm::svm: return "svm";
        case Algorithm::external: return "external";
    }
    return "?";
}

Algorithm parse_algorithm(std::string_view s) {
    std::string k;
    for (const char c : text::to_lower(text::trim(s))) k.push_back(c == '-' || c == ' ' ? '_' : c);
    static const std::map<std::string, Algorithm> names = {
        {"rule_based", Algorithm::rule_based}, {"rule", Algorithm::rule_based}, {"rules", Algorithm::rule_based},
        {"naive_bayes", Algorithm::naive_bayes}, {"nb", Algorithm::naive_bayes},
        {"logistic_regression", Algorithm::logistic_regression}, {"lr", Algorithm::logistic_regression},
        {"knn", Algorithm::knn}, {"k_nearest_neighbor", Algorithm::knn},
        {"decision_tree", Algorithm::decision_tree}, {"dt", Algorithm::decision_tree},
        {"random_forest", Algorithm::random_forest}, {"rf", Algorithm::random_forest},
        {"ada_boost", Algorithm::ada_boost}, {"adaboost", Algorithm::ada_boost}, {"ab", Algorithm::ada_boost},
        {"svm", Algorithm::svm}, {"external", Algorithm::external},
    };
    const auto it = names.find(k);
    if (it == names.end()) throw ValidationError("unknown algorithm '" + std::string(s) + "'");
    return it->second;
}

const std::set<std::string>& hyperparameter_names(Algorithm a) {
    static const std::map<Algorithm, std::set<std::string>> names = {
        {Algorithm::rule_based, {}},
        {Algorithm::naive_bayes, {"alpha", "fit_prior"}},
        {Algorithm::logistic_regression, {"C", "solver", "max_iter", "tol", "penalty"}},
        {Algorithm::knn, {"n_neighbors", "weights", "algorithm", "leaf_size"}},
        {Algorithm::decision_tree, {"criterion", "max_features", "splitter", "max_depth", "min_samples_split"}},
        {Algorithm::random_forest,
         {"criterion", "max_features", "n_estimators", "max_depth", "min_samples_split", "bootstrap"}},
        {Algorithm::ada_boost, {"algorithm", "n_estimators", "learning_rate"}},
        {Algorithm::svm, {"C", "gamma", "kernel"}},
        {Algorithm::external, {}},
    };
    return names.at(a);
}

bool is_trainable(Algorithm a) {
    return a != Algorithm::svm && a != Algorithm::external && a != Algorithm::rule_based;
}

std::optional<std::string> ClassifierSpec::param(const std::string& name) const {
    const auto it = params.find(name);
    if (it == params.end()) return std::nullopt;
    return it->second;
}

std::string ClassifierSpec::params_string() const {
    std::string out;
    for (const auto& [k, v] : params) {
        if (!out.empty()) out += ", ";
        out += k + ": " + v;
    }
    if (embedding) {
        if (!out.empty()) out += ", ";
        out += "embed: " + std::string(to_string(*embedding));
    }
    return out;
}

ClassifierSpec parse_classifier_spec(Algorithm algorithm, std::string_view params) {
    ClassifierSpec spec;
    spec.algorithm = algorithm;
    const auto& allowed = hyperparameter_names(algorithm);
    std::size_t start = 0;
    while (start <= params.size()) {
        auto end = params.find(',', start);
        if (end == std::string_view::npos) end = params.size();
        const auto item = text::trim(params.substr(start, end - start));
        start = end + 1;
        if (item.empty()) {
            if (end == params.size()) break;
            continue;
        }
        const auto colon = item.find(':');
        if (colon == std::string_view::npos) throw ValidationError(fmt::format("expected 'name: value', got '{}'", item));
        const std::string name(text::trim(item.substr(0, colon)));
        const std::string value(text::trim(item.substr(colon + 1)));
        if (name.empty() || value.empty()) throw ValidationError(fmt::format("expected 'name: value', got '{}'", item));
        if (name == "embed" || name == "embedding") {
            if (algorithm == Algorithm::rule_based || algorithm == Algorithm::external)
                throw ValidationError(fmt::format("{} takes no embedding", to_string(algorithm)));
            spec.embedding = parse_embedding(value);
            continue;
        }
        if (!allowed.contains(name))
            throw ValidationError(fmt::format("unknown hyperparameter '{}' for {}", name, to_string(algorithm)));
        if (!spec.params.emplace(name, value).second) throw ValidationError("hyperparameter given twice: " + name);
    }
    if (!spec.embedding && algorithm != Algorithm::rule_based && algorithm != Algorithm::external)
        spec.embedding = Embedding::bow;
    return spec;
}

ClassifierSpec parse_classifier_spec(std::string_view algorithm, std::string_view params) {
    return parse_classifier_spec(parse_algorithm(algorithm), params);
}

nlohmann::json spec_to_json(const ClassifierSpec& spec) {
    nlohmann::json j = {{"algorithm", to_string(spec.algorithm)}, {"params", spec.params}};
    j["embedding"] = spec.embedding ? nlohmann::json(to_string(*spec.embedding)) : nlohmann::json(nullptr);
    return j;
}

ClassifierSpec spec_from_json(const nlohmann::json& j) {
    return guarded("spec", [&] {
        std::string params;
        for (const auto& [k, v] : j.at("params").items()) {
            if (!params.empty()) params += ", ";
            params += k + ": " + v.get<std::string>();
        }
        if (j.contains("embedding") && !j["embedding"].is_null()) {
            if (!params.empty()) params += ", ";
            params += "embed: " + j["embedding"].get<std::string>();
        }
        return parse_classifier_spec(j.at("algorithm").get<std::string>(), params);
    });
}

std::vector<double> Classifier::predict_proba(const FeatureMatrix& x, Execution exec) const {
    std::vector<double> out(x.rows.size());
    const auto n = static_cast<std::ptrdiff_t>(x.rows.size());
#pragma omp parallel for schedule(static) if (exec == Execution::parallel)
    for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = predict_proba(x.rows[i]);
    return out;
}

// ---------------------------------------------------------------- naive bayes

NaiveBayes::NaiveBayes(double alpha, bool fit_prior) : alpha_(alpha), fit_prior_(fit_prior) {
    if (!(alpha >= 0.0)) throw ValidationError("alpha must be >= 0");
}

void NaiveBayes::fit(const FeatureMatrix& x, std::span<const std::uint8_t> y) {
    check_training_input(x, y);
    const double alpha = std::max(alpha_, 1e-10);
    std::array<std::vector<double>, 2> counts{std::vector<double>(x.dim, 0.0), std::vector<double>(x.dim, 0.0)};
    std::array<double, 2> docs{};
    for (std::size_t i = 0; i < y.size(); ++i) {
        docs[y[i]] += 1.0;
        const auto& r = x.rows[i];
        for (std::size_t k = 0; k < r.nnz(); ++k) {
            if (r.value[k] < 0) throw ValidationError("naive Bayes needs non-negative features");
            counts[y[i]][r.index[k]] += r.value[k];
        }
    }
    const double n = docs[0] + docs[1];
    for (int c = 0; c < 2; ++c) {
        log_prior_[c] = fit_prior_ ? std::log(docs[c] / n) : std::log(0.5);
        const double total = std::accumulate(counts[c].begin(), counts[c].end(), 0.0) + alpha * static_cast<double>(x.dim);
        log_prob_[c].resize(x.dim);
        for (std::size_t f = 0; f < x.dim; ++f) log_prob_[c][f] = std::log((counts[c][f] + alpha) / total);
    }
}

std::array<double, 2> NaiveBayes::posterior(const SparseRow& row) const {
    if (log_prob_[0].empty()) throw ValidationError("model is not trained");
    std::array<double, 2> joint = log_prior_;
    for (std::size_t k = 0; k < row.nnz(); ++k) {
        if (row.index[k] >= log_prob_[0].size()) throw ValidationError("feature index outside the model's vocabulary");
        for (int c = 0; c < 2; ++c) joint[c] += row.value[k] * log_prob_[c][row.index[k]];
    }
    const double m = std::max(joint[0], joint[1]);
    const double lse = m + std::log(std::exp(joint[0] - m) + std::exp(joint[1] - m));
    const double p1 = std::exp(joint[1] - lse);
    return {1.0 - p1, p1};
}

double NaiveBayes::predict_proba(const SparseRow& row) const { return posterior(row)[1]; }

nlohmann::json NaiveBayes::to_json() const {
    return {{"algorithm", to_string(algorithm())}, {"alpha", alpha_}, {"fit_prior", fit_prior_},
            {"log_prior", log_prior_}, {"log_prob", log_prob_}};
}

std::unique_ptr<NaiveBayes> NaiveBayes::from_json(const nlohmann::json& j) {
    return guarded("naive Bayes", [&] {
        auto m = std::make_unique<NaiveBayes>(j.at("alpha").get<double>(), j.at("fit_prior").get<bool>());
        m->log_prior_ = j.at("log_prior").get<std::array<double, 2>>();
        m->log_prob_ = j.at("log_prob").get<std::array<std::vector<double>, 2>>();
        if (m->log_prob_[0].size() != m->log_prob_[1].size()) throw ValidationError("naive Bayes class tables differ in size");
        return m;
    });
}

// -------------------------------------------------------- logistic regression

namespace {

class LogLoss final : public ceres::FirstOrderFunction {
public:
    LogLoss(const FeatureMatrix& x, std::span<const std::uint8_t> y, double c) : x_(x), y_(y), c_(c) {}

    bool Evaluate(const double* p, double* cost, double* gradient) const override {
        const std::size_t d = x_.dim;
        double f = 0.0;
        for (std::size_t k = 0; k < d; ++k) f += 0.5 * p[k] * p[k];
        if (gradient) {
            std::copy(p, p + d, gradient);
            gradient[d] = 0.0;
        }
        for (std::size_t i = 0; i < y_.size(); ++i) {
            const auto& r = x_.rows[i];
            double z = p[d];
            for (std::size_t k = 0; k < r.nnz(); ++k) z += p[r.index[k]] * r.value[k];
            const double s = y_[i] ? 1.0 : -1.0;
            f += c_ * softplus(-s * z);
            if (gradient) {
                const double g = -c_ * s * sigmoid(-s * z);
                for (std::size_t k = 0; k < r.nnz(); ++k) gradient[r.index[k]] += g * r.value[k];
                gradient[d] += g;
            }
        }
        *cost = f;
        return true;
    }

    int NumParameters() const override { return static_cast<int>(x_.dim + 1); }

private:
    const FeatureMatrix& x_;
    std::span<const std::uint8_t> y_;
    double c_;
};

}  // namespace

LogisticRegression::LogisticRegression(double c, int max_iter, double tol) : c_(c), max_iter_(max_iter), tol_(tol) {
    if (!(c > 0.0)) throw ValidationError("C must be > 0");
    if (max_iter < 1) throw ValidationError("max_iter must be >= 1");
    if (!(tol > 0.0)) throw ValidationError("tol must be > 0");
}

void LogisticRegression::fit(const FeatureMatrix& x, std::span<const std::uint8_t> y) {
    check_training_input(x, y);
    std::vector<double> p(x.dim + 1, 0.0);
    ceres::GradientProblem problem(new LogLoss(x, y, c_));
    ceres::GradientProblemSolver::Options options;
    options.line_search_direction_type = ceres::LBFGS;
    options.max_num_iterations = max_iter_;
    options.gradient_tolerance = tol_;
    options.function_tolerance = 1e-15;
    options.parameter_tolerance = 1e-15;
    options.logging_type = ceres::SILENT;
    options.minimizer_progress_to_stdout = false;
    ceres::GradientProblemSolver::Summary summary;
    ceres::Solve(options, problem, p.data(), &summary);
    if (!summary.IsSolutionUsable()) throw ValidationError("logistic regression failed: " + summary.message);
    b_ = p.back();
    p.pop_back();
    w_ = std::move(p);
}

void LogisticRegression::set_parameters(std::vector<double> w, double b) {
    w_ = std::move(w);
    b_ = b;
}

double LogisticRegression::objective(const FeatureMatrix& x, std::span<const std::uint8_t> y, std::span<const double> w,
                                     double b) const {
    if (w.size() != x.dim) throw ValidationError("weight vector does not match the feature dimension");
    std::vector<double> p(w.begin(), w.end());
    p.push_back(b);
    double cost = 0.0;
    LogLoss(x, y, c_).Evaluate(p.data(), &cost, nullptr);
    return cost;
}

double LogisticRegression::decision_function(const SparseRow& row) const {
    if (w_.empty()) throw ValidationError("model is not trained");
    double z = b_;
    for (std::size_t k = 0; k < row.nnz(); ++k) {
        if (row.index[k] >= w_.size()) throw ValidationError("feature index outside the model's vocabulary");
        z += w_[row.index[k]] * row.value[k];
    }
    return z;
}

double LogisticRegression::predict_proba(const SparseRow& row) const { return sigmoid(decision_function(row)); }

nlohmann::json LogisticRegression::to_json() const {
    return {{"algorithm", to_string(algorithm())}, {"C", c_}, {"max_iter", max_iter_}, {"tol", tol_},
            {"weights", w_}, {"intercept", b_}};
}

std::unique_ptr<LogisticRegression> LogisticRegression::from_json(const nlohmann::json& j) {
    return guarded("logistic regression", [&] {
        auto m = std::make_unique<LogisticRegression>(j.at("C").get<double>(), j.at("max_iter").get<int>(),
                                                      j.at("tol").get<double>());
        m->set_parameters(j.at("weights").get<std::vector<double>>(), j.at("intercept").get<double>());
        return m;
    });
}

// ------------------------------------------------------------------------ knn

Knn::Knn(std::size_t k, KnnWeights weights) : k_(k), weights_(weights) {
    if (k == 0) throw ValidationError("n_neighbors must be >= 1");
}

void Knn::fit(const FeatureMatrix& x, std::span<const std::uint8_t> y) {
    check_training_input(x, y);
    rows_ = x.rows;
    y_.assign(y.begin(), y.end());
    index();
}

void Knn::index() {
    norms_.resize(rows_.size());
    std::uint32_t dim = 0;
    for (const auto& r : rows_) {
        if (r.nnz()) dim = std::max(dim, r.index.back() + 1);
    }
    postings_.assign(dim, {});
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        norms_[i] = rows_[i].squared_norm();
        for (std::size_t k = 0; k < rows_[i].nnz(); ++k)
            postings_[rows_[i].index[k]].emplace_back(static_cast<std::uint32_t>(i), rows_[i].value[k]);
    }
}

double Knn::predict_proba(const SparseRow& row) const {
    if (rows_.empty()) throw ValidationError("model is not trained");
    const std::size_t n = rows_.size();
    std::vector<double> dot(n, 0.0);
    for (std::size_t k = 0; k < row.nnz(); ++k) {
        if (row.index[k] >= postings_.size()) continue;
        for (const auto& [i, v] : postings_[row.index[k]]) dot[i] += v * row.value[k];
    }
    const double q = row.squared_norm();
    std::vector<std::pair<double, std::uint32_t>> d(n);
    for (std::size_t i = 0; i < n; ++i) {
        double d2 = q + norms_[i] - 2.0 * dot[i];
        if (d2 < 1e-12 * std::max(1.0, q + norms_[i])) d2 = 0.0;
        d[i] = {d2, static_cast<std::uint32_t>(i)};
    }
    const std::size_t k = std::min(k_, n);
    std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k), d.end());
    double pos = 0.0;
    double total = 0.0;
    if (weights_ == KnnWeights::distance && d[0].first == 0.0) {
        for (std::size_t i = 0; i < k && d[i].first == 0.0; ++i) {
            total += 1.0;
            pos += y_[d[i].second];
        }
    } else {
        for (std::size_t i = 0; i < k; ++i) {
            const double w = weights_ == KnnWeights::distance ? 1.0 / std::sqrt(d[i].first) : 1.0;
            total += w;
            pos += w * y_[d[i].second];
        }
    }
    return pos / total;
}

nlohmann::json Knn::to_json() const {
    return {{"algorithm", to_string(algorithm())},
            {"n_neighbors", k_},
            {"weights", weights_ == KnnWeights::distance ? "distance" : "uniform"},
            {"rows", rows_to_json(rows_)},
            {"labels", y_}};
}

std::unique_ptr<Knn> Knn::from_json(const nlohmann::json& j) {
    return guarded("knn", [&] {
        const auto w = j.at("weights").get<std::string>();
        auto m = std::make_unique<Knn>(j.at("n_neighbors").get<std::size_t>(),
                                       w == "distance" ? KnnWeights::distance : KnnWeights::uniform);
        m->rows_ = rows_from_json(j.at("rows"));
        m->y_ = j.at("labels").get<std::vector<std::uint8_t>>();
        if (m->rows_.size() != m->y_.size()) throw ValidationError("knn rows and labels differ in length");
        m->index();
        return m;
    });
}

// ---------------------------------------------------------------------- trees

std::size_t resolve_max_features(std::string_view value, std::size_t dim) {
    const auto v = text::to_lower(text::trim(value));
    const double d = static_cast<double>(std::max<std::size_t>(dim, 1));
    if (v == "auto" || v == "sqrt") return std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(d)));
    if (v == "log2") return std::max<std::size_t>(1, static_cast<std::size_t>(std::log2(d)));
    if (v == "none" || v.empty()) return 0;
    const double x = parse_number("max_features", v);
    if (v.find('.') != std::string::npos) {
        if (!(x > 0.0 && x <= 1.0)) throw ValidationError("max_features fraction must be in (0, 1]");
        return std::max<std::size_t>(1, static_cast<std::size_t>(x * d));
    }
    return parse_count("max_features", v);
}

namespace {

struct Entry {
    std::uint32_t feature;
    double value;
    std::uint32_t row;
};

void sort_entries(std::vector<Entry>& e) {
    std::sort(e.begin(), e.end(), [](const Entry& a, const Entry& b) {
        if (a.feature != b.feature) return a.feature < b.feature;
        if (a.value != b.value) return a.value < b.value;
        return a.row < b.row;
    });
}

double impurity(SplitCriterion c, double pos, double neg) {
    const double t = pos + neg;
    if (t <= 0.0) return 0.0;
    const double p = pos / t;
    const double q = neg / t;
    if (c == SplitCriterion::gini) return 1.0 - p * p - q * q;
    double h = 0.0;
    if (p > 0) h -= p * std::log2(p);
    if (q > 0) h -= q * std::log2(q);
    return h;
}

struct Split {
    std::int32_t feature = -1;
    double threshold = 0.0;
    double score = std::numeric_limits<double>::infinity();
};

/// Grows a tree breadth-unaware (depth-first, left before right).
class TreeBuilder {
public:
    TreeBuilder(const FeatureMatrix& x, std::span<const std::uint8_t> y, std::span<const double> w,
                const TreeOptions& options, Rng& rng)
        : x_(x), y_(y), w_(w), opt_(options), rng_(rng) {}

    std::vector<TreeNode> build(const std::vector<Entry>* root_entries) {
        std::vector<std::uint32_t> root;
        for (std::size_t i = 0; i < y_.size(); ++i) {
            if (w_[i] > 0) root.push_back(static_cast<std::uint32_t>(i));
        }
        if (root.empty()) throw ValidationError("no training rows with positive weight");
        struct Work {
            std::int32_t node;
            std::vector<std::uint32_t> rows;
            std::size_t depth;
        };
        std::vector<TreeNode> nodes(1);
        std::vector<Work> stack;
        stack.push_back({0, std::move(root), 0});
        bool first = true;
        while (!stack.empty()) {
            Work work = std::move(stack.back());
            stack.pop_back();
            double pos = 0.0, neg = 0.0;
            for (const auto r : work.rows) (y_[r] ? pos : neg) += w_[r];
            nodes[work.node].value = pos / (pos + neg);
            const bool use_cache = first && root_entries;
            first = false;
            if (pos == 0.0 || neg == 0.0 || work.rows.size() < opt_.min_samples_split ||
                (opt_.max_depth && work.depth >= opt_.max_depth))
                continue;
            const Split s = best_split(work.rows, pos, neg, use_cache ? root_entries : nullptr);
            if (s.feature < 0) continue;
            std::vector<std::uint32_t> left, right;
            for (const auto r : work.rows) {
                (x_.rows[r].at(static_cast<std::uint32_t>(s.feature)) <= s.threshold ? left : right).push_back(r);
            }
            const auto l = static_cast<std::int32_t>(nodes.size());
            nodes.resize(nodes.size() + 2);
            nodes[work.node].feature = s.feature;
            nodes[work.node].threshold = s.threshold;
            nodes[work.node].left = l;
            nodes[work.node].right = l + 1;
            stack.push_back({l + 1, std::move(right), work.depth + 1});
            stack.push_back({l, std::move(left), work.depth + 1});
        }
        return nodes;
    }

private:
    Split best_split(const std::vector<std::uint32_t>& rows, double pos, double neg, const std::vector<Entry>* cached) {
        std::vector<Entry> local;
        if (!cached) {
            for (const auto r : rows) {
                const auto& row = x_.rows[r];
                for (std::size_t k = 0; k < row.nnz(); ++k) local.push_back({row.index[k], row.value[k], r});
            }
            sort_entries(local);
        }
        const auto& e = cached ? *cached : local;

        // Feature groups that are not constant inside the node.
        struct Group {
            std::size_t begin, end;
        };
        std::vector<Group> groups;
        for (std::size_t i = 0; i < e.size();) {
            std::size_t j = i;
            while (j < e.size() && e[j].feature == e[i].feature) ++j;
            const bool all_present = j - i == rows.size();
            if (!(all_present && e[i].value == e[j - 1].value)) groups.push_back({i, j});
            i = j;
        }
        if (groups.empty()) return {};
        std::size_t k = opt_.max_features == 0 ? groups.size() : std::min(opt_.max_features, groups.size());
        if (k < groups.size()) {
            for (std::size_t i = 0; i < k; ++i) {
                const auto j = i + static_cast<std::size_t>(rng_.below(groups.size() - i));
                std::swap(groups[i], groups[j]);
            }
            groups.resize(k);
            std::sort(groups.begin(), groups.end(), [](const Group& a, const Group& b) { return a.begin < b.begin; });
        }

        const double total = pos + neg;
        Split best;
        std::vector<std::pair<double, std::uint32_t>> items;
        for (const auto& g : groups) {
            // Absent rows carry value 0; merge them into the sorted sweep.
            double zpos = pos, zneg = neg;
            items.clear();
            for (std::size_t i = g.begin; i < g.end; ++i) {
                const auto r = e[i].row;
                (y_[r] ? zpos : zneg) -= w_[r];
                items.emplace_back(e[i].value, r);
            }
            const std::uint32_t feature = e[g.begin].feature;
            const bool has_zero_block = g.end - g.begin < rows.size();
            const double lo = has_zero_block ? std::min(0.0, items.front().first) : items.front().first;
            const double hi = has_zero_block ? std::max(0.0, items.back().first) : items.back().first;

            if (opt_.splitter == Splitter::random) {
                double t = rng_.uniform(lo, hi);
                if (t >= hi) t = lo;
                double lp = 0.0, ln = 0.0;
                if (has_zero_block && 0.0 <= t) lp += zpos, ln += zneg;
                for (const auto& [v, r] : items) {
                    if (v <= t) (y_[r] ? lp : ln) += w_[r];
                }
                const double rp = pos - lp, rn = neg - ln;
                const double score = ((lp + ln) * impurity(opt_.criterion, lp, ln) +
                                      (rp + rn) * impurity(opt_.criterion, rp, rn)) / total;
                if (score < best.score) best = {static_cast<std::int32_t>(feature), t, score};
                continue;
            }

            double lp = 0.0, ln = 0.0;
            bool zero_done = !has_zero_block;
            std::size_t i = 0;
            auto consider = [&](double left_value, double right_value) {
                const double rp = pos - lp, rn = neg - ln;
                const double score = ((lp + ln) * impurity(opt_.criterion, lp, ln) +
                                      (rp + rn) * impurity(opt_.criterion, rp, rn)) / total;
                double t = left_value + (right_value - left_value) / 2.0;
                if (t >= right_value) t = left_value;
                if (score < best.score) best = {static_cast<std::int32_t>(feature), t, score};
            };
            // Sweep distinct values in ascending order, the zero block included.
            for (;;) {
                double v;
                if (!zero_done && (i == items.size() || 0.0 <= items[i].first)) {
                    v = 0.0;
                    lp += zpos;
                    ln += zneg;
                    zero_done = true;
                    while (i < items.size() && items[i].first == 0.0) {
                        (y_[items[i].second] ? lp : ln) += w_[items[i].second];
                        ++i;
                    }
                } else if (i < items.size()) {
                    v = items[i].first;
                    while (i < items.size() && items[i].first == v) {
                        (y_[items[i].second] ? lp : ln) += w_[items[i].second];
                        ++i;
                    }
                } else {
                    break;
                }
                double next;
                if (!zero_done && (i == items.size() || 0.0 <= items[i].first)) {
                    next = 0.0;
                } else if (i < items.size()) {
                    next = items[i].first;
                } else {
                    break;
                }
                consider(v, next);
            }
        }
        return best;
    }

    const FeatureMatrix& x_;
    std::span<const std::uint8_t> y_;
    std::span<const double> w_;
    const TreeOptions& opt_;
    Rng& rng_;
};

std::vector<Entry> all_entries(const FeatureMatrix& x) {
    std::vector<Entry> e;
    for (std::size_t r = 0; r < x.rows.size(); ++r) {
        const auto& row = x.rows[r];
        for (std::size_t k = 0; k < row.nnz(); ++k) e.push_back({row.index[k], row.value[k], static_cast<std::uint32_t>(r)});
    }
    sort_entries(e);
    return e;
}

std::string_view to_string(SplitCriterion c) { return c == SplitCriterion::gini ? "gini" : "entropy"; }
std::string_view to_string(Splitter s) { return s == Splitter::best ? "best" : "random"; }

SplitCriterion parse_criterion(const std::string& s) {
    const auto v = text::to_lower(s);
    if (v == "gini") return SplitCriterion::gini;
    if (v == "entropy" || v == "log_loss") return SplitCriterion::entropy;
    throw ValidationError("criterion must be gini or entropy, got '" + s + "'");
}

Splitter parse_splitter(const std::string& s) {
    const auto v = text::to_lower(s);
    if (v == "best") return Splitter::best;
    if (v == "random") return Splitter::random;
    throw ValidationError("splitter must be best or random, got '" + s + "'");
}

nlohmann::json options_to_json(const TreeOptions& o) {
    return {{"criterion", to_string(o.criterion)}, {"splitter", to_string(o.splitter)},
            {"max_features", o.max_features}, {"max_features_rule", o.max_features_rule},
            {"max_depth", o.max_depth}, {"min_samples_split", o.min_samples_split}};
}

TreeOptions options_from_json(const nlohmann::json& j) {
    TreeOptions o;
    o.criterion = parse_criterion(j.at("criterion").get<std::string>());
    o.splitter = parse_splitter(j.at("splitter").get<std::string>());
    o.max_features = j.at("max_features").get<std::size_t>();
    o.max_features_rule = j.value("max_features_rule", std::string{});
    o.max_depth = j.at("max_depth").get<std::size_t>();
    o.min_samples_split = j.at("min_samples_split").get<std::size_t>();
    return o;
}

nlohmann::json nodes_to_json(const std::vector<TreeNode>& nodes) {
    auto j = nlohmann::json::array();
    for (const auto& n : nodes) j.push_back({n.feature, n.threshold, n.left, n.right, n.value});
    return j;
}

std::vector<TreeNode> nodes_from_json(const nlohmann::json& j) {
    std::vector<TreeNode> nodes;
    for (const auto& n : j) {
        nodes.push_back({n.at(0).get<std::int32_t>(), n.at(1).get<double>(), n.at(2).get<std::int32_t>(),
                         n.at(3).get<std::int32_t>(), n.at(4).get<double>()});
    }
    const auto size = static_cast<std::int32_t>(nodes.size());
    for (const auto& n : nodes) {
        if (n.feature >= 0 && (n.left <= 0 || n.left >= size || n.right <= 0 || n.right >= size))
            throw ValidationError("tree node points outside the tree");
    }
    if (nodes.empty()) throw ValidationError("empty tree");
    return nodes;
}

}  // namespace

DecisionTree::DecisionTree(TreeOptions options, std::uint64_t seed) : options_(options), seed_(seed) {
    if (options_.min_samples_split < 2) throw ValidationError("min_samples_split must be >= 2");
}

void DecisionTree::fit(const FeatureMatrix& x, std::span<const std::uint8_t> y) {
    check_training_input(x, y);
    const std::vector<double> w(y.size(), 1.0);
    fit(x, y, w);
}

void DecisionTree::fit(const FeatureMatrix& x, std::span<const std::uint8_t> y, std::span<const double> weights) {
    if (x.rows.size() != y.size() || y.size() != weights.size())
        throw ValidationError("feature rows, labels and weights differ in length");
    TreeOptions o = options_;
    if (!o.max_features_rule.empty()) o.max_features = resolve_max_features(o.max_features_rule, x.dim);
    Rng rng(seed_);
    nodes_ = TreeBuilder(x, y, weights, o, rng).build(nullptr);
}

double DecisionTree::predict_proba(const SparseRow& row) const {
    if (nodes_.empty()) throw ValidationError("model is not trained");
    std::size_t i = 0;
    while (nodes_[i].feature >= 0) {
        const auto& n = nodes_[i];
        i = static_cast<std::size_t>(row.at(static_cast<std::uint32_t>(n.feature)) <= n.threshold ? n.left : n.right);
    }
    return nodes_[i].value;
}

std::size_t DecisionTree::depth() const {
    std::vector<std::size_t> d(nodes_.size(), 0);
    std::size_t deepest = 0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        deepest = std::max(deepest, d[i]);
        if (nodes_[i].feature >= 0) {
            d[static_cast<std::size_t>(nodes_[i].left)] = d[i] + 1;
            d[static_cast<std::size_t>(nodes_[i].right)] = d[i] + 1;
        }
    }
    return deepest;
}

nlohmann::json DecisionTree::to_json() const {
    return {{"algorithm", to_string(algorithm())}, {"options", options_to_json(options_)}, {"seed", seed_},
            {"nodes", nodes_to_json(nodes_)}};
}

std::unique_ptr<DecisionTree> DecisionTree::from_json(const nlohmann::json& j) {
    return guarded("decision tree", [&] {
        auto m = std::make_unique<DecisionTree>(options_from_json(j.at("options")), j.at("seed").get<std::uint64_t>());
        m->nodes_ = nodes_from_json(j.at("nodes"));
        return m;
    });
}

RandomForest::RandomForest(std::size_t n_estimators, TreeOptions options, bool bootstrap, std::uint64_t seed)
    : n_estimators_(n_estimators), options_(options), bootstrap_(bootstrap), seed_(seed) {
    if (n_estimators == 0) throw ValidationError("n_estimators must be >= 1");
}

void RandomForest::fit(const FeatureMatrix& x, std::span<const std::uint8_t> y) {
    check_training_input(x, y);
    trees_.clear();
    const std::size_t n = y.size();
    std::vector<double> w(n);
    for (std::size_t t = 0; t < n_estimators_; ++t) {
        Rng rng(derive_seed(seed_, t));
        if (bootstrap_) {
            std::fill(w.begin(), w.end(), 0.0);
            for (std::size_t i = 0; i < n; ++i) w[rng.below(n)] += 1.0;
        } else {
            std::fill(w.begin(), w.end(), 1.0);
        }
        DecisionTree tree(options_, rng.next());
        tree.fit(x, y, w);
        trees_.push_back(std::move(tree));
    }
}

double RandomForest::predict_proba(const SparseRow& row) const {
    if (trees_.empty()) throw ValidationError("model is not trained");
    double s = 0.0;
    for (const auto& t : trees_) s += t.predict_proba(row);
    return s / static_cast<double>(trees_.size());
}

nlohmann::json RandomForest::to_json() const {
    auto trees = nlohmann::json::array();
    for (const auto& t : trees_) trees.push_back(nodes_to_json(t.nodes_));
    return {{"algorithm", to_string(algorithm())}, {"n_estimators", n_estimators_}, {"options", options_to_json(options_)},
            {"bootstrap", bootstrap_}, {"seed", seed_}, {"trees", trees}};
}

std::unique_ptr<RandomForest> RandomForest::from_json(const nlohmann::json& j) {
    return guarded("random forest", [&] {
        const auto options = options_from_json(j.at("options"));
        auto m = std::make_unique<RandomForest>(j.at("n_estimators").get<std::size_t>(), options,
                                                j.at("bootstrap").get<bool>(), j.at("seed").get<std::uint64_t>());
        for (const auto& t : j.at("trees")) {
            DecisionTree tree(options, 0);
            tree.nodes_ = nodes_from_json(t);
            m->trees_.push_back(std::move(tree));
        }
        return m;
    });
}

AdaBoost::AdaBoost(std::size_t n_estimators, double learning_rate, BoostAlgorithm variant)
    : n_estimators_(n_estimators), learning_rate_(learning_rate), variant_(variant) {
    if (n_estimators == 0) throw ValidationError("n_estimators must be >= 1");
    if (!(learning_rate > 0.0)) throw ValidationError("learning_rate must be > 0");
}

void AdaBoost::fit(const FeatureMatrix& x, std::span<const std::uint8_t> y) {
    check_training_input(x, y);
    stumps_.clear();
    stump_weights_.clear();
    const std::size_t n = y.size();
    std::vector<double> w(n, 1.0 / static_cast<double>(n));
    const auto entries = all_entries(x);
    TreeOptions stump_options;
    stump_options.max_depth = 1;
    Rng unused(0);
    for (std::size_t m = 0; m < n_estimators_; ++m) {
        DecisionTree stump(stump_options, 0);
        stump.nodes_ = TreeBuilder(x, y, w, stump.options_, unused).build(&entries);
        std::vector<double> p1(n);
        double err = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            p1[i] = stump.predict_proba(x.rows[i]);
            if ((p1[i] >= 0.5) != (y[i] == 1)) err += w[i];
        }
        if (variant_ == BoostAlgorithm::samme_r) {
            stumps_.push_back(std::move(stump));
            stump_weights_.push_back(1.0);
            if (err <= 0.0) break;
            for (std::size_t i = 0; i < n; ++i) {
                const double lp1 = std::log(std::max(p1[i], kEps));
                const double lp0 = std::log(std::max(1.0 - p1[i], kEps));
                const double margin = y[i] ? lp1 - lp0 : lp0 - lp1;
                w[i] *= std::exp(-0.5 * learning_rate_ * margin);
            }
        } else {
            if (err <= 0.0) {
                stumps_.push_back(std::move(stump));
                stump_weights_.push_back(1.0);
                break;
            }
            if (err >= 0.5) {
                if (stumps_.empty()) throw ValidationError("first boosting stump is no better than chance");
                break;
            }
            const double alpha = learning_rate_ * std::log((1.0 - err) / err);
            for (std::size_t i = 0; i < n; ++i) {
                if ((p1[i] >= 0.5) != (y[i] == 1)) w[i] *= std::exp(alpha);
            }
            stumps_.push_back(std::move(stump));
            stump_weights_.push_back(alpha);
        }
        const double sum = std::accumulate(w.begin(), w.end(), 0.0);
        if (!(sum > 0.0)) break;
        for (auto& v : w) v /= sum;
    }
}

double AdaBoost::predict_proba(const SparseRow& row) const {
    if (stumps_.empty()) throw ValidationError("model is not trained");
    if (variant_ == BoostAlgorithm::samme_r) {
        double s = 0.0;
        for (const auto& t : stumps_) {
            const double p = t.predict_proba(row);
            s += std::log(std::max(p, kEps)) - std::log(std::max(1.0 - p, kEps));
        }
        return sigmoid(s / static_cast<double>(stumps_.size()));
    }
    double s = 0.0, total = 0.0;
    for (std::size_t m = 0; m < stumps_.size(); ++m) {
        s += stump_weights_[m] * (stumps_[m].predict_proba(row) >= 0.5 ? 1.0 : -1.0);
        total += stump_weights_[m];
    }
    return sigmoid(2.0 * s / total);
}

nlohmann::json AdaBoost::to_json() const {
    auto stumps = nlohmann::json::array();
    for (const auto& t : stumps_) stumps.push_back(nodes_to_json(t.nodes_));
    return {{"algorithm", to_string(algorithm())},
            {"n_estimators", n_estimators_},
            {"learning_rate", learning_rate_},
            {"variant", variant_ == BoostAlgorithm::samme_r ? "SAMME.R" : "SAMME"},
            {"stumps", stumps},
            {"stump_weights", stump_weights_}};
}

std::unique_ptr<AdaBoost> AdaBoost::from_json(const nlohmann::json& j) {
    return guarded("AdaBoost", [&] {
        const auto variant = j.at("variant").get<std::string>() == "SAMME" ? BoostAlgorithm::samme : BoostAlgorithm::samme_r;
        auto m = std::make_unique<AdaBoost>(j.at("n_estimators").get<std::size_t>(), j.at("learning_rate").get<double>(),
                                            variant);
        TreeOptions o;
        o.max_depth = 1;
        for (const auto& t : j.at("stumps")) {
            DecisionTree tree(o, 0);
            tree.nodes_ = nodes_from_json(t);
            m->stumps_.push_back(std::move(tree));
        }
        m->stump_weights_ = j.at("stump_weights").get<std::vector<double>>();
        if (m->stump_weights_.size() != m->stumps_.size()) throw ValidationError("stump weights do not match stumps");
        return m;
    });
}

// -------------------------------------------------------------------- factory

std::unique_ptr<Classifier> make_classifier(const ClassifierSpec& spec, std::uint64_t seed) {
    for (const auto& [name, value] : spec.params) {
        if (!hyperparameter_names(spec.algorithm).contains(name))
            throw ValidationError(fmt::format("unknown hyperparameter '{}' for {}", name, to_string(spec.algorithm)));
    }
    switch (spec.algorithm) {
        case Algorithm::naive_bayes: {
            return std::make_unique<NaiveBayes>(parse_number("alpha", get_or(spec, "alpha", "1")),
                                                parse_flag("fit_prior", get_or(spec, "fit_prior", "True")));
        }
        case Algorithm::logistic_regression: {
            const auto solver = text::to_lower(get_or(spec, "solver", "lbfgs"));
            static const std::set<std::string> solvers = {"liblinear", "lbfgs", "newton-cg", "sag", "saga"};
            if (!solvers.contains(solver)) throw ValidationError("unknown solver '" + solver + "'");
            if (text::to_lower(get_or(spec, "penalty", "l2")) != "l2") throw ValidationError("only the l2 penalty is supported");
            return std::make_unique<LogisticRegression>(
                parse_number("C", get_or(spec, "C", "1")),
                static_cast<int>(parse_count("max_iter", get_or(spec, "max_iter", "500"))),
                parse_number("tol", get_or(spec, "tol", "1e-8")));
        }
        case Algorithm::knn: {
            const auto weights = text::to_lower(get_or(spec, "weights", "uniform"));
            if (weights != "uniform" && weights != "distance") throw ValidationError("weights must be uniform or distance");
            static const std::set<std::string> search = {"auto", "ball_tree", "kd_tree", "brute"};
            if (!search.contains(text::to_lower(get_or(spec, "algorithm", "auto"))))
                throw ValidationError("unknown neighbor search '" + get_or(spec, "algorithm", "") + "'");
            if (auto leaf = spec.param("leaf_size")) parse_count("leaf_size", *leaf);
            return std::make_unique<Knn>(parse_count("n_neighbors", get_or(spec, "n_neighbors", "5")),
                                         weights == "distance" ? KnnWeights::distance : KnnWeights::uniform);
        }
        case Algorithm::decision_tree:
        case Algorithm::random_forest: {
            TreeOptions o;
            o.criterion = parse_criterion(get_or(spec, "criterion", "gini"));
            const bool forest = spec.algorithm == Algorithm::random_forest;
            o.max_features_rule = get_or(spec, "max_features", forest ? "sqrt" : "none");
            resolve_max_features(o.max_features_rule, 1);
            if (auto d = spec.param("max_depth"); d && text::to_lower(*d) != "none") o.max_depth = parse_count("max_depth", *d);
            o.min_samples_split = parse_count("min_samples_split", get_or(spec, "min_samples_split", "2"), 2);
            if (!forest) {
                o.splitter = parse_splitter(get_or(spec, "splitter", "best"));
                return std::make_unique<DecisionTree>(o, seed);
            }
            return std::make_unique<RandomForest>(parse_count("n_estimators", get_or(spec, "n_estimators", "100")), o,
                                                  parse_flag("bootstrap", get_or(spec, "bootstrap", "True")), seed);
        }
        case Algorithm::ada_boost: {
            auto a = get_or(spec, "algorithm", "SAMME.R");
            std::transform(a.begin(), a.end(), a.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
            if (a != "SAMME.R" && a != "SAMME") throw ValidationError("algorithm must be SAMME or SAMME.R");
            return std::make_unique<AdaBoost>(parse_count("n_estimators", get_or(spec, "n_estimators", "50")),
                                              parse_number("learning_rate", get_or(spec, "learning_rate", "1")),
                                              a == "SAMME" ? BoostAlgorithm::samme : BoostAlgorithm::samme_r);
        }
        case Algorithm::svm:
            throw ValidationError("SVM is not trainable natively; supply its predictions as an external file");
        case Algorithm::external:
            throw ValidationError("external predictions are not trainable; load them from a predictions file");
        case Algorithm::rule_based:
            throw ValidationError("the rule baseline needs a cue lexicon, not a trained classifier");
    }
    return nullptr;
}

std::unique_ptr<Classifier> classifier_from_json(const nlohmann::json& j) {
    const auto a = guarded("classifier", [&] { return parse_algorithm(j.at("algorithm").get<std::string>()); });
    switch (a) {
        case Algorithm::naive_bayes: return NaiveBayes::from_json(j);
        case Algorithm::logistic_regression: return LogisticRegression::from_json(j);
        case Algorithm::knn: return Knn::from_json(j);
        case Algorithm::decision_tree: return DecisionTree::from_json(j);
        case Algorithm::random_forest: return RandomForest::from_json(j);
        case Algorithm::ada_boost: return AdaBoost::from_json(j);
        default: throw ValidationError(fmt::format("no serialized model form for {}", to_string(a)));
    }
}

}  // namespace creq
