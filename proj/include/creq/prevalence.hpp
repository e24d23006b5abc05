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

#ifndef CREQ_PREVALENCE_HPP
#define CREQ_PREVALENCE_HPP

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "creq/corpus.hpp"
#include "creq/domain_counts.hpp"
#include "creq/parallel.hpp"

namespace creq {

/// Counts with rows = category values and columns = strata.
class ContingencyTable {
public:
    /// Throws on ragged rows, label/shape mismatch or negative counts.
    ContingencyTable(std::vector<std::string> row_labels, std::vector<std::string> col_labels,
                     std::vector<std::vector<std::int64_t>> counts);

    [[nodiscard]] std::size_t rows() const noexcept { return counts_.size(); }
    [[nodiscard]] std::size_t cols() const noexcept { return col_labels_.size(); }
    [[nodiscard]] std::int64_t at(std::size_t r, std::size_t c) const { return counts_.at(r).at(c); }
    [[nodiscard]] std::int64_t row_total(std::size_t r) const;
    [[nodiscard]] std::int64_t col_total(std::size_t c) const;
    [[nodiscard]] std::int64_t total() const;
    [[nodiscard]] const std::vector<std::string>& row_labels() const noexcept { return row_labels_; }
    [[nodiscard]] const std::vector<std::string>& col_labels() const noexcept { return col_labels_; }
    [[nodiscard]] const std::vector<std::vector<std::int64_t>>& counts() const noexcept { return counts_; }

    /// Columns in the given order (a permutation or a selection).
    [[nodiscard]] ContingencyTable select_columns(const std::vector<std::size_t>& order) const;
    /// Without rows whose total is zero.
    [[nodiscard]] ContingencyTable drop_empty_rows() const;

private:
    std::vector<std::string> row_labels_;
    std::vector<std::string> col_labels_;
    std::vector<std::vector<std::int64_t>> counts_;
};

/// (rows - 1) * (cols - 1); throws for fewer than two rows or columns.
std::size_t chi2_dof(const ContingencyTable& table);

enum class ContinuityCorrection { none, yates };

struct Chi2Result {
    double statistic = 0.0;
    std::size_t dof = 0;
    double p = 1.0;
    bool corrected = false;  ///< Yates correction was applied (only ever for dof 1)
};

/// Pearson test of independence. With `yates`, tables with one degree of
/// freedom move each observed count toward its expectation by
/// min(0.5, |O - E|); larger tables are never corrected. Throws UndefinedError
/// on a zero row or column total.
Chi2Result chi2_independence(const ContingencyTable& table, ContinuityCorrection correction = ContinuityCorrection::none);

struct SignificanceConfig {
    double alpha = 0.05;
    std::size_t m = 1;
    double corrected_level = 0.05;  ///< alpha / m
};

SignificanceConfig bonferroni(double alpha, std::size_t m);

/// Counts of one category's values and their ratio to the category's denominator
/// (all sentences for causality, causal sentences for dependent categories).
struct CategoryDistribution {
    Category category = Category::causality;
    std::vector<std::string> values;
    std::vector<std::int64_t> counts;
    std::int64_t denominator = 0;
    std::vector<double> ratios;
    /// Sum of counts; below the denominator when some causal sentences lack the value.
    [[nodiscard]] std::int64_t labelled() const;
};

struct DomainDistribution {
    std::string domain;
    std::int64_t sentences = 0;
    std::vector<CategoryDistribution> categories;
};

struct DistributionReport {
    std::int64_t sentences = 0;
    std::int64_t causal = 0;
    std::vector<CategoryDistribution> overall;
    std::vector<DomainDistribution> domains;
    std::vector<std::string> warnings;
    [[nodiscard]] const CategoryDistribution& get(Category c) const;
};

DistributionReport category_distribution(const DomainCountTable& table);
/// Throws on an empty corpus.
DistributionReport category_distribution(const LabeledCorpus& corpus);

/// One headline share, e.g. unmarked = marked[false] / causal.
struct HeadlineRatio {
    std::string name;
    std::int64_t numerator = 0;
    std::int64_t denominator = 0;
    double ratio = 0.0;
};

/// causal, unmarked, implicit, multiple causes, multiple effects, two-sentence, event chains.
std::vector<HeadlineRatio> headline_ratios(const DistributionReport& report);

struct OneVsRestOptions {
    /// Sentences per domain for causality, causal sentences for dependent categories.
    std::int64_t min_stratum = 100;
    double alpha = 0.05;
    /// Applied to the 2x2 domain-vs-rest tables; larger tables are never corrected.
    ContinuityCorrection two_by_two = ContinuityCorrection::yates;
    Execution execution = Execution::parallel;
};

struct DomainTest {
    std::string domain;
    std::int64_t stratum_size = 0;
    bool eligible = false;
    std::optional<Chi2Result> result;  ///< empty when ineligible
    bool significant = false;
};

struct CategoryTests {
    Category category = Category::causality;
    ContingencyTable full;  ///< values x eligible domains
    Chi2Result full_test;   ///< uncorrected test of the full table
    SignificanceConfig significance;  ///< m = dof of the full table
    std::vector<DomainTest> domains;  ///< every domain, ineligible ones flagged
    std::vector<std::string> notes;
};

/// Compares each eligible domain with the pooled other eligible domains.
/// Throws ValidationError when fewer than two domains are eligible.
CategoryTests one_vs_rest_tests(const DomainCountTable& table, Category category, const OneVsRestOptions& options = {});
CategoryTests one_vs_rest_tests(const LabeledCorpus& corpus, Category category, const OneVsRestOptions& options = {});

/// All nine categories, in table column order.
std::vector<CategoryTests> domain_independence_report(const DomainCountTable& table, const OneVsRestOptions& options = {});

/// Scientific notation with two significant digits ("8.0E-05").
std::string format_p(double p);

nlohmann::json category_tests_json(const std::vector<CategoryTests>& tests, const OneVsRestOptions& options);
std::string category_tests_text(const std::vector<CategoryTests>& tests);
nlohmann::json distribution_json(const DistributionReport& report);
std::string distribution_text(const DistributionReport& report);

/// Causal share per domain with at least `min_sentences` sentences, sorted by domain.
struct DomainRatio {
    std::string domain;
    std::int64_t causal = 0;
    std::int64_t sentences = 0;
    double ratio = 0.0;
};
std::vector<DomainRatio> causality_by_domain(const DomainCountTable& table, std::int64_t min_sentences = 100);
void write_causality_by_domain_csv(const std::vector<DomainRatio>& series, std::ostream& out);
/// category_value,domain...; one block per category.
void write_contingency_csv(const ContingencyTable& table, std::ostream& out);

}  // namespace creq

#endif  // CREQ_PREVALENCE_HPP
