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

#ifndef CREQ_AGREEMENT_HPP
#define CREQ_AGREEMENT_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "creq/corpus.hpp"
#include "creq/domain_counts.hpp"

namespace creq {

/// r x r matrix of paired decisions; rows are annotator A, columns annotator B.
class ConfusionMatrix {
public:
    explicit ConfusionMatrix(std::size_t categories = 2);
    /// Row-major counts; throws unless `rows` is square and non-negative.
    static ConfusionMatrix from_rows(const std::vector<std::vector<std::int64_t>>& rows);

    void add(std::size_t a, std::size_t b, std::int64_t n = 1);

    [[nodiscard]] std::size_t categories() const noexcept { return r_; }
    [[nodiscard]] std::int64_t at(std::size_t a, std::size_t b) const { return cells_.at(a * r_ + b); }
    [[nodiscard]] std::int64_t total() const noexcept { return total_; }
    [[nodiscard]] std::int64_t trace() const;
    [[nodiscard]] bool is_diagonal() const;
    [[nodiscard]] ConfusionMatrix transposed() const;
    /// Marginal proportions of annotator A (rows) and B (columns).
    [[nodiscard]] std::vector<double> row_proportions() const;
    [[nodiscard]] std::vector<double> col_proportions() const;

    bool operator==(const ConfusionMatrix&) const = default;

private:
    std::size_t r_;
    std::vector<std::int64_t> cells_;
    std::int64_t total_ = 0;
};

/// Counts label pairs over the category values 0..r-1. Throws on empty input
/// or out-of-range labels.
ConfusionMatrix build_confusion(const std::vector<std::pair<std::size_t, std::size_t>>& pairs, std::size_t categories = 2);

double percent_agreement(const ConfusionMatrix& cm);
/// Chance agreement of Cohen's kappa: sum over categories of rowMarginal * colMarginal.
double kappa_chance_agreement(const ConfusionMatrix& cm);
double cohen_kappa(const ConfusionMatrix& cm);
/// Chance agreement of Gwet's AC1: (1/(r-1)) * sum pi_c (1 - pi_c), pi_c the mean marginal.
double ac1_chance_agreement(const ConfusionMatrix& cm);
double gwet_ac1(const ConfusionMatrix& cm);

enum class AgreementBand { none, slight, fair, moderate, substantial, almost_perfect };

/// Landis-Koch bands: <=0 none; (0,0.20] slight; (0.20,0.40] fair; (0.40,0.60] moderate;
/// (0.60,0.80] substantial; (0.80,1] almost perfect. Throws for values above 1.
AgreementBand interpret_landis_koch(double value);
std::string_view to_string(AgreementBand band);

struct AgreementStats {
    double percent_agreement = 0.0;
    double kappa = 0.0;
    double ac1 = 0.0;
    AgreementBand kappa_band = AgreementBand::none;
    AgreementBand ac1_band = AgreementBand::none;
    bool kappa_defined = true;  ///< false when the chance agreement is 1
};

AgreementStats agreement_stats(const ConfusionMatrix& cm);

struct AgreementRow {
    Category category;
    ConfusionMatrix matrix;
    AgreementStats stats;
};

/// Per-category table plus the unweighted mean over its rows.
struct AgreementReport {
    std::vector<AgreementRow> rows;
    double mean_percent_agreement = 0.0;
    double mean_kappa = 0.0;
    double mean_ac1 = 0.0;
    std::size_t overlapping_sentences = 0;
};

/// Rows in table order: causality over all doubly labelled sentences, each
/// binary dependent category over sentences both annotators marked causal.
/// Relationship and temporality are not reported. Sentences with more than
/// two annotators use the first two.
AgreementReport agreement_report(const LabeledCorpus& corpus);
/// Same table from already-tallied matrices (category order preserved).
AgreementReport agreement_report(const std::vector<std::pair<Category, ConfusionMatrix>>& matrices);

/// Reads category,a0b0,a0b1,a1b0,a1b1 rows (binary matrices).
std::vector<std::pair<Category, ConfusionMatrix>> read_agreement_matrices_csv(std::istream& in,
                                                                              const std::string& source = "<matrices>");
void write_agreement_matrices_csv(const AgreementReport& report, std::ostream& out);

/// Values rounded to three decimals for display; full precision kept under "exact".
nlohmann::json agreement_report_json(const AgreementReport& report);
std::string agreement_report_text(const AgreementReport& report);

}  // namespace creq

#endif  // CREQ_AGREEMENT_HPP
