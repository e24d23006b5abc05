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

#include "creq/prevalence.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>

#include <fmt/format.h>

#include "creq/csv.hpp"
#include "creq/error.hpp"
#include "creq/stats.hpp"

namespace creq {

ContingencyTable::ContingencyTable(std::vector<std::string> row_labels, std::vector<std::string> col_labels,
                                   std::vector<std::vector<std::int64_t>> counts)
    : row_labels_(std::move(row_labels)), col_labels_(std::move(col_labels)), counts_(std::move(counts)) {
    if (row_labels_.size() != counts_.size()) throw ValidationError("contingency table: row label count mismatch");
    for (const auto& row : counts_) {
        if (row.size() != col_labels_.size()) throw ValidationError("contingency table: ragged row");
        for (const auto v : row) {
            if (v < 0) throw ValidationError("contingency table: negative count");
        }
    }
}

std::int64_t ContingencyTable::row_total(std::size_t r) const {
    std::int64_t t = 0;
    for (const auto v : counts_.at(r)) t += v;
    return t;
}

std::int64_t ContingencyTable::col_total(std::size_t c) const {
    std::int64_t t = 0;
    for (const auto& row : counts_) t += row.at(c);
    return t;
}

std::int64_t ContingencyTable::total() const {
    std::int64_t t = 0;
    for (std::size_t r = 0; r < rows(); ++r) t += row_total(r);
    return t;
}

ContingencyTable ContingencyTable::select_columns(const std::vector<std::size_t>& order) const {
    std::vector<std::string> labels;
    std::vector<std::vector<std::int64_t>> counts(rows());
    for (const auto c : order) {
        labels.push_back(col_labels_.at(c));
        for (std::size_t r = 0; r < rows(); ++r) counts[r].push_back(at(r, c));
    }
    return {row_labels_, std::move(labels), std::move(counts)};
}

ContingencyTable ContingencyTable::drop_empty_rows() const {
    std::vector<std::string> labels;
    std::vector<std::vector<std::int64_t>> counts;
    for (std::size_t r = 0; r < rows(); ++r) {
        if (row_total(r) == 0) continue;
        labels.push_back(row_labels_[r]);
        counts.push_back(counts_[r]);
    }
    return {std::move(labels), col_labels_, std::move(counts)};
}

std::size_t chi2_dof(const ContingencyTable& table) {
    if (table.rows() < 2 || table.cols() < 2)
        throw ValidationError(fmt::format("chi-squared needs at least a 2x2 table, got {}x{}", table.rows(), table.cols()));
    return (table.rows() - 1) * (table.cols() - 1);
}

Chi2Result chi2_independence(const ContingencyTable& table, ContinuityCorrection correction) {
    Chi2Result res;
    res.dof = chi2_dof(table);
    const auto n = static_cast<double>(table.total());
    std::vector<double> rt(table.rows());
    std::vector<double> ct(table.cols());
    for (std::size_t r = 0; r < table.rows(); ++r) {
        rt[r] = static_cast<double>(table.row_total(r));
        if (rt[r] == 0) throw UndefinedError("chi-squared: row '" + table.row_labels()[r] + "' has zero total");
    }
    for (std::size_t c = 0; c < table.cols(); ++c) {
        ct[c] = static_cast<double>(table.col_total(c));
        if (ct[c] == 0) throw UndefinedError("chi-squared: column '" + table.col_labels()[c] + "' has zero total");
    }
    res.corrected = correction == ContinuityCorrection::yates && res.dof == 1;
    double stat = 0.0;
    for (std::size_t r = 0; r < table.rows(); ++r) {
        for (std::size_t c = 0; c < table.cols(); ++c) {
            const double e = rt[r] * ct[c] / n;
            double diff = std::fabs(static_cast<double>(table.at(r, c)) - e);
            if (res.corrected) diff -= std::min(0.5, diff);
            stat += diff * diff / e;
        }
    }
    res.statistic = stat;
    res.p = stats::chi2_sf(stat, static_cast<double>(res.dof));
    return res;
}

SignificanceConfig bonferroni(double alpha, std::size_t m) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError(fmt::format("alpha {} outside (0, 1)", alpha));
    if (m == 0) throw ValidationError("Bonferroni correction needs at least one comparison");
    return {alpha, m, alpha / static_cast<double>(m)};
}

std::int64_t CategoryDistribution::labelled() const {
    std::int64_t t = 0;
    for (const auto v : counts) t += v;
    return t;
}

const CategoryDistribution& DistributionReport::get(Category c) const {
    for (const auto& d : overall) {
        if (d.category == c) return d;
    }
    throw ValidationError("category missing from distribution");
}

namespace {

std::vector<CategoryDistribution> distributions_of(const DomainCounts& row) {
    std::vector<CategoryDistribution> out;
    for (const auto c : kAllCategories) {
        CategoryDistribution d;
        d.category = c;
        d.values = category_values(c);
        d.counts = row.counts.at(c);
        d.denominator = is_dependent(c) ? row.causal() : row.sentences;
        for (const auto v : d.counts) {
            d.ratios.push_back(d.denominator > 0 ? static_cast<double>(v) / static_cast<double>(d.denominator)
                                                 : std::nan(""));
        }
        out.push_back(std::move(d));
    }
    return out;
}

}  // namespace

DistributionReport category_distribution(const DomainCountTable& table) {
    if (table.rows.empty()) throw ValidationError("distribution of an empty table");
    DistributionReport rep;
    const auto totals = table.totals();
    rep.sentences = totals.sentences;
    rep.causal = totals.causal();
    if (rep.sentences == 0) throw ValidationError("distribution of an empty corpus");
    rep.overall = distributions_of(totals);
    for (const auto& row : table.rows) rep.domains.push_back({row.domain, row.sentences, distributions_of(row)});
    rep.warnings = table.warnings;
    return rep;
}

DistributionReport category_distribution(const LabeledCorpus& corpus) {
    if (corpus.empty()) throw ValidationError("distribution of an empty corpus");
    return category_distribution(domain_counts(corpus));
}

std::vector<HeadlineRatio> headline_ratios(const DistributionReport& r) {
    auto make = [&](std::string name, Category c, std::size_t v) {
        const auto& d = r.get(c);
        return HeadlineRatio{std::move(name), d.counts.at(v), d.denominator,
                             d.denominator > 0 ? static_cast<double>(d.counts.at(v)) / static_cast<double>(d.denominator)
                                               : std::nan("")};
    };
    return {make("causal", Category::causality, 1),         make("unmarked", Category::marked, 0),
            make("implicit", Category::is_explicit, 0),     make("multiple causes", Category::single_cause, 0),
            make("multiple effects", Category::single_effect, 0), make("two-sentence", Category::single_sentence, 0),
            make("event chains", Category::event_chain, 1)};
}

namespace {

std::int64_t stratum_size(const DomainCounts& row, Category c) { return is_dependent(c) ? row.causal() : row.sentences; }

}  // namespace

CategoryTests one_vs_rest_tests(const DomainCountTable& table, Category category, const OneVsRestOptions& options) {
    if (options.min_stratum < 0) throw ValidationError("minimum stratum size must be non-negative");
    const auto values = category_values(category);
    std::vector<const DomainCounts*> eligible;
    std::vector<DomainTest> domains;
    for (const auto& row : table.rows) {
        DomainTest t;
        t.domain = row.domain;
        t.stratum_size = stratum_size(row, category);
        t.eligible = t.stratum_size >= options.min_stratum;
        if (t.eligible) eligible.push_back(&row);
        domains.push_back(std::move(t));
    }
    if (eligible.size() < 2) {
        throw ValidationError(fmt::format("{}: {} eligible domain(s) with at least {} {}; need two",
                                          category_name(category), eligible.size(), options.min_stratum,
                                          is_dependent(category) ? "causal sentences" : "sentences"));
    }

    std::vector<std::string> cols;
    std::vector<std::vector<std::int64_t>> counts(values.size());
    for (const auto* row : eligible) {
        cols.push_back(row->domain);
        for (std::size_t v = 0; v < values.size(); ++v) counts[v].push_back(row->value(category, v));
    }
    CategoryTests out{category, ContingencyTable(values, cols, counts), {}, {}, {}, {}};
    out.significance = bonferroni(options.alpha, chi2_dof(out.full));
    const auto testable = out.full.drop_empty_rows();
    if (testable.rows() < out.full.rows()) out.notes.push_back("values never observed were dropped before testing");
    out.full_test = chi2_independence(testable, ContinuityCorrection::none);

    std::vector<std::int64_t> totals(values.size(), 0);
    for (std::size_t v = 0; v < values.size(); ++v) totals[v] = out.full.row_total(v);

    std::vector<std::optional<Chi2Result>> results(eligible.size());
    const auto n = static_cast<std::ptrdiff_t>(eligible.size());
#pragma omp parallel for schedule(dynamic) if (options.execution == Execution::parallel)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        std::vector<std::vector<std::int64_t>> pair(values.size());
        for (std::size_t v = 0; v < values.size(); ++v) {
            const auto own = eligible[i]->value(category, v);
            pair[v] = {own, totals[v] - own};
        }
        const ContingencyTable t(values, {eligible[i]->domain, "rest"}, std::move(pair));
        results[i] = chi2_independence(t.drop_empty_rows(), options.two_by_two);
    }

    std::size_t k = 0;
    for (auto& d : domains) {
        if (!d.eligible) continue;
        d.result = results[k++];
        d.significant = d.result->p < out.significance.corrected_level;
    }
    out.domains = std::move(domains);
    return out;
}

CategoryTests one_vs_rest_tests(const LabeledCorpus& corpus, Category category, const OneVsRestOptions& options) {
    return one_vs_rest_tests(domain_counts(corpus), category, options);
}

std::vector<CategoryTests> domain_independence_report(const DomainCountTable& table, const OneVsRestOptions& options) {
    std::vector<CategoryTests> out;
    for (const auto c : kAllCategories) out.push_back(one_vs_rest_tests(table, c, options));
    return out;
}

std::string format_p(double p) { return fmt::format("{:.1E}", p); }

nlohmann::json category_tests_json(const std::vector<CategoryTests>& tests, const OneVsRestOptions& options) {
    using nlohmann::json;
    json cats = json::array();
    for (const auto& t : tests) {
        json doms = json::array();
        for (const auto& d : t.domains) {
            json jd = {{"domain", d.domain}, {"stratum_size", d.stratum_size}, {"eligible", d.eligible}};
            if (d.result) {
                jd["statistic"] = d.result->statistic;
                jd["dof"] = d.result->dof;
                jd["p"] = d.result->p;
                jd["p_display"] = format_p(d.result->p);
                jd["continuity_corrected"] = d.result->corrected;
                jd["significant"] = d.significant;
            }
            doms.push_back(std::move(jd));
        }
        cats.push_back({{"category", category_name(t.category)},
                        {"values", t.full.row_labels()},
                        {"eligible_domains", t.full.col_labels()},
                        {"dof", t.significance.m},
                        {"alpha", t.significance.alpha},
                        {"corrected_level", t.significance.corrected_level},
                        {"corrected_level_display", format_p(t.significance.corrected_level)},
                        {"full_table", {{"statistic", t.full_test.statistic}, {"dof", t.full_test.dof}, {"p", t.full_test.p}}},
                        {"domains", doms},
                        {"notes", t.notes}});
    }
    return {{"min_stratum", options.min_stratum},
            {"alpha", options.alpha},
            {"two_by_two_correction", options.two_by_two == ContinuityCorrection::yates ? "yates" : "none"},
            {"categories", cats}};
}

std::string category_tests_text(const std::vector<CategoryTests>& tests) {
    std::set<std::string> names;
    for (const auto& t : tests) {
        for (const auto& d : t.domains) names.insert(d.domain);
    }
    std::string out = fmt::format("{:<18}", "Domain");
    for (const auto& t : tests) out += fmt::format(" {:>15}", category_name(t.category));
    out += fmt::format("\n{:<18}", "p_c");
    for (const auto& t : tests) out += fmt::format(" {:>15}", format_p(t.significance.corrected_level));
    out += '\n';
    for (const auto& name : names) {
        out += fmt::format("{:<18}", name);
        for (const auto& t : tests) {
            std::string cell = "-";
            for (const auto& d : t.domains) {
                if (d.domain == name && d.result) cell = (d.significant ? "*" : "") + format_p(d.result->p);
            }
            out += fmt::format(" {:>15}", cell);
        }
        out += '\n';
    }
    return out;
}

namespace {

nlohmann::json dist_json(const std::vector<CategoryDistribution>& ds) {
    auto j = nlohmann::json::object();
    for (const auto& d : ds) {
        auto vals = nlohmann::json::object();
        for (std::size_t v = 0; v < d.values.size(); ++v) {
            vals[d.values[v]] = {{"count", d.counts[v]}, {"ratio", std::isnan(d.ratios[v]) ? nlohmann::json(nullptr) : nlohmann::json(d.ratios[v])}};
        }
        j[std::string(category_key(d.category))] = {{"denominator", d.denominator}, {"labelled", d.labelled()}, {"values", vals}};
    }
    return j;
}

}  // namespace

nlohmann::json distribution_json(const DistributionReport& r) {
    using nlohmann::json;
    json headline = json::array();
    for (const auto& h : headline_ratios(r)) {
        headline.push_back({{"name", h.name}, {"numerator", h.numerator}, {"denominator", h.denominator}, {"ratio", h.ratio}});
    }
    json doms = json::array();
    for (const auto& d : r.domains) doms.push_back({{"domain", d.domain}, {"sentences", d.sentences}, {"categories", dist_json(d.categories)}});
    return {{"sentences", r.sentences},
            {"causal", r.causal},
            {"headline", headline},
            {"overall", dist_json(r.overall)},
            {"domains", doms},
            {"warnings", r.warnings}};
}

std::string distribution_text(const DistributionReport& r) {
    std::string out = fmt::format("{} sentences, {} causal\n", r.sentences, r.causal);
    for (const auto& h : headline_ratios(r)) {
        out += fmt::format("  {:<17} {:>6} / {:<6} {:>6.2f}%\n", h.name, h.numerator, h.denominator, 100.0 * h.ratio);
    }
    for (const auto& w : r.warnings) out += "warning: " + w + "\n";
    return out;
}

std::vector<DomainRatio> causality_by_domain(const DomainCountTable& table, std::int64_t min_sentences) {
    std::vector<DomainRatio> out;
    for (const auto& row : table.rows) {
        if (row.sentences < min_sentences || row.sentences == 0) continue;
        out.push_back({row.domain, row.causal(), row.sentences,
                       static_cast<double>(row.causal()) / static_cast<double>(row.sentences)});
    }
    return out;
}

void write_causality_by_domain_csv(const std::vector<DomainRatio>& series, std::ostream& out) {
    csv::write_row(out, {"domain", "causal", "sentences", "ratio"});
    for (const auto& d : series) {
        csv::write_row(out, {d.domain, std::to_string(d.causal), std::to_string(d.sentences), fmt::format("{:.6f}", d.ratio)});
    }
}

void write_contingency_csv(const ContingencyTable& table, std::ostream& out) {
    std::vector<std::string> header{"value"};
    header.insert(header.end(), table.col_labels().begin(), table.col_labels().end());
    csv::write_row(out, header);
    for (std::size_t r = 0; r < table.rows(); ++r) {
        std::vector<std::string> row{table.row_labels()[r]};
        for (std::size_t c = 0; c < table.cols(); ++c) row.push_back(std::to_string(table.at(r, c)));
        csv::write_row(out, row);
    }
}

}  // namespace creq
