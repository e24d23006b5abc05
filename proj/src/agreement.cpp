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

#include "creq/agreement.hpp"

#include <array>
#include <cmath>
#include <istream>
#include <ostream>

#include <fmt/format.h>

#include "creq/csv.hpp"
#include "creq/error.hpp"
#include "creq/text.hpp"

namespace creq {

ConfusionMatrix::ConfusionMatrix(std::size_t categories) : r_(categories), cells_(categories * categories, 0) {
    if (categories < 2) throw ValidationError("a confusion matrix needs at least two categories");
}

ConfusionMatrix ConfusionMatrix::from_rows(const std::vector<std::vector<std::int64_t>>& rows) {
    ConfusionMatrix cm(rows.size());
    for (std::size_t a = 0; a < rows.size(); ++a) {
        if (rows[a].size() != rows.size()) throw ValidationError("confusion matrix must be square");
        for (std::size_t b = 0; b < rows.size(); ++b) cm.add(a, b, rows[a][b]);
    }
    return cm;
}

void ConfusionMatrix::add(std::size_t a, std::size_t b, std::int64_t n) {
    if (a >= r_ || b >= r_) throw ValidationError("label outside the matrix categories");
    if (n < 0) throw ValidationError("negative confusion count");
    cells_[a * r_ + b] += n;
    total_ += n;
}

std::int64_t ConfusionMatrix::trace() const {
    std::int64_t t = 0;
    for (std::size_t c = 0; c < r_; ++c) t += at(c, c);
    return t;
}

bool ConfusionMatrix::is_diagonal() const { return trace() == total_; }

ConfusionMatrix ConfusionMatrix::transposed() const {
    ConfusionMatrix t(r_);
    for (std::size_t a = 0; a < r_; ++a) {
        for (std::size_t b = 0; b < r_; ++b) t.add(b, a, at(a, b));
    }
    return t;
}

std::vector<double> ConfusionMatrix::row_proportions() const {
    std::vector<double> p(r_, 0.0);
    for (std::size_t a = 0; a < r_; ++a) {
        for (std::size_t b = 0; b < r_; ++b) p[a] += static_cast<double>(at(a, b));
        p[a] /= static_cast<double>(total_);
    }
    return p;
}

std::vector<double> ConfusionMatrix::col_proportions() const {
    std::vector<double> p(r_, 0.0);
    for (std::size_t b = 0; b < r_; ++b) {
        for (std::size_t a = 0; a < r_; ++a) p[b] += static_cast<double>(at(a, b));
        p[b] /= static_cast<double>(total_);
    }
    return p;
}

ConfusionMatrix build_confusion(const std::vector<std::pair<std::size_t, std::size_t>>& pairs, std::size_t categories) {
    if (pairs.empty()) throw ValidationError("cannot build a confusion matrix from an empty list of pairs");
    ConfusionMatrix cm(categories);
    for (const auto& [a, b] : pairs) cm.add(a, b);
    return cm;
}

namespace {

void require_total(const ConfusionMatrix& cm) {
    if (cm.total() <= 0) throw UndefinedError("agreement statistics need a matrix with positive total");
}

}  // namespace

double percent_agreement(const ConfusionMatrix& cm) {
    require_total(cm);
    return static_cast<double>(cm.trace()) / static_cast<double>(cm.total());
}

double kappa_chance_agreement(const ConfusionMatrix& cm) {
    require_total(cm);
    const auto rows = cm.row_proportions();
    const auto cols = cm.col_proportions();
    double pe = 0.0;
    for (std::size_t c = 0; c < cm.categories(); ++c) pe += rows[c] * cols[c];
    return pe;
}

double cohen_kappa(const ConfusionMatrix& cm) {
    const double po = percent_agreement(cm);
    const double pe = kappa_chance_agreement(cm);
    if (pe >= 1.0) throw UndefinedError("Cohen's kappa is undefined: expected agreement is 1");
    return (po - pe) / (1.0 - pe);
}

double ac1_chance_agreement(const ConfusionMatrix& cm) {
    require_total(cm);
    const auto rows = cm.row_proportions();
    const auto cols = cm.col_proportions();
    double s = 0.0;
    for (std::size_t c = 0; c < cm.categories(); ++c) {
        const double pi = 0.5 * (rows[c] + cols[c]);
        s += pi * (1.0 - pi);
    }
    return s / static_cast<double>(cm.categories() - 1);
}

double gwet_ac1(const ConfusionMatrix& cm) {
    const double po = percent_agreement(cm);
    const double pg = ac1_chance_agreement(cm);
    if (pg >= 1.0) throw UndefinedError("Gwet's AC1 is undefined: chance agreement is 1");
    return (po - pg) / (1.0 - pg);
}

AgreementBand interpret_landis_koch(double value) {
    if (std::isnan(value)) throw ValidationError("agreement value is NaN");
    if (value > 1.0 + 1e-12) throw ValidationError(fmt::format("agreement value {} exceeds 1", value));
    if (value <= 0.0) return AgreementBand::none;
    if (value <= 0.20) return AgreementBand::slight;
    if (value <= 0.40) return AgreementBand::fair;
    if (value <= 0.60) return AgreementBand::moderate;
    if (value <= 0.80) return AgreementBand::substantial;
    return AgreementBand::almost_perfect;
}

std::string_view to_string(AgreementBand band) {
    switch (band) {
        case AgreementBand::none: return "no agreement";
        case AgreementBand::slight: return "slight";
        case AgreementBand::fair: return "fair";
        case AgreementBand::moderate: return "moderate";
        case AgreementBand::substantial: return "substantial";
        case AgreementBand::almost_perfect: return "almost perfect";
    }
    return "?";
}

AgreementStats agreement_stats(const ConfusionMatrix& cm) {
    AgreementStats s;
    s.percent_agreement = percent_agreement(cm);
    s.ac1 = gwet_ac1(cm);
    s.ac1_band = interpret_landis_koch(s.ac1);
    if (kappa_chance_agreement(cm) >= 1.0) {
        s.kappa_defined = false;
        s.kappa = std::nan("");
    } else {
        s.kappa = cohen_kappa(cm);
        s.kappa_band = interpret_landis_koch(s.kappa);
    }
    return s;
}

namespace {

constexpr std::array kReportCategories = {Category::causality,    Category::is_explicit,  Category::marked,
                                          Category::single_sentence, Category::single_cause, Category::single_effect,
                                          Category::event_chain};

}  // namespace

AgreementReport agreement_report(const std::vector<std::pair<Category, ConfusionMatrix>>& matrices) {
    if (matrices.empty()) throw ValidationError("agreement report needs at least one matrix");
    AgreementReport report;
    double n_kappa = 0.0;
    for (const auto& [c, cm] : matrices) {
        if (c == Category::causality) report.overlapping_sentences = static_cast<std::size_t>(cm.total());
        if (cm.total() == 0) continue;
        AgreementRow row{c, cm, agreement_stats(cm)};
        report.mean_percent_agreement += row.stats.percent_agreement;
        report.mean_ac1 += row.stats.ac1;
        if (row.stats.kappa_defined) {
            report.mean_kappa += row.stats.kappa;
            n_kappa += 1.0;
        }
        report.rows.push_back(std::move(row));
    }
    if (report.rows.empty()) throw ValidationError("agreement report has no matrix with positive total");
    const auto n = static_cast<double>(report.rows.size());
    report.mean_percent_agreement /= n;
    report.mean_ac1 /= n;
    report.mean_kappa = n_kappa > 0 ? report.mean_kappa / n_kappa : std::nan("");
    return report;
}

AgreementReport agreement_report(const LabeledCorpus& corpus) {
    std::vector<std::pair<Category, ConfusionMatrix>> matrices;
    for (const auto c : kReportCategories) matrices.emplace_back(c, ConfusionMatrix(2));
    std::size_t overlap = 0;
    for (const auto& s : corpus.sentences()) {
        const auto labels = corpus.labels_for(s.id);
        if (labels.size() < 2) continue;
        ++overlap;
        const auto& a = *labels[0];
        const auto& b = *labels[1];
        matrices[0].second.add(a.causal ? 1 : 0, b.causal ? 1 : 0);
        if (!(a.causal && b.causal)) continue;
        for (std::size_t i = 1; i < matrices.size(); ++i) {
            const auto c = matrices[i].first;
            matrices[i].second.add(*category_value(a, c), *category_value(b, c));
        }
    }
    if (overlap == 0) throw ValidationError("agreement report needs sentences labelled by two annotators");
    return agreement_report(matrices);
}

std::vector<std::pair<Category, ConfusionMatrix>> read_agreement_matrices_csv(std::istream& in, const std::string& source) {
    csv::Reader reader(in);
    const auto header_row = reader.next();
    if (!header_row) throw ParseError(source, 1, "empty matrix file");
    const csv::Header h(*header_row);
    for (const char* col : {"category", "a0b0", "a0b1", "a1b0", "a1b1"}) {
        if (!h.has(col)) throw ParseError(source, 1, std::string("missing column '") + col + "'");
    }
    std::vector<std::pair<Category, ConfusionMatrix>> out;
    while (auto row = reader.next()) {
        if (row->size() == 1 && text::trim((*row)[0]).empty()) continue;
        try {
            const auto c = parse_category(h.get(*row, "category"));
            auto num = [&](const char* col) { return std::stoll(std::string(text::trim(h.get(*row, col)))); };
            out.emplace_back(c, ConfusionMatrix::from_rows({{num("a0b0"), num("a0b1")}, {num("a1b0"), num("a1b1")}}));
        } catch (const ValidationError& e) {
            throw ParseError(source, reader.line(), e.what());
        } catch (const std::exception& e) {
            throw ParseError(source, reader.line(), std::string("malformed matrix row: ") + e.what());
        }
    }
    return out;
}

void write_agreement_matrices_csv(const AgreementReport& report, std::ostream& out) {
    csv::write_row(out, {"category", "a0b0", "a0b1", "a1b0", "a1b1"});
    for (const auto& row : report.rows) {
        csv::write_row(out, {std::string(category_name(row.category)), std::to_string(row.matrix.at(0, 0)),
                             std::to_string(row.matrix.at(0, 1)), std::to_string(row.matrix.at(1, 0)),
                             std::to_string(row.matrix.at(1, 1))});
    }
}

namespace {

double round3(double v) { return std::round(v * 1000.0) / 1000.0; }

nlohmann::json maybe(double v, bool defined) {
    return defined ? nlohmann::json(v) : nlohmann::json(nullptr);
}

}  // namespace

nlohmann::json agreement_report_json(const AgreementReport& report) {
    using nlohmann::json;
    json rows = json::array();
    for (const auto& r : report.rows) {
        json cells = json::array();
        for (std::size_t a = 0; a < r.matrix.categories(); ++a) {
            json line = json::array();
            for (std::size_t b = 0; b < r.matrix.categories(); ++b) line.push_back(r.matrix.at(a, b));
            cells.push_back(std::move(line));
        }
        rows.push_back({{"category", category_name(r.category)},
                        {"confusion_matrix", cells},
                        {"total", r.matrix.total()},
                        {"percent_agreement", round3(r.stats.percent_agreement)},
                        {"cohen_kappa", maybe(round3(r.stats.kappa), r.stats.kappa_defined)},
                        {"gwet_ac1", round3(r.stats.ac1)},
                        {"kappa_band", r.stats.kappa_defined ? json(to_string(r.stats.kappa_band)) : json(nullptr)},
                        {"ac1_band", to_string(r.stats.ac1_band)},
                        {"exact",
                         {{"percent_agreement", r.stats.percent_agreement},
                          {"cohen_kappa", maybe(r.stats.kappa, r.stats.kappa_defined)},
                          {"gwet_ac1", r.stats.ac1}}}});
    }
    return {{"rows", rows},
            {"overlapping_sentences", report.overlapping_sentences},
            {"average",
             {{"method", "unweighted mean over reported categories"},
              {"percent_agreement", round3(report.mean_percent_agreement)},
              {"cohen_kappa", maybe(round3(report.mean_kappa), !std::isnan(report.mean_kappa))},
              {"gwet_ac1", round3(report.mean_ac1)}}}};
}

std::string agreement_report_text(const AgreementReport& report) {
    std::string out = fmt::format("{:<16} {:>7} {:>7} {:>7} {:>7} {:>10} {:>8} {:>8}\n", "category", "00", "01", "10", "11",
                                  "agreement", "kappa", "AC1");
    for (const auto& r : report.rows) {
        const std::string kappa = r.stats.kappa_defined ? fmt::format("{:.3f}", r.stats.kappa) : "n/a";
        out += fmt::format("{:<16} {:>7} {:>7} {:>7} {:>7} {:>9.1f}% {:>8} {:>8.3f}\n", category_name(r.category),
                           r.matrix.at(0, 0), r.matrix.at(0, 1), r.matrix.at(1, 0), r.matrix.at(1, 1),
                           100.0 * r.stats.percent_agreement, kappa, r.stats.ac1);
    }
    out += fmt::format("{:<16} {:>39.1f}% {:>8.3f} {:>8.3f}\n", "avg.", 100.0 * report.mean_percent_agreement,
                       report.mean_kappa, report.mean_ac1);
    return out;
}

}  // namespace creq
