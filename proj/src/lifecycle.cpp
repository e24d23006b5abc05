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

#include "creq/lifecycle.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <numbers>
#include <set>

#include <fmt/format.h>

#include "creq/error.hpp"
#include "creq/prevalence.hpp"
#include "creq/stats.hpp"
#include "creq/text.hpp"

namespace creq {

namespace {

constexpr std::size_t kOpen = std::numeric_limits<std::size_t>::max();

// Days since 1970-01-01 of a proleptic Gregorian date.
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const auto yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

bool leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int digits(std::string_view s, std::size_t& pos, std::size_t n, std::string_view whole) {
    if (pos + n > s.size()) throw ValidationError("truncated timestamp '" + std::string(whole) + "'");
    int v = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const char c = s[pos + i];
        if (c < '0' || c > '9') throw ValidationError("malformed timestamp '" + std::string(whole) + "'");
        v = v * 10 + (c - '0');
    }
    pos += n;
    return v;
}

void expect(std::string_view s, std::size_t& pos, char c, std::string_view whole) {
    if (pos >= s.size() || s[pos] != c) throw ValidationError("malformed timestamp '" + std::string(whole) + "'");
    ++pos;
}

}  // namespace

double parse_iso8601(std::string_view whole) {
    const auto s = text::trim(whole);
    std::size_t pos = 0;
    const int year = digits(s, pos, 4, whole);
    expect(s, pos, '-', whole);
    const int month = digits(s, pos, 2, whole);
    expect(s, pos, '-', whole);
    const int day = digits(s, pos, 2, whole);
    static constexpr int mdays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (month < 1 || month > 12) throw ValidationError("month out of range in '" + std::string(whole) + "'");
    const int dim = mdays[month - 1] + (month == 2 && leap(year) ? 1 : 0);
    if (day < 1 || day > dim) throw ValidationError("day out of range in '" + std::string(whole) + "'");
    double seconds = 0.0;
    if (pos < s.size() && (s[pos] == 'T' || s[pos] == 't' || s[pos] == ' ')) {
        ++pos;
        const int hh = digits(s, pos, 2, whole);
        expect(s, pos, ':', whole);
        const int mm = digits(s, pos, 2, whole);
        int ss = 0;
        double frac = 0.0;
        if (pos < s.size() && s[pos] == ':') {
            ++pos;
            ss = digits(s, pos, 2, whole);
            if (pos < s.size() && (s[pos] == '.' || s[pos] == ',')) {
                ++pos;
                double scale = 0.1;
                const std::size_t start = pos;
                while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
                    frac += (s[pos] - '0') * scale;
                    scale /= 10;
                    ++pos;
                }
                if (pos == start) throw ValidationError("malformed fraction in '" + std::string(whole) + "'");
            }
        }
        if (hh > 23 || mm > 59 || ss > 60) throw ValidationError("time out of range in '" + std::string(whole) + "'");
        seconds = hh * 3600.0 + mm * 60.0 + ss + frac;
        if (pos < s.size()) {
            if (s[pos] == 'Z' || s[pos] == 'z') {
                ++pos;
            } else if (s[pos] == '+' || s[pos] == '-') {
                const int sign = s[pos] == '+' ? 1 : -1;
                ++pos;
                const int oh = digits(s, pos, 2, whole);
                if (pos < s.size() && s[pos] == ':') ++pos;
                const int om = digits(s, pos, 2, whole);
                if (oh > 23 || om > 59) throw ValidationError("offset out of range in '" + std::string(whole) + "'");
                seconds -= sign * (oh * 3600.0 + om * 60.0);
            }
        }
    }
    if (pos != s.size()) throw ValidationError("trailing characters in timestamp '" + std::string(whole) + "'");
    return static_cast<double>(days_from_civil(year, static_cast<unsigned>(month), static_cast<unsigned>(day))) * 86400.0 +
           seconds;
}

std::vector<RequirementRecord> parse_requirements_jsonl(std::istream& in, const std::string& source) {
    std::vector<RequirementRecord> out;
    std::set<std::string> ids;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            RequirementRecord r;
            r.id = j.at("id").get<std::string>();
            if (r.id.empty()) throw ValidationError("empty id");
            r.description = j.value("description", std::string{});
            r.creation_date = j.value("creation_date", std::string{});
            if (j.contains("state_log") && !j["state_log"].is_null()) {
                std::vector<StateEntry> log;
                for (const auto& e : j["state_log"]) {
                    StateEntry s{e.at("author").get<std::string>(), e.at("timestamp").get<std::string>(),
                                 e.at("state_code").get<std::string>()};
                    if (s.state_code.empty()) throw ValidationError("empty state_code");
                    log.push_back(std::move(s));
                }
                r.state_log = std::move(log);
            }
            if (!ids.insert(r.id).second) throw ValidationError("duplicate requirement id '" + r.id + "'");
            out.push_back(std::move(r));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(source, lineno, e.what());
        } catch (const ParseError&) {
            throw;
        } catch (const ValidationError& e) {
            throw ParseError(source, lineno, e.what());
        }
    }
    return out;
}

std::vector<RequirementRecord> load_requirements(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return parse_requirements_jsonl(in, path.string());
}

nlohmann::json requirement_to_json(const RequirementRecord& r) {
    nlohmann::json j = {{"id", r.id}, {"description", r.description}, {"creation_date", r.creation_date}};
    if (r.state_log) {
        auto log = nlohmann::json::array();
        for (const auto& e : *r.state_log)
            log.push_back({{"author", e.author}, {"timestamp", e.timestamp}, {"state_code", e.state_code}});
        j["state_log"] = log;
    } else {
        j["state_log"] = nullptr;
    }
    return j;
}

DerivedFeatures derive_features(const RequirementRecord& record, const TextModel& detector) {
    if (!record.state_log || record.state_log->empty())
        throw ValidationError("requirement '" + record.id + "' has no state log");
    const auto& log = *record.state_log;
    double previous = -std::numeric_limits<double>::infinity();
    double first = 0.0;
    for (std::size_t i = 0; i < log.size(); ++i) {
        double t = 0.0;
        try {
            t = parse_iso8601(log[i].timestamp);
        } catch (const ValidationError& e) {
            throw ValidationError("requirement '" + record.id + "': " + e.what());
        }
        if (t < previous) throw ValidationError("requirement '" + record.id + "': state log is not in time order");
        if (i == 0) first = t;
        previous = t;
    }
    DerivedFeatures f;
    f.id = record.id;
    f.lead_time = (previous - first) / 86400.0;
    f.volatility = log.size();
    f.consolidated_state = log.back().state_code;
    for (const auto& s : text::split_sentences(record.description)) {
        ++f.sentence_count;
        if (detector.predict(s).label) ++f.causal_count;
    }
    return f;
}

std::vector<DerivedFeatures> derive_all(std::span<const RequirementRecord> records, const TextModel& detector,
                                        Execution exec) {
    std::vector<DerivedFeatures> out(records.size());
    std::vector<std::exception_ptr> errors(records.size());
    const auto n = static_cast<std::ptrdiff_t>(records.size());
#pragma omp parallel for schedule(dynamic, 32) if (exec == Execution::parallel)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        try {
            out[i] = derive_features(records[i], detector);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return out;
}

std::vector<RequirementRecord> preprocess(std::span<const RequirementRecord> records, const PreprocessOptions& options,
                                          PreprocessReport* report) {
    PreprocessReport r;
    r.input = records.size();
    std::vector<RequirementRecord> kept;
    for (const auto& rec : records) {
        if (!rec.state_log || rec.state_log->empty()) {
            ++r.missing_log;
            continue;
        }
        const auto& log = *rec.state_log;
        if (!options.invalid_author.empty() &&
            std::all_of(log.begin(), log.end(), [&](const StateEntry& e) { return e.author == options.invalid_author; })) {
            ++r.invalid_author;
            continue;
        }
        if (log.size() == 1) {
            ++r.single_entry;
            continue;
        }
        kept.push_back(rec);
    }
    r.kept = kept.size();
    if (report) *report = r;
    return kept;
}

std::string_view to_string(Granularity g) {
    switch (g) {
        case Granularity::g1: return "G1";
        case Granularity::g2: return "G2";
        case Granularity::g3: return "G3";
    }
    return "?";
}

Granularity parse_granularity(std::string_view s) {
    const auto v = text::to_lower(text::trim(s));
    if (v == "g1") return Granularity::g1;
    if (v == "g2") return Granularity::g2;
    if (v == "g3") return Granularity::g3;
    throw ValidationError("granularity must be g1, g2 or g3");
}

std::string CountRange::label() const {
    if (lo == hi) return fmt::format("[{}]", lo);
    if (hi == kOpen) return fmt::format("[{}, max]", lo);
    return fmt::format("[{}, {}]", lo, hi);
}

void validate_bins(const BinOptions& o) {
    if (o.batch_width == 0) throw ValidationError("batch width must be >= 1");
    if (o.sentence_bins.empty()) throw ValidationError("at least one sentence bin is needed");
    for (std::size_t i = 0; i < o.sentence_bins.size(); ++i) {
        const auto& b = o.sentence_bins[i];
        if (b.lo > b.hi) throw ValidationError("sentence bin " + b.label() + " is inverted");
        if (i > 0 && b.lo != o.sentence_bins[i - 1].hi + 1)
            throw ValidationError("sentence bins must be contiguous at " + b.label());
    }
    if (o.sentence_bins.back().hi != kOpen) throw ValidationError("the last sentence bin must be open-ended");
}

std::vector<FeatureGroup> bin_granularity(std::span<const DerivedFeatures> features, Granularity mode,
                                          const BinOptions& options) {
    validate_bins(options);
    if (features.empty()) throw ValidationError("no features to bin");
    std::vector<FeatureGroup> groups;
    if (mode == Granularity::g1) {
        groups.push_back({"non-causal", CountRange{0, 0}, std::nullopt, {}, true});
        groups.push_back({"causal", CountRange{1, kOpen}, std::nullopt, {}, true});
        for (std::size_t i = 0; i < features.size(); ++i) groups[features[i].causal_count > 0 ? 1 : 0].members.push_back(i);
        return groups;
    }
    if (mode == Granularity::g2) {
        std::map<std::size_t, std::vector<std::size_t>> batches;  // batch number -> members
        for (std::size_t i = 0; i < features.size(); ++i) {
            const auto c = features[i].causal_count;
            batches[c == 0 ? 0 : (c - 1) / options.batch_width + 1].push_back(i);
        }
        for (auto& [b, members] : batches) {
            const CountRange r = b == 0 ? CountRange{0, 0}
                                        : CountRange{(b - 1) * options.batch_width + 1, b * options.batch_width};
            const bool included = members.size() > options.min_batch;
            groups.push_back({r.label(), r, std::nullopt, std::move(members), included});
        }
        return groups;
    }
    for (const auto& bin : options.sentence_bins) {
        groups.push_back({bin.label() + " non-causal", CountRange{0, 0}, bin, {}, true});
        groups.push_back({bin.label() + " causal", CountRange{1, kOpen}, bin, {}, true});
    }
    for (std::size_t i = 0; i < features.size(); ++i) {
        std::size_t b = 0;
        while (b + 1 < options.sentence_bins.size() && !options.sentence_bins[b].contains(features[i].sentence_count)) ++b;
        groups[2 * b + (features[i].causal_count > 0 ? 1 : 0)].members.push_back(i);
    }
    return groups;
}

MwuResult mann_whitney_u(std::span<const double> a, std::span<const double> b, const MwuOptions& options) {
    if (a.empty() || b.empty()) throw ValidationError("Mann-Whitney U needs two non-empty samples");
    std::vector<double> all(a.begin(), a.end());
    all.insert(all.end(), b.begin(), b.end());
    for (const double v : all) {
        if (!std::isfinite(v)) throw ValidationError("Mann-Whitney U needs finite values");
    }
    const auto ranks = stats::midranks(all);
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    const double n = na + nb;
    double ra = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) ra += ranks[i];
    MwuResult r;
    r.u = ra - na * (na + 1) / 2;
    r.u_b = na * nb - r.u;
    const double mu = na * nb / 2;
    const double var = na * nb / 12.0 * ((n + 1) - stats::tie_term(all) / (n * (n - 1)));
    if (var > 0) r.z = (r.u - mu) / std::sqrt(var);

    if (all.size() <= options.exact_limit && all.size() < 64) {
        // Enumerate every assignment of the pooled ranks to sample a.
        const auto total = all.size();
        std::size_t count = 0, hits = 0;
        const double tol = 1e-9;
        const double dev = std::abs(r.u - mu);
        for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << total); ++mask) {
            if (static_cast<std::size_t>(std::popcount(mask)) != a.size()) continue;
            double s = 0.0;
            for (std::size_t i = 0; i < total; ++i) {
                if (mask >> i & 1) s += ranks[i];
            }
            const double u = s - na * (na + 1) / 2;
            ++count;
            switch (options.alternative) {
                case Alternative::two_sided: hits += std::abs(u - mu) >= dev - tol; break;
                case Alternative::less: hits += u <= r.u + tol; break;
                case Alternative::greater: hits += u >= r.u - tol; break;
            }
        }
        r.p = static_cast<double>(hits) / static_cast<double>(count);
        r.exact = true;
        return r;
    }
    if (var <= 0) {
        r.p = 1.0;
        return r;
    }
    switch (options.alternative) {
        case Alternative::two_sided: r.p = std::min(1.0, 2.0 * stats::normal_sf(std::abs(r.z))); break;
        case Alternative::less: r.p = stats::normal_cdf(r.z); break;
        case Alternative::greater: r.p = stats::normal_sf(r.z); break;
    }
    return r;
}

KwResult kruskal_wallis(std::span<const std::vector<double>> groups) {
    if (groups.size() < 2) throw ValidationError("Kruskal-Wallis needs at least two groups");
    std::vector<double> all;
    for (const auto& g : groups) {
        if (g.empty()) throw ValidationError("Kruskal-Wallis groups must be non-empty");
        all.insert(all.end(), g.begin(), g.end());
    }
    for (const double v : all) {
        if (!std::isfinite(v)) throw ValidationError("Kruskal-Wallis needs finite values");
    }
    const auto ranks = stats::midranks(all);
    const double n = static_cast<double>(all.size());
    double s = 0.0;
    std::size_t at = 0;
    for (const auto& g : groups) {
        double r = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) r += ranks[at + i];
        at += g.size();
        const double dev = r / static_cast<double>(g.size()) - (n + 1) / 2;
        s += static_cast<double>(g.size()) * dev * dev;
    }
    KwResult out;
    out.dof = groups.size() - 1;
    const double correction = 1.0 - stats::tie_term(all) / (n * n * n - n);
    if (correction <= 0) return out;
    out.h = 12.0 / (n * (n + 1)) * s / correction;
    out.p = stats::chi2_sf(out.h, static_cast<double>(out.dof));
    return out;
}

std::string_view to_string(EffectBand b) {
    switch (b) {
        case EffectBand::negligible: return "negligible";
        case EffectBand::small: return "small";
        case EffectBand::medium: return "medium";
        case EffectBand::large: return "large";
    }
    return "?";
}

double cohens_d(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2) throw ValidationError("Cohen's d needs at least two values per sample");
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    const double pooled = ((na - 1) * stats::variance(a) + (nb - 1) * stats::variance(b)) / (na + nb - 2);
    if (!(pooled > 0)) throw UndefinedError("Cohen's d is undefined for zero pooled standard deviation");
    return (stats::mean(a) - stats::mean(b)) / std::sqrt(pooled);
}

EffectBand cohens_d_band(double d) {
    const double m = std::abs(d);
    if (m < 0.2) return EffectBand::negligible;
    if (m < 0.5) return EffectBand::small;
    if (m < 0.8) return EffectBand::medium;
    return EffectBand::large;
}

double eta_squared(double h, std::size_t k, std::size_t n) {
    if (n <= k) throw ValidationError("eta squared needs more observations than groups");
    return std::max(0.0, (h - static_cast<double>(k) + 1) / static_cast<double>(n - k));
}

EffectBand eta_squared_band(double e) {
    if (e < 0.01) return EffectBand::negligible;
    if (e < 0.06) return EffectBand::small;
    if (e < 0.14) return EffectBand::medium;
    return EffectBand::large;
}

const SuiteCell* SuiteReport::find(std::string_view hypothesis, Granularity g, std::string_view scope) const {
    for (const auto& c : cells) {
        if (c.hypothesis == hypothesis && c.granularity == g && c.scope == scope) return &c;
    }
    return nullptr;
}

namespace {

using Extract = double (*)(const DerivedFeatures&);

std::vector<double> values_of(std::span<const DerivedFeatures> f, const std::vector<std::size_t>& members, Extract x) {
    std::vector<double> v;
    v.reserve(members.size());
    for (const auto i : members) v.push_back(x(f[i]));
    return v;
}

void two_group_cell(SuiteCell& cell, std::span<const DerivedFeatures> f, const FeatureGroup& non_causal,
                    const FeatureGroup& causal, Extract x, const SuiteOptions& o) {
    cell.test = "MWU";
    cell.n = non_causal.members.size() + causal.members.size();
    if (non_causal.members.empty() || causal.members.empty()) {
        cell.computable = false;
        cell.note = "empty group";
        return;
    }
    const auto a = values_of(f, causal.members, x);
    const auto b = values_of(f, non_causal.members, x);
    const auto r = mann_whitney_u(a, b, o.mwu);
    cell.statistic = r.u;
    cell.p = r.p;
    cell.rejected = r.p < o.alpha;
    if (cell.rejected) {
        cell.effect_kind = "cohens_d";
        try {
            cell.effect_size = cohens_d(a, b);
            cell.effect_band = cohens_d_band(*cell.effect_size);
        } catch (const ValidationError& e) {
            cell.note = e.what();
        }
    }
}

void chi2_cell(SuiteCell& cell, std::span<const DerivedFeatures> f, const FeatureGroup& non_causal,
               const FeatureGroup& causal, const SuiteOptions& o) {
    cell.test = "Chi2";
    cell.n = non_causal.members.size() + causal.members.size();
    if (non_causal.members.empty() || causal.members.empty()) {
        cell.computable = false;
        cell.note = "empty group";
        return;
    }
    std::vector<std::vector<std::int64_t>> counts(o.final_states.size(), std::vector<std::int64_t>(2, 0));
    for (int g = 0; g < 2; ++g) {
        for (const auto i : (g ? causal : non_causal).members) {
            const auto it = std::find(o.final_states.begin(), o.final_states.end(), f[i].consolidated_state);
            counts[static_cast<std::size_t>(it - o.final_states.begin())][static_cast<std::size_t>(g)] += 1;
        }
    }
    try {
        const ContingencyTable t(o.final_states, {"non-causal", "causal"}, counts);
        const auto r = chi2_independence(t);
        cell.statistic = r.statistic;
        cell.p = r.p;
        cell.rejected = r.p < o.alpha;
    } catch (const ValidationError& e) {
        cell.computable = false;
        cell.note = e.what();
    }
}

void kw_cell(SuiteCell& cell, std::span<const DerivedFeatures> f, const std::vector<FeatureGroup>& batches, Extract x,
             const SuiteOptions& o) {
    cell.test = "KW";
    std::vector<std::vector<double>> groups;
    for (const auto& g : batches) {
        if (g.included) groups.push_back(values_of(f, g.members, x));
    }
    for (const auto& g : groups) cell.n += g.size();
    if (groups.size() < 2) {
        cell.computable = false;
        cell.note = fmt::format("{} batch(es) above the minimum size", groups.size());
        return;
    }
    const auto r = kruskal_wallis(groups);
    cell.statistic = r.h;
    cell.p = r.p;
    cell.rejected = r.p < o.alpha;
    if (cell.rejected && cell.n > groups.size()) {
        cell.effect_kind = "eta_squared";
        cell.effect_size = eta_squared(r.h, groups.size(), cell.n);
        cell.effect_band = eta_squared_band(*cell.effect_size);
    }
}

double lead_time_of(const DerivedFeatures& f) { return f.lead_time; }
double volatility_of(const DerivedFeatures& f) { return static_cast<double>(f.volatility); }

}  // namespace

SuiteReport hypothesis_suite(std::span<const DerivedFeatures> features, const SuiteOptions& o) {
    if (features.empty()) throw ValidationError("no features for the hypothesis suite");
    if (o.final_states.size() < 2) throw ValidationError("H2 needs at least two final states");
    validate_bins(o.bins);
    SuiteReport rep;
    rep.alpha = o.alpha;
    rep.records = features.size();

    std::vector<DerivedFeatures> final_only;
    for (const auto& f : features) {
        if (std::find(o.final_states.begin(), o.final_states.end(), f.consolidated_state) != o.final_states.end())
            final_only.push_back(f);
    }
    rep.h2_records = final_only.size();
    // EC = 1, D = 0 in the default configuration.
    std::vector<double> state_code(final_only.size());
    for (std::size_t i = 0; i < final_only.size(); ++i)
        state_code[i] = final_only[i].consolidated_state == o.final_states[0] ? 1.0 : 0.0;

    struct Spec {
        const char* h;
        const char* variable;
        Extract x;
    };
    for (const Spec s : {Spec{"H1", "lead_time", lead_time_of}, Spec{"H2", "consolidated_state", nullptr},
                         Spec{"H3", "volatility", volatility_of}}) {
        const bool h2 = s.x == nullptr;
        const std::span<const DerivedFeatures> data = h2 ? std::span<const DerivedFeatures>(final_only) : features;
        auto base = [&](Granularity g, std::string scope) {
            SuiteCell c;
            c.hypothesis = s.h;
            c.variable = s.variable;
            c.granularity = g;
            c.scope = std::move(scope);
            return c;
        };
        if (data.empty()) {
            for (const auto g : {Granularity::g1, Granularity::g2, Granularity::g3}) {
                auto c = base(g, "all");
                c.computable = false;
                c.note = "no records in the final states";
                rep.cells.push_back(std::move(c));
            }
            continue;
        }
        {
            auto c = base(Granularity::g1, "all");
            const auto g = bin_granularity(data, Granularity::g1, o.bins);
            if (h2) {
                chi2_cell(c, data, g[0], g[1], o);
            } else {
                two_group_cell(c, data, g[0], g[1], s.x, o);
            }
            rep.cells.push_back(std::move(c));
        }
        {
            auto c = base(Granularity::g2, "all");
            const auto g = bin_granularity(data, Granularity::g2, o.bins);
            if (h2) {
                // Categorical outcome coded as 0/1 for the rank test.
                std::vector<DerivedFeatures> numeric(data.begin(), data.end());
                for (std::size_t i = 0; i < numeric.size(); ++i) numeric[i].lead_time = state_code[i];
                kw_cell(c, numeric, g, lead_time_of, o);
                c.note = fmt::format("outcome coded {}=1, {}=0", o.final_states[0], o.final_states[1]);
            } else {
                kw_cell(c, data, g, s.x, o);
            }
            rep.cells.push_back(std::move(c));
        }
        const auto g3 = bin_granularity(data, Granularity::g3, o.bins);
        for (std::size_t b = 0; b < o.bins.sentence_bins.size(); ++b) {
            auto c = base(Granularity::g3, o.bins.sentence_bins[b].label());
            if (h2) {
                chi2_cell(c, data, g3[2 * b], g3[2 * b + 1], o);
            } else {
                two_group_cell(c, data, g3[2 * b], g3[2 * b + 1], s.x, o);
            }
            rep.cells.push_back(std::move(c));
        }
    }
    return rep;
}

nlohmann::json suite_to_json(const SuiteReport& r) {
    auto cells = nlohmann::json::array();
    for (const auto& c : r.cells) {
        nlohmann::json j = {{"hypothesis", c.hypothesis}, {"variable", c.variable},
                            {"granularity", to_string(c.granularity)}, {"scope", c.scope},
                            {"test", c.test}, {"computable", c.computable},
                            {"n", c.n}};
        if (c.computable) {
            j["statistic"] = c.statistic;
            j["p"] = c.p;
            j["rejected"] = c.rejected;
        }
        if (c.effect_size) {
            j["effect_size"] = {{"kind", c.effect_kind}, {"value", *c.effect_size}, {"band", to_string(*c.effect_band)}};
        }
        if (!c.note.empty()) j["note"] = c.note;
        cells.push_back(std::move(j));
    }
    return {{"alpha", r.alpha}, {"records", r.records}, {"h2_records", r.h2_records}, {"cells", cells}};
}

std::string format_suite(const SuiteReport& r) {
    std::string out = fmt::format("{:<4} {:<4} {:<12} {:<5} {:>8} {:>12} {:>10}  {}\n", "Hyp", "Gran", "Scope", "Test", "n",
                                  "p", "effect", "note");
    for (const auto& c : r.cells) {
        const std::string p = c.computable ? fmt::format("{}{:.4f}", c.rejected ? "*" : "", c.p) : "n/a";
        const std::string e = c.effect_size ? fmt::format("{:.4f}", *c.effect_size) : "";
        out += fmt::format("{:<4} {:<4} {:<12} {:<5} {:>8} {:>12} {:>10}  {}\n", c.hypothesis, to_string(c.granularity),
                           c.scope, c.test, c.n, p, e, c.note);
    }
    out += fmt::format("alpha = {}, * marks p < alpha\n", r.alpha);
    return out;
}

void write_violin_csv(std::span<const DerivedFeatures> features, const BinOptions& bins, std::ostream& out) {
    out << "variable,granularity,group,kind,x,y\n";
    const std::vector<std::pair<const char*, Extract>> vars = {{"lead_time", lead_time_of}, {"volatility", volatility_of}};
    for (const auto g : {Granularity::g1, Granularity::g2}) {
        const auto groups = bin_granularity(features, g, bins);
        for (const auto& [name, x] : vars) {
            for (const auto& grp : groups) {
                if (grp.members.empty()) continue;
                auto v = values_of(features, grp.members, x);
                std::sort(v.begin(), v.end());
                const auto quantile = [&](double q) {
                    const double pos = q * static_cast<double>(v.size() - 1);
                    const auto lo = static_cast<std::size_t>(std::floor(pos));
                    const auto hi = std::min(lo + 1, v.size() - 1);
                    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
                };
                for (const double q : {0.0, 0.25, 0.5, 0.75, 1.0})
                    out << fmt::format("{},{},\"{}\",quantile,{},{}\n", name, to_string(g), grp.label, q, quantile(q));
                const double sd = std::sqrt(stats::variance(v));
                const double iqr = quantile(0.75) - quantile(0.25);
                double spread = std::min(sd, iqr / 1.34);
                if (!(spread > 0)) spread = sd;
                if (!(spread > 0)) continue;
                const double bw = 0.9 * spread * std::pow(static_cast<double>(v.size()), -0.2);
                constexpr int kPoints = 32;
                const double lo = v.front() - 3 * bw, hi = v.back() + 3 * bw;
                for (int k = 0; k < kPoints; ++k) {
                    const double at = lo + (hi - lo) * k / (kPoints - 1);
                    double d = 0.0;
                    for (const double s : v) d += std::exp(-0.5 * (at - s) * (at - s) / (bw * bw));
                    d /= static_cast<double>(v.size()) * bw * std::sqrt(2 * std::numbers::pi);
                    out << fmt::format("{},{},\"{}\",density,{},{}\n", name, to_string(g), grp.label, at, d);
                }
            }
        }
    }
}

nlohmann::json features_to_json(const DerivedFeatures& f) {
    return {{"id", f.id},
            {"lead_time", f.lead_time},
            {"volatility", f.volatility},
            {"consolidated_state", f.consolidated_state},
            {"sentence_count", f.sentence_count},
            {"causal_count", f.causal_count}};
}

}  // namespace creq
