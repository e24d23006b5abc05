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

#ifndef CREQ_LIFECYCLE_HPP
#define CREQ_LIFECYCLE_HPP

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "creq/detector.hpp"
#include "creq/parallel.hpp"

namespace creq {

/// Seconds since 1970-01-01T00:00:00Z. Accepts YYYY-MM-DD with an optional
/// time part (T or space, HH:MM[:SS[.fff]]) and offset (Z, +HH:MM, +HHMM).
/// A missing offset means UTC. Throws ValidationError.
double parse_iso8601(std::string_view s);

struct StateEntry {
    std::string author;
    std::string timestamp;  ///< ISO-8601, kept verbatim
    std::string state_code;
};

struct RequirementRecord {
    std::string id;
    std::string description;
    std::string creation_date;
    /// nullopt when the export carries no log at all.
    std::optional<std::vector<StateEntry>> state_log;
};

std::vector<RequirementRecord> parse_requirements_jsonl(std::istream& in, const std::string& source = "<requirements>");
std::vector<RequirementRecord> load_requirements(const std::filesystem::path& path);
nlohmann::json requirement_to_json(const RequirementRecord& r);

struct DerivedFeatures {
    std::string id;
    double lead_time = 0.0;  ///< days, fractional
    std::size_t volatility = 0;
    std::string consolidated_state;
    std::size_t sentence_count = 0;
    std::size_t causal_count = 0;
};

/// Throws ValidationError for an empty log, unparseable or descending timestamps.
DerivedFeatures derive_features(const RequirementRecord& record, const TextModel& detector);
std::vector<DerivedFeatures> derive_all(std::span<const RequirementRecord> records, const TextModel& detector,
                                        Execution exec = Execution::parallel);

struct PreprocessOptions {
    /// Logs whose every entry has this author are dropped; empty disables the filter.
    std::string invalid_author;
};

struct PreprocessReport {
    std::size_t input = 0;
    std::size_t missing_log = 0;
    std::size_t invalid_author = 0;
    std::size_t single_entry = 0;
    std::size_t kept = 0;
};

/// Applies, in order: missing log, invalid-author-only log, single-entry log.
std::vector<RequirementRecord> preprocess(std::span<const RequirementRecord> records, const PreprocessOptions& options,
                                          PreprocessReport* report = nullptr);

enum class Granularity { g1, g2, g3 };
std::string_view to_string(Granularity g);
Granularity parse_granularity(std::string_view s);

struct CountRange {
    std::size_t lo = 0;
    std::size_t hi = std::numeric_limits<std::size_t>::max();  ///< inclusive; max means open-ended

    [[nodiscard]] bool contains(std::size_t v) const noexcept { return v >= lo && v <= hi; }
    [[nodiscard]] std::string label() const;
};

struct BinOptions {
    std::size_t batch_width = 3;
    std::vector<CountRange> sentence_bins = {{1, 3}, {4, 7}, {8, std::numeric_limits<std::size_t>::max()}};
    /// A batch takes part in testing only when it has more than this many records.
    std::size_t min_batch = 10;
};

/// Throws ValidationError unless the bins are ascending, contiguous and open-ended.
void validate_bins(const BinOptions& options);

struct FeatureGroup {
    std::string label;                 ///< "[0]", "[1, 3]", "non-causal", "causal"
    std::optional<CountRange> causal_range;
    std::optional<CountRange> sentence_bin;  ///< g3 only
    std::vector<std::size_t> members;  ///< indices into the features list
    bool included = true;              ///< g2 batches at or below min_batch are excluded
};

/// Every record lands in exactly one group. Sentence counts below the first
/// bin join the first bin. Groups come in ascending count order; under g3
/// each sentence bin contributes its non-causal group then its causal group.
std::vector<FeatureGroup> bin_granularity(std::span<const DerivedFeatures> features, Granularity mode,
                                          const BinOptions& options = {});

enum class Alternative { two_sided, less, greater };

struct MwuOptions {
    Alternative alternative = Alternative::two_sided;
    /// Exact permutation p when n_a + n_b <= exact_limit.
    std::size_t exact_limit = 12;
};

struct MwuResult {
    double u = 0.0;    ///< for sample a
    double u_b = 0.0;  ///< n_a * n_b - u
    double z = 0.0;    ///< normal score (0 when the variance vanishes)
    double p = 1.0;
    bool exact = false;
};

/// Midrank ties; tie-corrected variance, no continuity correction. "less" means a tends to be smaller.
MwuResult mann_whitney_u(std::span<const double> a, std::span<const double> b, const MwuOptions& options = {});

struct KwResult {
    double h = 0.0;
    std::size_t dof = 0;
    double p = 1.0;
};

/// Tie-corrected H; all values tied gives H = 0.
KwResult kruskal_wallis(std::span<const std::vector<double>> groups);

enum class EffectBand { negligible, small, medium, large };
std::string_view to_string(EffectBand b);

/// (mean_a - mean_b) / pooled SD. Throws for samples under 2 or zero pooled SD.
double cohens_d(std::span<const double> a, std::span<const double> b);
/// |d| at 0.2 / 0.5 / 0.8.
EffectBand cohens_d_band(double d);
/// (H - k + 1) / (n - k), clipped at 0. Throws for n <= k.
double eta_squared(double h, std::size_t k, std::size_t n);
/// 0.01 / 0.06 / 0.14.
EffectBand eta_squared_band(double eta2);

struct SuiteOptions {
    double alpha = 0.05;
    BinOptions bins;
    MwuOptions mwu;
    /// H2 keeps only records whose consolidated state is one of these; the first codes as 1.
    std::vector<std::string> final_states = {"EC", "D"};
};

struct SuiteCell {
    std::string hypothesis;   ///< H1, H2, H3
    std::string variable;     ///< lead_time, consolidated_state, volatility
    Granularity granularity = Granularity::g1;
    std::string scope;        ///< sentence bin label for g3, "all" otherwise
    std::string test;         ///< MWU, KW, Chi2
    bool computable = true;
    std::string note;
    double statistic = 0.0;
    double p = 1.0;
    std::size_t n = 0;
    bool rejected = false;
    std::optional<double> effect_size;
    std::string effect_kind;  ///< cohens_d, eta_squared
    std::optional<EffectBand> effect_band;
};

struct SuiteReport {
    double alpha = 0.05;
    std::size_t records = 0;
    std::size_t h2_records = 0;
    std::vector<SuiteCell> cells;

    [[nodiscard]] const SuiteCell* find(std::string_view hypothesis, Granularity g, std::string_view scope = "all") const;
};

SuiteReport hypothesis_suite(std::span<const DerivedFeatures> features, const SuiteOptions& options = {});
nlohmann::json suite_to_json(const SuiteReport& report);
std::string format_suite(const SuiteReport& report);

/// Violin data for lead time and volatility per G1 and G2 group:
/// variable,granularity,group,kind,x,y with kind "quantile" (x = probability)
/// or "density" (x = value, Gaussian kernel, Silverman bandwidth).
void write_violin_csv(std::span<const DerivedFeatures> features, const BinOptions& bins, std::ostream& out);

nlohmann::json features_to_json(const DerivedFeatures& f);

}  // namespace creq

#endif  // CREQ_LIFECYCLE_HPP
