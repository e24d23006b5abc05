#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "doctest.h"
#include "test_support.hpp"

#include "creq/cue_lexicon.hpp"
#include "creq/detector.hpp"
#include "creq/error.hpp"
#include "creq/lifecycle.hpp"
#include "creq/rng.hpp"

using namespace creq;

namespace {

const TextModel& rule_detector() {
    static const TextModel m = TextModel::rule_based(load_lexicon(testing::data_file("cue_lexicon.csv")));
    return m;
}

RequirementRecord record(std::string id, std::string description, std::vector<StateEntry> log) {
    return {std::move(id), std::move(description), "2020-01-01", std::move(log)};
}

DerivedFeatures feat(std::size_t sentences, std::size_t causal, double lead = 1, std::string state = "EC") {
    DerivedFeatures f;
    f.id = "r";
    f.sentence_count = sentences;
    f.causal_count = causal;
    f.lead_time = lead;
    f.volatility = 2;
    f.consolidated_state = std::move(state);
    return f;
}

// U by direct pairwise comparison, independent of ranking.
double pairwise_u(const std::vector<double>& a, const std::vector<double>& b) {
    double u = 0;
    for (const double x : a) {
        for (const double y : b) u += x > y ? 1.0 : (x == y ? 0.5 : 0.0);
    }
    return u;
}

// Exact two-sided permutation p via std::next_permutation over group labels.
double oracle_exact_p(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> all(a);
    all.insert(all.end(), b.begin(), b.end());
    std::vector<int> lab(all.size(), 0);
    std::fill(lab.begin() + static_cast<std::ptrdiff_t>(b.size()), lab.end(), 1);  // 1 = sample a
    const double mu = static_cast<double>(a.size() * b.size()) / 2;
    const double obs = std::abs(pairwise_u(a, b) - mu);
    std::size_t hits = 0, total = 0;
    do {
        std::vector<double> x, y;
        for (std::size_t i = 0; i < all.size(); ++i) (lab[i] ? x : y).push_back(all[i]);
        hits += std::abs(pairwise_u(x, y) - mu) >= obs - 1e-9;
        ++total;
    } while (std::next_permutation(lab.begin(), lab.end()));
    return static_cast<double>(hits) / static_cast<double>(total);
}

std::vector<DerivedFeatures> simulated(std::uint64_t seed, std::size_t n, double causal_factor) {
    Rng rng(seed);
    std::vector<DerivedFeatures> out;
    for (std::size_t i = 0; i < n; ++i) {
        const bool causal = i % 2 == 1;
        auto f = feat(1 + rng.below(10), causal ? 1 + rng.below(6) : 0);
        f.lead_time = std::exp(std::log(60.0) + 0.5 * rng.normal()) * (causal ? causal_factor : 1.0);
        f.volatility = 2 + rng.below(8);
        f.consolidated_state = rng.bernoulli(0.5) ? "EC" : "D";
        out.push_back(f);
    }
    return out;
}

}  // namespace

TEST_CASE("iso-8601 timestamps") {
    CHECK(parse_iso8601("1970-01-01") == 0.0);
    CHECK(parse_iso8601("1970-01-02") == 86400.0);
    CHECK(parse_iso8601("2000-03-01") - parse_iso8601("2000-02-28") == 2 * 86400.0);
    CHECK(parse_iso8601("2019-01-13T08:30:00+01:00") == parse_iso8601("2019-01-13T07:30:00Z"));
    CHECK(parse_iso8601("2019-01-13 07:30") == parse_iso8601("2019-01-13T07:30:00"));
    CHECK(parse_iso8601("2019-01-13T07:30:00.5-0030") == doctest::Approx(parse_iso8601("2019-01-13T08:00:00.5Z")));
    CHECK(parse_iso8601("2024-01-01") == 1704067200.0);
    for (const char* bad : {"2021-02-29", "2020-13-01", "2020-1-01", "yesterday", "2020-01-01T25:00", "2020-01-01Tx"})
        CHECK_THROWS_AS(parse_iso8601(bad), ValidationError);
}

TEST_CASE("derived features") {
    const auto r = record("R1", "If the process fails, an error message is shown. The database stores user records.",
                          {{"a", "2020-05-01T00:00:00Z", "NF"}, {"b", "2020-05-04T00:00:00Z", "EC"}});
    const auto f = derive_features(r, rule_detector());
    CHECK(f.lead_time == 3.0);
    CHECK(f.volatility == 2);
    CHECK(f.consolidated_state == "EC");
    CHECK(f.sentence_count == 2);
    CHECK(f.causal_count == 1);

    const auto one = derive_features(record("R2", "Text.", {{"a", "2020-05-01", "NF"}}), rule_detector());
    CHECK(one.lead_time == 0.0);
    CHECK(one.volatility == 1);

    CHECK_THROWS_AS(derive_features(record("R3", "x", {}), rule_detector()), ValidationError);
    CHECK_THROWS_AS(derive_features(record("R4", "x", {{"a", "not a date", "NF"}}), rule_detector()), ValidationError);
    CHECK_THROWS_AS(derive_features(record("R5", "x", {{"a", "2020-05-02", "NF"}, {"a", "2020-05-01", "EC"}}), rule_detector()),
                    ValidationError);
}

TEST_CASE("pre-processing removes exactly the planted records") {
    const auto records = load_requirements(testing::fixture("requirements_preprocess.jsonl"));
    REQUIRE(records.size() == 10);
    PreprocessReport rep;
    const auto kept = preprocess(records, {"migration"}, &rep);
    CHECK(rep.input == 10);
    CHECK(rep.missing_log == 2);
    CHECK(rep.invalid_author == 1);
    CHECK(rep.single_entry == 3);
    CHECK(rep.kept == 4);
    std::vector<std::string> ids;
    for (const auto& r : kept) ids.push_back(r.id);
    CHECK(ids == std::vector<std::string>{"R01", "R02", "R09", "R10"});

    const auto again = preprocess(kept, {"migration"}, &rep);
    CHECK(again.size() == 4);
    CHECK(rep.missing_log + rep.invalid_author + rep.single_entry == 0);

    preprocess(records, {}, &rep);
    CHECK(rep.invalid_author == 0);
    CHECK(rep.kept == 5);

    for (const auto& f : derive_all(kept, rule_detector())) {
        CHECK(f.lead_time >= 0.0);
        CHECK(f.volatility >= 2);
        CHECK(f.causal_count <= f.sentence_count);
    }
    const auto r9 = derive_features(kept[2], rule_detector());
    CHECK(r9.sentence_count == 2);
    CHECK(r9.causal_count == 2);
    CHECK(r9.lead_time == doctest::Approx(33.5));
}

TEST_CASE("requirements file errors") {
    std::istringstream dup(R"({"id":"a","state_log":[]}
{"id":"a","state_log":[]})");
    CHECK_THROWS_AS(parse_requirements_jsonl(dup), ParseError);
    std::istringstream bad(R"({"id":"a","state_log":[{"author":"x","timestamp":"2020-01-01"}]})");
    CHECK_THROWS_AS(parse_requirements_jsonl(bad), ParseError);
    CHECK_THROWS_AS(load_requirements("/nonexistent/req.jsonl"), IoError);
}

TEST_CASE("granularity boundaries") {
    const std::vector<DerivedFeatures> f = {feat(3, 0), feat(4, 1), feat(7, 3), feat(8, 4), feat(6, 1), feat(9, 5)};
    const auto g1 = bin_granularity(f, Granularity::g1);
    CHECK(g1[0].members == std::vector<std::size_t>{0});
    CHECK(g1[1].members == std::vector<std::size_t>{1, 2, 3, 4, 5});

    BinOptions loose;
    loose.min_batch = 0;
    const auto g2 = bin_granularity(f, Granularity::g2, loose);
    REQUIRE(g2.size() == 3);
    CHECK(g2[0].label == "[0]");
    CHECK(g2[1].label == "[1, 3]");
    CHECK(g2[1].members == std::vector<std::size_t>{1, 2, 4});
    CHECK(g2[2].label == "[4, 6]");
    CHECK(g2[2].members == std::vector<std::size_t>{3, 5});

    const auto g3 = bin_granularity(f, Granularity::g3);
    REQUIRE(g3.size() == 6);
    CHECK(g3[0].label == "[1, 3] non-causal");
    CHECK(g3[0].members == std::vector<std::size_t>{0});
    CHECK(g3[3].label == "[4, 7] causal");
    CHECK(g3[3].members == std::vector<std::size_t>{1, 2, 4});
    CHECK(g3[5].label == "[8, max] causal");
    CHECK(g3[5].members == std::vector<std::size_t>{3, 5});
}

TEST_CASE("small batches are excluded from testing") {
    std::vector<DerivedFeatures> f;
    for (int i = 0; i < 11; ++i) f.push_back(feat(2, 0));
    for (int i = 0; i < 10; ++i) f.push_back(feat(2, 2));
    const auto g2 = bin_granularity(f, Granularity::g2);
    CHECK(g2[0].included);
    CHECK_FALSE(g2[1].included);
    BinOptions bad;
    bad.sentence_bins = {{1, 3}, {5, 7}, {8, std::numeric_limits<std::size_t>::max()}};
    CHECK_THROWS_AS(bin_granularity(f, Granularity::g3, bad), ValidationError);
    bad.sentence_bins = {{1, 3}};
    CHECK_THROWS_AS(bin_granularity(f, Granularity::g1, bad), ValidationError);
    CHECK_THROWS_AS(bin_granularity({}, Granularity::g1), ValidationError);
}

TEST_CASE("binning is a partition") {
    Rng rng(12);
    std::vector<DerivedFeatures> f;
    for (int i = 0; i < 500; ++i) f.push_back(feat(rng.below(15), rng.below(12)));
    for (const auto mode : {Granularity::g1, Granularity::g2, Granularity::g3}) {
        std::vector<int> seen(f.size(), 0);
        for (const auto& g : bin_granularity(f, mode)) {
            for (const auto i : g.members) ++seen[i];
        }
        CHECK(std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; }));
    }
}

TEST_CASE("Mann-Whitney U examples") {
    const std::vector<double> a = {1, 2, 3};
    auto r = mann_whitney_u(a, a);
    CHECK(r.u == 4.5);
    CHECK(r.p == doctest::Approx(1.0));
    const std::vector<double> lo = {1, 2}, hi = {3, 4};
    r = mann_whitney_u(lo, hi);
    CHECK(r.u == 0.0);
    CHECK(r.exact);
    CHECK(r.p == doctest::Approx(1.0 / 3));
    CHECK(mann_whitney_u(hi, lo).p == r.p);
    CHECK(mann_whitney_u(lo, hi, {Alternative::less, 12}).p == doctest::Approx(1.0 / 6));
    CHECK(mann_whitney_u(lo, hi, {Alternative::greater, 12}).p == doctest::Approx(1.0));
    CHECK_THROWS_AS(mann_whitney_u({}, hi), ValidationError);
}

TEST_CASE("Mann-Whitney U identity and symmetry with ties") {
    Rng rng(31);
    for (int t = 0; t < 500; ++t) {
        std::vector<double> a(1 + rng.below(15)), b(1 + rng.below(15));
        for (auto& v : a) v = static_cast<double>(rng.below(6));
        for (auto& v : b) v = static_cast<double>(rng.below(6));
        const auto r = mann_whitney_u(a, b);
        const auto s = mann_whitney_u(b, a);
        CHECK(r.u + r.u_b == doctest::Approx(static_cast<double>(a.size() * b.size())));
        CHECK(r.u == doctest::Approx(pairwise_u(a, b)));
        CHECK(s.u == doctest::Approx(r.u_b));
        CHECK(s.p == doctest::Approx(r.p).epsilon(1e-12));
        CHECK(r.p >= 0.0);
        CHECK(r.p <= 1.0);
    }
}

TEST_CASE("exact Mann-Whitney p agrees with a permutation oracle") {
    Rng rng(77);
    for (std::size_t n = 2; n <= 12; ++n) {
        for (std::size_t na = 1; na < n; ++na) {
            for (int rep = 0; rep < 3; ++rep) {
                std::vector<double> pool(n);
                std::iota(pool.begin(), pool.end(), 1.0);
                rng.shuffle(std::span<double>(pool));
                const std::vector<double> a(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(na));
                const std::vector<double> b(pool.begin() + static_cast<std::ptrdiff_t>(na), pool.end());
                const auto r = mann_whitney_u(a, b);
                CHECK(r.exact);
                CHECK(r.p == doctest::Approx(oracle_exact_p(a, b)).epsilon(1e-12));
            }
        }
    }
}

static double worst_approx_gap(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    double worst = 0.0;
    for (int t = 0; t < 200; ++t) {
        std::vector<double> a(n), b(n);
        for (auto& v : a) v = rng.normal();
        for (auto& v : b) v = rng.normal() + 0.3;
        const auto approx = mann_whitney_u(a, b);
        CHECK_FALSE(approx.exact);
        const auto exact = mann_whitney_u(a, b, {Alternative::two_sided, 20});
        CHECK(exact.exact);
        worst = std::max(worst, std::abs(approx.p - exact.p));
    }
    return worst;
}

TEST_CASE("normal approximation is used above the exact limit and converges") {
    const double small = worst_approx_gap(7, 5);
    const double larger = worst_approx_gap(10, 5);
    CHECK(larger < small);
    CHECK(larger < 0.05);
}

TEST_CASE("Kruskal-Wallis examples") {
    const std::vector<std::vector<double>> g = {{1, 2}, {3, 4}, {5, 6}};
    const auto r = kruskal_wallis(g);
    CHECK(r.h == doctest::Approx(32.0 / 7).epsilon(1e-12));
    CHECK(r.dof == 2);
    CHECK(r.p == doctest::Approx(std::exp(-16.0 / 7)).epsilon(1e-12));
    CHECK(std::round(r.p * 1000) / 1000 == 0.102);
    const std::vector<std::vector<double>> same = {{1, 2, 3}, {1, 2, 3}};
    CHECK(kruskal_wallis(same).h == 0.0);
    CHECK(kruskal_wallis(same).p == doctest::Approx(1.0));
    const std::vector<std::vector<double>> tied = {{4, 4}, {4, 4, 4}};
    CHECK(kruskal_wallis(tied).h == 0.0);
    CHECK(kruskal_wallis(tied).p == 1.0);
    const std::vector<std::vector<double>> one = {{1, 2}};
    CHECK_THROWS_AS(kruskal_wallis(one), ValidationError);
}

TEST_CASE("Kruskal-Wallis on two groups equals the squared Mann-Whitney z") {
    Rng rng(8);
    for (int t = 0; t < 500; ++t) {
        std::vector<double> a(2 + rng.below(20)), b(2 + rng.below(20));
        for (auto& v : a) v = static_cast<double>(rng.below(t % 2 ? 5 : 1000));
        for (auto& v : b) v = static_cast<double>(rng.below(t % 2 ? 5 : 1000));
        const std::vector<std::vector<double>> g = {a, b};
        const auto kw = kruskal_wallis(g);
        const auto mw = mann_whitney_u(a, b, {Alternative::two_sided, 0});
        CHECK(std::abs(kw.h - mw.z * mw.z) < 1e-9 * std::max(1.0, kw.h));
        CHECK(std::abs(kw.p - mw.p) < 1e-9);
        const std::vector<std::vector<double>> swapped = {b, a};
        CHECK(kruskal_wallis(swapped).p == doctest::Approx(kw.p).epsilon(1e-12));
    }
}

TEST_CASE("effect sizes") {
    const std::vector<double> a = {1, 2, 3}, b = {2, 3, 4}, c = {3, 2, 1};
    CHECK(cohens_d(a, b) == -1.0);
    CHECK(cohens_d(b, a) == 1.0);
    CHECK(cohens_d(a, c) == 0.0);
    CHECK(cohens_d_band(-1.0) == EffectBand::large);
    CHECK(cohens_d_band(0.19) == EffectBand::negligible);
    CHECK(cohens_d_band(0.2) == EffectBand::small);
    CHECK(cohens_d_band(0.5) == EffectBand::medium);
    const std::vector<double> z0 = {0, 0}, z1 = {1, 1};
    CHECK_THROWS_AS(cohens_d(z0, z1), ValidationError);
    const std::vector<double> single = {1};
    CHECK_THROWS_AS(cohens_d(single, a), ValidationError);

    CHECK(eta_squared(2.0, 3, 10) == 0.0);
    CHECK(eta_squared(4.571, 3, 6) == doctest::Approx(2.571 / 3).epsilon(1e-12));
    CHECK(eta_squared(0.5, 3, 10) == 0.0);
    CHECK_THROWS_AS(eta_squared(1.0, 3, 3), ValidationError);
    CHECK(eta_squared_band(0.001) == EffectBand::negligible);
    CHECK(eta_squared_band(0.857) == EffectBand::large);
}

TEST_CASE("H2 uses only records in the final states") {
    std::vector<DerivedFeatures> f = {feat(2, 1, 1, "EC"), feat(2, 0, 1, "EC"), feat(2, 1, 1, "D"), feat(2, 0, 1, "M1"),
                                      feat(2, 1, 1, "M1")};
    const auto rep = hypothesis_suite(f);
    CHECK(rep.records == 5);
    CHECK(rep.h2_records == 3);
    const auto* h2 = rep.find("H2", Granularity::g1);
    REQUIRE(h2 != nullptr);
    CHECK(h2->n == 3);
    CHECK(h2->test == "Chi2");
    // With 5 records no G2 batch is large enough; those cells are marked, the suite continues.
    CHECK_FALSE(rep.find("H1", Granularity::g2)->computable);
    CHECK(rep.find("H1", Granularity::g1)->computable);
    CHECK(rep.cells.size() == 15);
    CHECK_FALSE(rep.find("H1", Granularity::g3, "[4, 7]")->computable);
    CHECK(suite_to_json(rep)["cells"].size() == 15);
    CHECK(format_suite(rep).find("H3") != std::string::npos);
}

TEST_CASE("planted lead-time effect is detected and the null holds its size") {
    std::size_t power_hits = 0, null_hits = 0;
    constexpr std::size_t kSeeds = 1000;
    for (std::size_t s = 0; s < kSeeds; ++s) {
        const auto shifted = simulated(derive_seed(100, s), 200, 0.7);
        const auto c = hypothesis_suite(shifted).find("H1", Granularity::g1);
        power_hits += c->rejected;
        const auto null = simulated(derive_seed(200, s), 200, 1.0);
        null_hits += hypothesis_suite(null).find("H1", Granularity::g1)->rejected;
    }
    const double power = static_cast<double>(power_hits) / kSeeds;
    const double size = static_cast<double>(null_hits) / kSeeds;
    CHECK(power >= 0.95);
    CHECK(std::abs(size - 0.05) <= 0.02);
}

TEST_CASE("effect sizes attach only to rejected cells") {
    const auto f = simulated(3, 400, 0.6);
    const auto rep = hypothesis_suite(f);
    for (const auto& c : rep.cells) {
        if (c.effect_size) CHECK(c.rejected);
    }
    const auto* h1 = rep.find("H1", Granularity::g1);
    CHECK(h1->rejected);
    REQUIRE(h1->effect_size);
    CHECK(*h1->effect_size < 0);
    CHECK(h1->effect_kind == "cohens_d");
}

TEST_CASE("violin data export") {
    const auto f = simulated(4, 100, 1.0);
    std::ostringstream out;
    write_violin_csv(f, {}, out);
    const auto s = out.str();
    CHECK(s.rfind("variable,granularity,group,kind,x,y\n", 0) == 0);
    CHECK(s.find("lead_time,G1,\"causal\",quantile,0.5,") != std::string::npos);
    CHECK(s.find("volatility,G2,\"[1, 3]\",density,") != std::string::npos);
}
