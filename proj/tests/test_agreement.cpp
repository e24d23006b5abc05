#include <cmath>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "test_support.hpp"

#include "creq/agreement.hpp"
#include "creq/error.hpp"
#include "creq/rng.hpp"

using namespace creq;

namespace {

ConfusionMatrix m2(std::int64_t a00, std::int64_t a01, std::int64_t a10, std::int64_t a11) {
    return ConfusionMatrix::from_rows({{a00, a01}, {a10, a11}});
}

// Defining formulas evaluated directly from the four cells.
double kappa_oracle(double a, double b, double c, double d) {
    const double n = a + b + c + d;
    const double po = (a + d) / n;
    const double pe = ((a + b) / n) * ((a + c) / n) + ((c + d) / n) * ((b + d) / n);
    return (po - pe) / (1 - pe);
}

double ac1_oracle(double a, double b, double c, double d) {
    const double n = a + b + c + d;
    const double po = (a + d) / n;
    const double pi1 = ((c + d) / n + (b + d) / n) / 2;
    const double pg = 2 * pi1 * (1 - pi1);
    return (po - pg) / (1 - pg);
}

CausalLabelRecord causal_label(const std::string& sid, const std::string& who) {
    CausalLabelRecord r;
    r.sentence_id = sid;
    r.annotator = who;
    r.causal = true;
    r.is_explicit = r.marked = r.single_sentence = r.single_cause = r.single_effect = true;
    r.event_chain = false;
    r.relationship = Relationship::cause;
    r.temporality = Temporality::before;
    return r;
}

}  // namespace

TEST_CASE("build_confusion counts pairs") {
    const auto cm = build_confusion({{1, 1}, {0, 0}, {0, 1}});
    CHECK(cm.at(0, 0) == 1);
    CHECK(cm.at(0, 1) == 1);
    CHECK(cm.at(1, 0) == 0);
    CHECK(cm.at(1, 1) == 1);
    CHECK(cm.total() == 3);
    std::vector<std::pair<std::size_t, std::size_t>> off(17, {1, 0});
    const auto o = build_confusion(off);
    CHECK(o.at(1, 0) == 17);
    CHECK(o.trace() == 0);
    CHECK_THROWS_AS(build_confusion({}), ValidationError);
    CHECK_THROWS_AS(build_confusion({{0, 2}}), ValidationError);
}

TEST_CASE("Causality and Marked rows") {
    const auto causal = m2(2034, 193, 274, 499);
    CHECK(percent_agreement(causal) == doctest::Approx(0.844).epsilon(0.0006));
    CHECK(std::fabs(cohen_kappa(causal) - 0.579) <= 0.001);
    CHECK(std::fabs(gwet_ac1(causal) - 0.753) <= 0.001);
    const auto marked = m2(1, 22, 12, 464);
    CHECK(std::fabs(percent_agreement(marked) - 0.932) <= 0.001);
    CHECK(std::fabs(cohen_kappa(marked) - 0.023) <= 0.001);
    CHECK(std::fabs(gwet_ac1(marked) - 0.926) <= 0.001);
}

TEST_CASE("perfect diagonal") {
    const auto cm = m2(5, 0, 0, 7);
    CHECK(percent_agreement(cm) == 1.0);
    CHECK(cohen_kappa(cm) == 1.0);
    CHECK(gwet_ac1(cm) == 1.0);
    const auto one = m2(0, 0, 0, 4);
    CHECK_THROWS_AS(cohen_kappa(one), UndefinedError);
    CHECK(gwet_ac1(one) == 1.0);
    CHECK_THROWS_AS(percent_agreement(ConfusionMatrix(2)), UndefinedError);
}

TEST_CASE("Landis-Koch bands") {
    CHECK(interpret_landis_koch(0.753) == AgreementBand::substantial);
    CHECK(to_string(interpret_landis_koch(-0.1)) == "no agreement");
    CHECK(interpret_landis_koch(0.21) == AgreementBand::fair);
    CHECK(interpret_landis_koch(0.0) == AgreementBand::none);
    CHECK(interpret_landis_koch(0.2) == AgreementBand::slight);
    CHECK(interpret_landis_koch(0.81) == AgreementBand::almost_perfect);
    CHECK(interpret_landis_koch(1.0) == AgreementBand::almost_perfect);
    CHECK_THROWS_AS(interpret_landis_koch(1.01), ValidationError);
}

TEST_CASE("random matrices: formulas, bounds, symmetry, diagonal iff 1") {
    Rng rng(2024);
    int checked = 0;
    for (int trial = 0; trial < 5000; ++trial) {
        const auto total = 1 + static_cast<std::int64_t>(rng.below(50));
        std::int64_t c[4] = {0, 0, 0, 0};
        for (std::int64_t i = 0; i < total; ++i) ++c[rng.below(4)];
        const auto cm = m2(c[0], c[1], c[2], c[3]);
        const double po = percent_agreement(cm);
        const double ac1 = gwet_ac1(cm);
        CHECK(ac1 == doctest::Approx(ac1_oracle(c[0], c[1], c[2], c[3])).epsilon(1e-12));
        CHECK(ac1 <= po + 1e-15);
        CHECK(ac1 == doctest::Approx(gwet_ac1(cm.transposed())).epsilon(1e-12));
        CHECK(po == percent_agreement(cm.transposed()));
        CHECK((ac1 == 1.0) == cm.is_diagonal());
        if (kappa_chance_agreement(cm) < 1.0) {
            const double k = cohen_kappa(cm);
            CHECK(std::fabs(k - kappa_oracle(c[0], c[1], c[2], c[3])) <= 1e-12);
            CHECK(k <= po + 1e-15);
            CHECK(std::fabs(k - cohen_kappa(cm.transposed())) <= 1e-12);
            CHECK((k == doctest::Approx(1.0).epsilon(1e-15)) == cm.is_diagonal());
            ++checked;
        }
    }
    CHECK(checked > 4000);
}

TEST_CASE("multi-category AC1 uses the 1/(r-1) chance term") {
    const auto cm = ConfusionMatrix::from_rows({{10, 2, 1}, {3, 12, 2}, {0, 1, 9}});
    const double n = 40;
    const double rows[3] = {13 / n, 17 / n, 10 / n};
    const double cols[3] = {13 / n, 15 / n, 12 / n};
    double s = 0;
    for (int i = 0; i < 3; ++i) {
        const double pi = (rows[i] + cols[i]) / 2;
        s += pi * (1 - pi);
    }
    const double pg = s / 2;
    CHECK(gwet_ac1(cm) == doctest::Approx((31 / n - pg) / (1 - pg)).epsilon(1e-12));
}

TEST_CASE("report from the seven matrices, averages unweighted") {
    std::ifstream in(testing::data_file("agreement_matrices.csv"));
    const auto matrices = read_agreement_matrices_csv(in);
    REQUIRE(matrices.size() == 7);
    const auto rep = agreement_report(matrices);
    CHECK(rep.overlapping_sentences == 3000);
    CHECK(std::fabs(rep.mean_percent_agreement - 0.863) <= 0.0005);
    CHECK(std::fabs(rep.mean_kappa - 0.331) <= 0.0005);
    CHECK(std::fabs(rep.mean_ac1 - 0.806) <= 0.0005);
    for (std::size_t i = 1; i < rep.rows.size(); ++i) CHECK(rep.rows[i].matrix.total() == 499);
    const auto j = agreement_report_json(rep);
    CHECK(j["rows"][0]["cohen_kappa"].get<double>() == 0.579);
    CHECK(std::fabs(j["rows"][2]["exact"]["gwet_ac1"].get<double>() - 0.926) <= 0.001);
    CHECK(j["rows"][2]["gwet_ac1"].get<double>() == 0.927);
    std::ostringstream out;
    write_agreement_matrices_csv(rep, out);
    std::istringstream back(out.str());
    const auto again = read_agreement_matrices_csv(back);
    CHECK(again.size() == 7);
    CHECK(again[0].second == matrices[0].second);
    CHECK(agreement_report_text(rep).find("Causality") != std::string::npos);
}

TEST_CASE("malformed matrix file reports the line") {
    std::istringstream in("category,a0b0,a0b1,a1b0,a1b1\nCausality,1,2,3,4\nMarked,1,x,3,4\n");
    try {
        read_agreement_matrices_csv(in, "m.csv");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
}

TEST_CASE("agreement report from a corpus") {
    LabeledCorpus c;
    c.add_sentence({"s1", "If it rains, the road is wet.", "d1", "Banking", 0});
    c.add_label(causal_label("s1", "alice"));
    c.add_label(causal_label("s1", "bob"));
    const auto rep = agreement_report(c);
    CHECK(rep.overlapping_sentences == 1);
    for (const auto& row : rep.rows) {
        CHECK(row.stats.percent_agreement == 1.0);
        CHECK(row.stats.ac1 == 1.0);
        CHECK_FALSE(row.stats.kappa_defined);
    }

    LabeledCorpus lone;
    lone.add_sentence({"s1", "The light is red.", "d1", "Banking", 0});
    auto r = causal_label("s1", "alice");
    lone.add_label(r);
    CHECK_THROWS_AS(agreement_report(lone), ValidationError);
}

TEST_CASE("dependent categories only where both raters said causal") {
    LabeledCorpus c;
    for (int i = 0; i < 4; ++i) c.add_sentence({"s" + std::to_string(i), "Sentence number " + std::to_string(i) + ".", "d", "X", static_cast<std::size_t>(i)});
    c.add_label(causal_label("s0", "a"));
    c.add_label(causal_label("s0", "b"));
    c.add_label(causal_label("s1", "a"));
    CausalLabelRecord no;
    no.sentence_id = "s1";
    no.annotator = "b";
    c.add_label(no);
    no.sentence_id = "s2";
    c.add_label(no);
    no.annotator = "a";
    c.add_label(no);
    const auto rep = agreement_report(c);
    CHECK(rep.rows[0].matrix.total() == 3);
    CHECK(rep.rows[0].matrix.at(1, 0) == 1);
    CHECK(rep.rows[1].matrix.total() == 1);
}
