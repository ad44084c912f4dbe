// Copyright 2026 The diecg Authors
// SPDX-License-Identifier: Apache-2.0

#include "diecg/error.hpp"
#include "diecg/quality.hpp"
#include "diecg/synth.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>

using namespace diecg;
using diecg::testing::TempDir;

namespace {

// Lead II sampled at 200 Hz straight from the analytic waveform.
EcgSignal analytic_lead_ii(const SynthSpec& spec, double seconds) {
    const auto n = static_cast<Eigen::Index>(std::lround(seconds * 200.0));
    Eigen::VectorXd x(n);
    for (Eigen::Index k = 0; k < n; ++k) x[k] = synth_amplitude(spec, Lead::II, k / 200.0);
    return {x, 200.0, Lead::II};
}

std::vector<int> rendered_peaks(const SynthSpec& spec, double seconds) {
    std::vector<int> peaks;
    const double rr = 60.0 / spec.bpm;
    for (double t = spec.first_beat_s; t < seconds; t += rr) peaks.push_back(static_cast<int>(std::lround(t * 200)));
    return peaks;
}

}  // namespace

TEST_CASE("rr_mean_ms") {
    CHECK(rr_mean_ms(std::vector<int>{0, 150, 300}, 200.0) == 750.0);
    CHECK(rr_mean_ms(std::vector<int>{0, 100}, 200.0) == 500.0);
    CHECK(rr_mean_ms(RPeakSet{"r", Lead::II, 250.0, {10, 260, 520}}) == doctest::Approx(1020.0));
    CHECK_THROWS_AS(rr_mean_ms(std::vector<int>{5}, 200.0), UndefinedResultError);
    CHECK_THROWS_AS(rr_mean_ms(std::vector<int>{}, 200.0), UndefinedResultError);
}

TEST_CASE("mae_rr") {
    CHECK(mae_rr(std::vector<double>{750, 800}, std::vector<double>{760, 820}) == 15.0);
    CHECK(mae_rr(std::vector<double>{750, 800}, std::vector<double>{750, 800}) == 0.0);
    CHECK_THROWS_AS(mae_rr(std::vector<double>{1, 2}, std::vector<double>{1}), AlignmentError);
    CHECK_THROWS_AS(mae_rr(std::vector<double>{}, std::vector<double>{}), AlignmentError);

    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> rr(300, 1300);
    std::uniform_int_distribution<int> len(1, 40);
    for (int trial = 0; trial < 500; ++trial) {
        const int n = len(rng);
        std::vector<double> a(n), b(n), c(n);
        for (int i = 0; i < n; ++i) {
            a[i] = rr(rng);
            b[i] = trial % 5 == 0 ? a[i] : rr(rng);
            c[i] = rr(rng);
        }
        const double ab = mae_rr(a, b);
        CHECK(ab >= 0.0);
        CHECK(ab == mae_rr(b, a));
        CHECK((ab == 0.0) == (a == b));
        CHECK(ab <= mae_rr(a, c) + mae_rr(c, b) + 1e-9);
    }
}

TEST_CASE("detector finds every beat of a 75 bpm train") {
    SynthSpec spec;
    spec.bpm = 75.0;
    spec.first_beat_s = 0.3;
    const EcgSignal sig = analytic_lead_ii(spec, 10.0);
    const RPeakSet found = detect_r_peaks(sig, {}, "train");
    const auto want = rendered_peaks(spec, 10.0);
    CHECK(found.record_id == "train");
    CHECK(found.lead == Lead::II);
    REQUIRE(found.peaks.size() >= 12);
    REQUIRE(found.peaks.size() <= 13);
    REQUIRE(found.peaks.size() == want.size());
    for (std::size_t i = 0; i < want.size(); ++i) CHECK(std::abs(found.peaks[i] - want[i]) <= 3);
    CHECK(rr_mean_ms(found) == doctest::Approx(800.0).epsilon(0.01));
}

TEST_CASE("detector mean RR across heart rates") {
    for (double bpm : {50.0, 64.0, 80.0, 97.0, 120.0, 140.0}) {
        SynthSpec spec;
        spec.bpm = bpm;
        spec.first_beat_s = 0.45;
        const RPeakSet found = detect_r_peaks(analytic_lead_ii(spec, 10.0));
        INFO("bpm " << bpm);
        CHECK(std::abs(rr_mean_ms(found) - 60000.0 / bpm) <= 10.0);
    }
    SynthSpec spec;
    spec.bpm = 80.0;
    CHECK(std::abs(rr_mean_ms(detect_r_peaks(analytic_lead_ii(spec, 10.0))) - 750.0) <= 15.0);
}

TEST_CASE("detector exclusions") {
    SUBCASE("flat signal has no peaks") {
        const RPeakSet found = detect_r_peaks({Eigen::VectorXd::Zero(2000), 200.0, Lead::II});
        CHECK(found.peaks.empty());
        CHECK_THROWS_AS(rr_mean_ms(found), UndefinedResultError);
    }
    SUBCASE("single beat in 1.5 s") {
        SynthSpec spec;
        spec.bpm = 50.0;
        spec.first_beat_s = 0.7;
        const RPeakSet found = detect_r_peaks(analytic_lead_ii(spec, 1.5));
        CHECK(found.peaks.size() == 1);
        CHECK_THROWS_AS(rr_mean_ms(found), UndefinedResultError);
    }
    SUBCASE("shorter than a second") {
        CHECK_THROWS_AS(detect_r_peaks({Eigen::VectorXd::Zero(199), 200.0, Lead::II}), ValidationError);
    }
}

TEST_CASE("detector never reports peaks closer than the refractory period") {
    std::mt19937_64 rng(23);
    std::normal_distribution<double> noise(0.0, 0.05);
    std::uniform_int_distribution<int> pos(0, 1999);
    std::uniform_real_distribution<double> height(0.2, 2.0);
    for (int trial = 0; trial < 100; ++trial) {
        Eigen::VectorXd x(2000);
        for (Eigen::Index k = 0; k < x.size(); ++k) x[k] = noise(rng);
        for (int s = 0; s < 30; ++s) {
            const int p = pos(rng);
            const double h = height(rng);
            for (int d = -4; d <= 4; ++d) {
                if (p + d >= 0 && p + d < 2000) x[p + d] += h * (1.0 - std::abs(d) / 5.0);
            }
        }
        const RPeakSet found = detect_r_peaks({x, 200.0, Lead::II});
        CHECK_NOTHROW(validate(found, 2000));
        for (std::size_t i = 1; i < found.peaks.size(); ++i) CHECK(found.peaks[i] - found.peaks[i - 1] >= 40);
    }
}

TEST_CASE("rpeak annotations") {
    TempDir dir("ann");
    const RPeakSet set{"page_1", Lead::II, 200.0, {12, 170, 330}};
    const auto path = write_rpeaks(set, dir.path());
    CHECK(path == dir / "page_1.rpeaks.json");
    CHECK(read_rpeaks(path) == set);
    write_rpeaks({"page_2", Lead::II, 200.0, {}}, dir.path());
    std::ofstream(dir / "notes.json") << "{}";
    const auto all = read_annotation_dir(dir.path());
    REQUIRE(all.size() == 2);
    CHECK(all.at("page_1") == set);
    CHECK(all.at("page_2").peaks.empty());

    CHECK_THROWS_AS(validate(RPeakSet{"x", Lead::II, 200.0, {5, 5}}), ValidationError);
    CHECK_THROWS_AS(validate(RPeakSet{"x", Lead::II, 200.0, {-1, 5}}), ValidationError);
    CHECK_THROWS_AS(validate(RPeakSet{"x", Lead::II, 200.0, {1, 50}}, 50), ValidationError);
    CHECK_NOTHROW(validate(RPeakSet{"x", Lead::II, 200.0, {1, 49}}, 50));

    auto j = nlohmann::json::parse(to_json(set).dump());
    j["lead"] = "V1";
    try {
        rpeaks_from_json(j);
        FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
        CHECK(e.path() == "lead");
    }
    j = nlohmann::json::parse(to_json(set).dump());
    j["peaks"][1] = 1.5;
    try {
        rpeaks_from_json(j);
        FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
        CHECK(e.path() == "peaks[1]");
    }
}

TEST_CASE("qa report rows") {
    std::vector<QaEntry> entries = {
        {"a", ClassLabel::Normal, 5, 5, 800.0, 810.0},
        {"b", ClassLabel::Normal, 5, 5, 700.0, 690.0},
        {"c", ClassLabel::MI, 3, 3, 900.0, 960.0},
        {"d", ClassLabel::MI, 1, 1, std::nullopt, std::nullopt},
        {"e", std::nullopt, 4, 4, 600.0, 600.0},
        {"f", ClassLabel::Covid19, 4, 1, 600.0, std::nullopt},
    };
    const QaReport report = build_qa_report(entries, {"zz", "yy"});
    REQUIRE(report.rows.size() == 6);
    CHECK(report.rows[0].name == "COVID-19");
    CHECK(report.rows[0].n == 0);
    CHECK(report.rows[0].excluded == 1);
    CHECK_FALSE(report.rows[0].mae_ms.has_value());
    CHECK(report.rows[1].name == "MI");
    CHECK(report.rows[1].n == 1);
    CHECK(report.rows[1].excluded == 1);
    CHECK(*report.rows[1].mae_ms == 60.0);
    CHECK(report.rows[4].name == "Normal");
    CHECK(*report.rows[4].mae_ms == 10.0);
    CHECK(report.rows[5].name == "Total");
    CHECK(report.rows[5].n == 4);
    CHECK(report.rows[5].excluded == 2);
    CHECK(*report.rows[5].mae_ms == doctest::Approx(20.0));
    CHECK(report.unmatched == std::vector<std::string>{"yy", "zz"});

    const std::string table = format_qa_table(report);
    CHECK(table.find("Class") != std::string::npos);
    CHECK(table.find("MAE (ms)") != std::string::npos);
    CHECK(table.find("Excluded") != std::string::npos);
    CHECK(table.find("Abnormal") != std::string::npos);
    const auto j = to_json(report);
    CHECK(j["rows"].size() == 6);
    CHECK(j["records"].size() == 6);

    // Order of entries does not change the aggregate.
    std::reverse(entries.begin(), entries.end());
    CHECK(*build_qa_report(entries).rows[5].mae_ms == *report.rows[5].mae_ms);
}
