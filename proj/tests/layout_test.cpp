// Copyright 2026 The diecg Authors
// SPDX-License-Identifier: Apache-2.0

#include "diecg/error.hpp"
#include "diecg/layout.hpp"
#include "diecg/raster.hpp"
#include "diecg/synth.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <fstream>

using namespace diecg;
using diecg::testing::TempDir;

namespace {

struct Page {
    SynthImage synth;
    BinaryImage bin;
};

Page render_binary(const SynthSpec& spec) {
    Page p{render(spec), {}};
    p.bin = otsu_binarize(to_grayscale(p.synth.image)).image;
    return p;
}

Eigen::VectorXi counts(std::initializer_list<int> v) {
    Eigen::VectorXi c(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (int x : v) c[i++] = x;
    return c;
}

bool within(int got, int want, int tol) { return std::abs(got - want) <= tol; }

}  // namespace

TEST_CASE("find_histogram_peaks") {
    SUBCASE("ranked by prominence, returned ascending") {
        const auto peaks = find_histogram_peaks(counts({0, 5, 0, 9, 0, 2, 0, 7, 0}), 2, 1);
        CHECK(peaks == std::vector<int>{3, 7});
    }
    SUBCASE("flat top reported at its middle") {
        const auto peaks = find_histogram_peaks(counts({0, 1, 8, 8, 8, 1, 0}), 1, 1);
        CHECK(peaks == std::vector<int>{3});
    }
    SUBCASE("minimum distance suppresses close peaks") {
        const auto peaks = find_histogram_peaks(counts({0, 9, 0, 8, 0, 0, 0, 3, 0}), 2, 4);
        CHECK(peaks == std::vector<int>{1, 7});
    }
    SUBCASE("all zero has no peaks") { CHECK(find_histogram_peaks(Eigen::VectorXi::Zero(10), 3, 1).empty()); }
}

TEST_CASE("detect_isoelectric_lines ignores the header and reports shortfalls") {
    TemplateConfig cfg = builtin_template(1);
    cfg.header_rows_hint = 0.2;
    Eigen::VectorXi c = Eigen::VectorXi::Zero(100);
    c[5] = 100;  // header rule
    c[30] = 40;
    c[60] = 50;
    c[90] = 45;
    const auto lines = detect_isoelectric_lines({Axis::Vertical, c}, cfg);
    CHECK(lines == std::vector<int>{30, 60, 90});

    c[90] = 0;
    try {
        detect_isoelectric_lines({Axis::Vertical, c}, cfg);
        FAIL("expected LayoutError");
    } catch (const LayoutError& e) {
        CHECK(std::string(e.what()).find("found 2") != std::string::npos);
    }
}

TEST_CASE("flat-line page: baselines are exactly the rendered rows") {
    for (int id = 1; id <= 4; ++id) {
        SynthSpec spec;
        spec.template_id = id;
        spec.waveform = Waveform::Flat;
        spec.grid_px = id == 4 ? 12 : id == 3 ? 8 : 10;
        const Page p = render_binary(spec);
        const TemplateConfig& cfg = builtin_template(id);
        const auto lines = detect_isoelectric_lines(projection_histogram(p.bin, Axis::Vertical), cfg);
        CHECK(lines == p.synth.truth.baselines);
    }
}

TEST_CASE("layout matches synthetic ground truth across templates") {
    for (int id = 1; id <= 4; ++id) {
        const TemplateConfig& cfg = builtin_template(id);
        for (std::uint64_t seed = 0; seed < 13; ++seed) {
            const Page p = render_binary(synth_preset(id, 500 + seed));
            const auto& truth = p.synth.truth;
            INFO("template " << id << " seed " << seed);
            const auto lines = detect_isoelectric_lines(projection_histogram(p.bin, Axis::Vertical), cfg);
            REQUIRE(lines.size() == truth.baselines.size());
            for (std::size_t i = 0; i < lines.size(); ++i) CHECK(within(lines[i], truth.baselines[i], 2));

            const auto seps = detect_column_separators(p.bin, lines, cfg);
            REQUIRE(seps.size() == truth.separators.size());
            for (std::size_t i = 0; i < seps.size(); ++i) CHECK(within(seps[i], truth.separators[i], 2));

            const LeadLayout layout = crop_leads(p.bin, lines, seps, cfg);
            REQUIRE(layout.crops.size() == kLeadCount);
            const Rect page{0, 0, static_cast<int>(p.bin.cols()), static_cast<int>(p.bin.rows())};
            for (const auto& c : layout.crops) {
                CHECK(page.intersect(c.rect) == c.rect);
                CHECK(c.baseline >= 0);
                CHECK(c.baseline < c.rect.height);
                CHECK(c.rect.y + c.baseline == lines[static_cast<std::size_t>(c.row)]);
            }

            // Rendered trace centre pixels covered by some crop outside every label strip.
            long long total = 0, covered = 0;
            for (Lead lead : kLeadOrder) {
                const auto& lt = truth.leads[lead_index(lead)];
                for (Eigen::Index k = 0; k < lt.px.size(); ++k) {
                    const int x = lt.x0 + static_cast<int>(k);
                    const int y = static_cast<int>(std::lround(lt.baseline - lt.px[k]));
                    ++total;
                    const bool in_crop = std::any_of(layout.crops.begin(), layout.crops.end(),
                                                     [&](const LeadCrop& c) { return c.rect.contains(x, y); });
                    const bool in_label = std::any_of(layout.label_strips.begin(), layout.label_strips.end(),
                                                      [&](const Rect& r) { return r.contains(x, y); });
                    if (in_crop && !in_label) ++covered;
                }
            }
            CHECK(static_cast<double>(covered) >= 0.95 * static_cast<double>(total));
        }
    }
}

TEST_CASE("single-column template has no separators") {
    TemplateConfig cfg = builtin_template(1);
    cfg.rows = 12;
    cfg.cols = 1;
    const BinaryImage img = BinaryImage::Constant(50, 50, kPaper);
    CHECK(detect_column_separators(img, std::vector<int>{10, 20}, cfg).empty());
}

TEST_CASE("crop_leads arithmetic") {
    TemplateConfig cfg = builtin_template(1);
    cfg.rows = 3;
    cfg.cols = 3;
    cfg.header_rows_hint = 0.05;
    cfg.signal_x0 = 0.0;
    cfg.signal_x1 = 1.0;
    cfg.separator_gap_px = 0;
    const BinaryImage img = BinaryImage::Constant(1000, 900, kPaper);
    const std::vector<int> baselines{200, 500, 800};
    const std::vector<int> seps{300, 600};
    const LeadLayout layout = crop_leads(img, baselines, seps, cfg, 40);
    CHECK(layout.margin_l == 40);
    CHECK(layout.spacing == 300);

    // Middle row, middle column: from the line above minus L to the line below
    // plus L, between the separators.
    const LeadCrop& mid = layout.crops[4];
    CHECK(mid.row == 1);
    CHECK(mid.col == 1);
    CHECK(mid.rect.x == 300);
    CHECK(mid.rect.right() - 1 == 600);
    CHECK(mid.rect.y == 200 - 40);
    CHECK(mid.rect.bottom() - 1 == 800 + 40);
    CHECK(mid.baseline == 500 - 160);

    // First row stops at the header; last row at the page edge.
    CHECK(layout.crops[0].rect.y == 50);
    CHECK(layout.crops[8].rect.bottom() == 1000);
    CHECK(layout.crops[0].rect.x == 0);
    CHECK(layout.crops[2].rect.right() == 900);

    // Default L is 8% of the spacing.
    CHECK(crop_leads(img, baselines, seps, cfg).margin_l == 24);

    CHECK_THROWS_AS(crop_leads(img, std::vector<int>{200, 500}, seps, cfg), LayoutError);
    CHECK_THROWS_AS(crop_leads(img, baselines, std::vector<int>{300}, cfg), LayoutError);
}

TEST_CASE("extract_crop blanks label strips reaching into the crop") {
    TemplateConfig cfg = builtin_template(1);
    cfg.rows = 3;
    cfg.cols = 3;
    cfg.header_rows_hint = 0.0;
    cfg.signal_x0 = 0.0;
    cfg.signal_x1 = 1.0;
    cfg.separator_gap_px = 0;
    const BinaryImage img = BinaryImage::Constant(400, 300, kInk);
    const LeadLayout layout = crop_leads(img, std::vector<int>{100, 200, 300}, std::vector<int>{100, 200}, cfg, 10);
    for (const auto& c : layout.crops) {
        const BinaryImage crop = extract_crop(img, layout, c);
        REQUIRE(crop.rows() == c.rect.height);
        REQUIRE(crop.cols() == c.rect.width);
        for (int y = 0; y < crop.rows(); ++y) {
            for (int x = 0; x < crop.cols(); ++x) {
                const int px = c.rect.x + x, py = c.rect.y + y;
                const bool in_label = std::any_of(layout.label_strips.begin(), layout.label_strips.end(),
                                                  [&](const Rect& r) { return r.contains(px, py); });
                CHECK(crop(y, x) == !in_label);
            }
        }
    }
}

TEST_CASE("template configs") {
    SUBCASE("bundled files match the built-in definitions") {
        for (int id = 1; id <= 4; ++id) {
            const auto path = std::filesystem::path(DIECG_CONFIG_DIR) / ("template" + std::to_string(id) + ".json");
            const TemplateConfig cfg = load_template_config(path);
            CHECK(to_json(cfg) == to_json(builtin_template(id)));
        }
    }
    SUBCASE("json round trip") {
        for (int id = 1; id <= 4; ++id) {
            const TemplateConfig cfg = template_from_json(to_json(builtin_template(id)));
            CHECK(to_json(cfg) == to_json(builtin_template(id)));
            CHECK(cfg.rows * cfg.cols == 12);
        }
    }
    SUBCASE("resolve by id, name or path") {
        CHECK(resolve_template("2").id == 2);
        CHECK(resolve_template("template4").id == 4);
        TempDir dir("cfg");
        auto j = to_json(builtin_template(3));
        j["margin_l_px"] = 17;
        std::ofstream(dir / "custom.json") << j.dump();
        const TemplateConfig cfg = resolve_template((dir / "custom.json").string());
        CHECK(cfg.margin_l_px == 17);
        CHECK_THROWS_AS(resolve_template((dir / "none.json").string()), IoError);
        CHECK_THROWS_AS(builtin_template(5), ValidationError);
    }
    SUBCASE("validation lists every bad field") {
        TemplateConfig cfg = builtin_template(1);
        cfg.cols = 5;
        cfg.ref_pulse.width_s = 0.15;
        cfg.ref_pulse.height_mv = 1.0;
        try {
            validate(cfg);
            FAIL("expected ValidationError");
        } catch (const ValidationError& e) {
            const std::string msg = e.what();
            CHECK(msg.find("rows x cols") != std::string::npos);
            CHECK(msg.find("width_s") != std::string::npos);
            CHECK(msg.find("height_mv") != std::string::npos);
        }
        cfg = builtin_template(1);
        cfg.lead_order[1] = Lead::I;
        CHECK_THROWS_AS(validate(cfg), ValidationError);
        cfg = builtin_template(1);
        cfg.margin_l_fraction = 0.0;
        CHECK_THROWS_AS(validate(cfg), ValidationError);
    }
}
