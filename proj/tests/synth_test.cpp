// Copyright 2026 The diecg Authors
// SPDX-License-Identifier: Apache-2.0

#include "diecg/error.hpp"
#include "diecg/layout.hpp"
#include "diecg/raster.hpp"
#include "diecg/synth.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cmath>

using namespace diecg;
using diecg::testing::TempDir;

TEST_CASE("flat-line page: lead-area ink lies on the baselines") {
    for (int id = 1; id <= 4; ++id) {
        SynthSpec spec = synth_preset(id, 1);
        spec.waveform = Waveform::Flat;
        const SynthImage page = render(spec);
        const auto& truth = page.truth;
        const BinaryImage bin = otsu_binarize(to_grayscale(page.image)).image;
        const TemplateConfig& cfg = builtin_template(id);
        const int spacing = baseline_spacing(truth.baselines, truth.height, cfg);

        std::vector<Rect> skip;
        for (int b : truth.baselines) {
            for (int c = 0; c < cfg.cols; ++c) {
                const auto [left, right] = column_bounds(c, truth.width, truth.separators, cfg);
                const Rect r = label_strip_rect(left, right, b, spacing, cfg);
                skip.push_back({r.x - 3, r.y - 3, r.width + 6, r.height + 6});
            }
        }
        for (int s : truth.separators) skip.push_back({s - 2, 0, 5, truth.height});

        const int x0 = truth.leads[lead_index(cfg.lead_order[0])].x0;
        const auto& last = truth.leads[lead_index(cfg.lead_order[static_cast<std::size_t>(cfg.cols - 1)])];
        const int x1 = last.x0 + static_cast<int>(last.px.size());
        const int half = spec.thickness / 2;
        long long stray = 0, on_line = 0;
        for (int y = truth.header_rows; y < truth.height; ++y) {
            for (int x = x0; x < x1; ++x) {
                if (bin(y, x) != kInk) continue;
                if (std::any_of(skip.begin(), skip.end(), [&](const Rect& r) { return r.contains(x, y); })) continue;
                const bool near = std::any_of(truth.baselines.begin(), truth.baselines.end(),
                                              [&](int b) { return std::abs(y - b) <= half; });
                (near ? on_line : stray) += 1;
            }
        }
        INFO("template " << id);
        // Template 4 prints dark grid dots that survive binarization by design.
        if (id == 4) {
            CHECK(static_cast<double>(stray) < 0.2 * static_cast<double>(on_line));
        } else {
            CHECK(stray <= static_cast<long long>(spec.speckle_density * truth.width * truth.height) + 1);
        }
        CHECK(on_line >= static_cast<long long>(cfg.rows) * (x1 - x0) * spec.thickness * 9 / 10);
        for (const auto& lead : truth.leads) CHECK(lead.mv.isZero());
    }
}

TEST_CASE("truth baselines are the rows the traces are drawn on") {
    SynthSpec spec;
    spec.waveform = Waveform::Flat;
    const SynthImage page = render(spec);
    const GrayImage gray = to_grayscale(page.image);
    for (const auto& lead : page.truth.leads) {
        for (int x = lead.x0 + 5; x < lead.x0 + lead.px.size() - 5; x += 17) {
            CHECK(gray(lead.baseline, x) == 0);
        }
        CHECK(std::find(page.truth.baselines.begin(), page.truth.baselines.end(), lead.baseline) !=
              page.truth.baselines.end());
    }
}

TEST_CASE("75 bpm truth peaks are 800 ms apart") {
    SynthSpec spec;
    spec.bpm = 75.0;
    spec.amplitude_mv = 1.0;
    const SynthImage page = render(spec);
    CHECK(page.truth.rr_ms == doctest::Approx(800.0));
    const auto& t = page.truth.r_peak_times_s;
    REQUIRE(t.size() >= 12);
    for (std::size_t i = 1; i < t.size(); ++i) CHECK(t[i] - t[i - 1] == doctest::Approx(0.8));
    const auto& ii = page.truth.lead_ii_peaks.peaks;
    REQUIRE(ii.size() >= 2);
    for (std::size_t i = 1; i < ii.size(); ++i) CHECK(ii[i] - ii[i - 1] == 160);
    // The R wave is the tallest point of lead II.
    CHECK(synth_amplitude(spec, Lead::II, spec.first_beat_s) == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("rendering is deterministic") {
    for (int id = 1; id <= 4; ++id) {
        const SynthSpec spec = synth_preset(id, 31);
        const SynthImage a = render(spec);
        const SynthImage b = render(spec);
        CHECK(a.image == b.image);
        CHECK(to_json(a.truth) == to_json(b.truth));
        const SynthImage c = render(synth_preset(id, 32));
        CHECK_FALSE(a.image == c.image);
    }
}

TEST_CASE("pulse truth dimensions") {
    const SynthImage page = render(synth_preset(1, 0));
    CHECK(page.truth.px_per_second == 250.0);
    CHECK(page.truth.px_per_mv == 100.0);
    CHECK(page.truth.pulse_width_px == 25);
    CHECK(page.truth.pulse_height_px == 50);
    const SynthImage t3 = render(synth_preset(3, 0));
    CHECK(t3.truth.pulse_width_px == 40);
    CHECK(t3.truth.pulse_height_px == 40);
}

TEST_CASE("perturb") {
    SUBCASE("zero density leaves the image alone") {
        SynthImage page = render(synth_preset(1, 4));
        RgbImage copy = page.image;
        perturb(copy, {}, 99);
        CHECK(copy == page.image);
    }
    SUBCASE("density 0.005 darkens about half a percent of a blank page") {
        RgbImage blank(400, 500);
        PerturbParams p;
        p.speckle_density = 0.005;
        perturb(blank, p, 3);
        const GrayImage g = to_grayscale(blank);
        const double fraction = static_cast<double>((g.array() < 128).count()) / static_cast<double>(g.size());
        CHECK(fraction == doctest::Approx(0.005).epsilon(0.05));
        RgbImage again(400, 500);
        perturb(again, p, 3);
        CHECK(again == blank);
    }
    SUBCASE("strong grid dots survive binarization") {
        SynthSpec spec = synth_preset(4, 2);
        const SynthImage page = render(spec);
        const OtsuResult bin = otsu_binarize(to_grayscale(page.image));
        const int pitch = 5 * spec.grid_px;
        int dots = 0, tried = 0;
        const int y0 = (page.truth.header_rows / pitch + 1) * pitch;
        for (int y = y0; y < page.truth.height - pitch; y += pitch) {
            for (int x = pitch; x < page.truth.width - pitch; x += 7 * pitch) {
                ++tried;
                if (bin.image.block(y - 2, x - 2, 5, 5).any()) ++dots;
            }
        }
        CHECK(dots > tried / 2);
    }
    SUBCASE("invalid density") {
        RgbImage img(4, 4);
        PerturbParams p;
        p.speckle_density = 0.02;
        CHECK_THROWS_AS(perturb(img, p, 0), ValidationError);
    }
}

TEST_CASE("overlapping leads are refused unless allowed") {
    SynthSpec spec;
    spec.amplitude_mv = 3.0;
    CHECK_THROWS_AS(render(spec), RenderError);
    spec.allow_overlap = true;
    CHECK_NOTHROW(render(spec));
}

TEST_CASE("spec validation and json") {
    SynthSpec spec;
    spec.template_id = 7;
    spec.thickness = 0;
    spec.speckle_density = 0.5;
    try {
        validate(spec);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("template_id") != std::string::npos);
        CHECK(msg.find("thickness") != std::string::npos);
        CHECK(msg.find("speckle_density") != std::string::npos);
    }
    CHECK_THROWS_AS(synth_preset(0, 1), ValidationError);

    const SynthSpec preset = synth_preset(3, 12);
    CHECK(to_json(synth_spec_from_json(nlohmann::json::parse(to_json(preset).dump()))) == to_json(preset));

    const SynthSpec over = synth_spec_from_json({{"preset", "template2"}, {"seed", 5}, {"bpm", 61.0}});
    CHECK(over.template_id == 2);
    CHECK(over.bpm == 61.0);
    CHECK(over.speckle_density == synth_preset(2, 5).speckle_density);
    CHECK_THROWS_AS(synth_spec_from_json({{"waveform", "square"}}), ValidationError);
    CHECK_THROWS_AS(synth_spec_from_json({{"preset", "template9"}}), ValidationError);
}

TEST_CASE("write_synth emits image, truth and annotation") {
    TempDir dir("synth");
    const SynthSpec spec = synth_preset(2, 8);
    write_synth(spec, render(spec), dir.path());
    CHECK(std::filesystem::exists(dir / (spec.record_id + ".png")));
    CHECK(std::filesystem::exists(dir / (spec.record_id + ".truth.json")));
    const RPeakSet ann = read_rpeaks(dir.path() / "annotations" / (spec.record_id + ".rpeaks.json"));
    CHECK(ann.record_id == spec.record_id);
    CHECK(ann.peaks.size() >= 2);
    const auto sidecar = nlohmann::json::parse(read_file(dir / (spec.record_id + ".truth.json")));
    CHECK(sidecar["truth"]["baselines"].size() == 4);
    CHECK(sidecar["spec"]["seed"] == 8);
}
