// Copyright 2026 The diecg Authors
// SPDX-License-Identifier: Apache-2.0

#include "diecg/pipeline.hpp"

#include "diecg/calibrate.hpp"
#include "diecg/raster.hpp"
#include "diecg/trace.hpp"

#include <algorithm>
#include <cmath>

namespace diecg {

namespace fs = std::filesystem;

const char* stage_name(Stage stage) {
    switch (stage) {
        case Stage::Load: return "load";
        case Stage::Binarize: return "binarize";
        case Stage::Layout: return "layout";
        case Stage::Trace: return "trace";
        case Stage::Calibration: return "calibration";
    }
    return "unknown";
}

namespace {

// Accepts a measured pulse only if its aspect is close to standard paper
// (10 mm/mV against 25 mm/s).
bool plausible(const Calibration& cal) {
    if (!cal.valid()) return false;
    const double aspect = cal.px_per_mv / cal.px_per_second;
    return aspect > 0.4 * 0.75 && aspect < 0.4 / 0.75;
}

}  // namespace

EcgRecord digitize(const GrayImage& page, const TemplateConfig& cfg, const DigitizeOptions& opts) {
    const OtsuResult bin = otsu_binarize(page);
    if (bin.degenerate) throw StageError(Stage::Binarize, "page has a single intensity");
    const BinaryImage& img = bin.image;
    if (opts.debug_dir) {
        fs::create_directories(*opts.debug_dir);
        write_png(*opts.debug_dir / "binary.png", img);
    }

    LeadLayout layout;
    try {
        const auto baselines = detect_isoelectric_lines(projection_histogram(img, Axis::Vertical), cfg);
        const auto separators = detect_column_separators(img, baselines, cfg);
        layout = crop_leads(img, baselines, separators, cfg, opts.margin_l);
    } catch (const LayoutError& e) {
        throw StageError(Stage::Layout, e.what());
    }

    const int width = static_cast<int>(img.cols());
    int band_n = opts.band_n.value_or(cfg.band_n);
    if (band_n <= 0) {
        const int x0 = static_cast<int>(std::lround(cfg.signal_x0 * width));
        const int x1 = static_cast<int>(std::lround(cfg.signal_x1 * width));
        band_n = estimate_line_thickness(img, layout.baselines, x0, x1) + 4;
    }

    EcgRecord rec;
    rec.record_id = opts.record_id;
    rec.class_label = opts.class_label;
    Provenance& prov = rec.provenance;
    prov.source_image = opts.source_image;
    prov.template_id = cfg.id;
    prov.band_n = band_n;
    prov.margin_l = layout.margin_l;
    prov.baselines = layout.baselines;
    prov.separators = layout.separators;

    Calibration cal;
    std::string pulse_problem = "no pulse region";
    if (layout.ref_pulse_region) {
        for (int band : pulse_bands(layout, band_n)) {
            try {
                cal = Calibration::from_pulse(measure_ref_pulse(track_pulse_region(img, layout, band), cfg.ref_pulse));
                if (plausible(cal)) break;
                pulse_problem = "pulse aspect is implausible";
            } catch (const CalibrationError& e) {
                pulse_problem = e.what();
            } catch (const TraceNotFoundError& e) {
                pulse_problem = e.what();
            }
            cal = {};
        }
    }
    if (cal.valid()) {
        prov.calibration_source = "pulse";
    } else {
        cal = Calibration::standard_paper(cfg.default_px_per_mm);
        prov.calibration_source = "fallback";
        prov.warnings.push_back("reference pulse not measured (" + pulse_problem +
                                "); using standard paper scale");
        if (!cal.valid()) throw StageError(Stage::Calibration, "template default scale is invalid");
    }
    prov.px_per_second = cal.px_per_second;
    prov.px_per_mv = cal.px_per_mv;

    for (const LeadCrop& crop : layout.crops) {
        const std::string name(lead_name(crop.lead));
        const LeadImage pixels{extract_crop(img, layout, crop), crop.baseline};
        TraceMask mask;
        RawTrace raw;
        try {
            mask = track_trace(pixels, band_n);
            raw = extract_waveform(mask);
        } catch (const TraceNotFoundError& e) {
            throw StageError(Stage::Trace, "lead " + name + ": " + e.what());
        }
        if (opts.debug_dir) write_png(*opts.debug_dir / ("mask_" + name + ".png"), mask.mask);

        EcgSignal sig;
        try {
            sig = resample_to_200hz(to_physical(raw, cal, crop.lead), &prov.warnings);
        } catch (const CalibrationError& e) {
            throw StageError(Stage::Calibration, "lead " + name + ": " + e.what());
        }
        rec.lead(crop.lead) = std::move(sig.samples);

        LeadProvenance& lp = prov.leads[lead_index(crop.lead)];
        lp.crop = crop.rect;
        lp.baseline = crop.baseline;
        lp.fill_fraction = raw.fill_fraction();
        lp.band_escape = mask.band_escape;
        if (mask.band_escape) prov.warnings.push_back("lead " + name + ": trace reached the crop edge");
        if (lp.fill_fraction > 0.5) prov.warnings.push_back("lead " + name + ": most columns carried no ink");
    }
    return rec;
}

EcgRecord digitize_file(const fs::path& image, const TemplateConfig& cfg, DigitizeOptions opts) {
    GrayImage page;
    try {
        page = load_grayscale(image);
    } catch (const IoError& e) {
        throw StageError(Stage::Load, e.what());
    } catch (const FormatError& e) {
        throw StageError(Stage::Load, e.what());
    }
    if (opts.record_id.empty()) opts.record_id = image.stem().string();
    if (opts.source_image.empty()) opts.source_image = image.string();
    return digitize(page, cfg, opts);
}

}  // namespace diecg
