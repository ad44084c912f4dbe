// Copyright 2026 The diecg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "diecg/image.hpp"
#include "diecg/lead.hpp"
#include "diecg/raster.hpp"

#include <json.hpp>

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace diecg {

// ----------------------------------------------------------------------------
// Template configuration
// ----------------------------------------------------------------------------

/// Rectangle holding the printed lead name, relative to a lead crop.
/// `x`/`width` are fractions of the crop width measured from its left edge;
/// `top`/`height` are fractions of the baseline spacing measured from the
/// lead's baseline (negative = above).
struct LabelStrip {
    double x = 0.0;
    double width = 0.0;
    double top = 0.0;
    double height = 0.0;
};

/// Where the calibration pulse is printed: left of the lead area on the
/// `row`-th signal row. `x0`/`x1` are page-width fractions; `above`/`below`
/// are baseline-spacing fractions around that row's baseline.
struct PulseRegion {
    int row = 0;
    double x0 = 0.0;
    double x1 = 0.0;
    double above = 0.3;
    double below = 0.15;
};

struct RefPulseSpec {
    double width_s = 0.1;
    double height_mv = 0.5;
};

struct TemplateConfig {
    int id = 0;
    std::string name;
    int rows = 3;
    int cols = 4;
    /// Lead names in reading order (row-major over the printed grid).
    std::array<Lead, kLeadCount> lead_order{};
    /// L as a fraction of the baseline spacing, unless `margin_l_px` is set.
    double margin_l_fraction = 0.08;
    std::optional<int> margin_l_px;
    /// Fraction of the page height, from the top, reserved for header text.
    double header_rows_hint = 0.1;
    /// Horizontal extent of the lead area as page-width fractions.
    double signal_x0 = 0.0;
    double signal_x1 = 1.0;
    /// Columns dropped on each side of a detected separator.
    int separator_gap_px = 4;
    LabelStrip label_strip;
    PulseRegion pulse_region;
    RefPulseSpec ref_pulse;
    /// Fallback scale when the pulse cannot be measured (25 mm/s, 10 mm/mV).
    double default_px_per_mm = 10.0;
    /// Band tolerance N for trace tracking; 0 selects line thickness + 4.
    int band_n = 0;
};

/// Throws ValidationError listing every invalid field.
void validate(const TemplateConfig& cfg);

TemplateConfig template_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const TemplateConfig& cfg);
TemplateConfig load_template_config(const std::filesystem::path& path);

/// The four bundled printout templates, ids 1..4.
const TemplateConfig& builtin_template(int id);

/// Accepts a bundled id ("1".."4", "template3") or a path to a JSON config.
TemplateConfig resolve_template(const std::string& id_or_path);

// ----------------------------------------------------------------------------
// Layout detection
// ----------------------------------------------------------------------------

/// Local maxima of `counts` ranked by topographic prominence, greedily accepted
/// when at least `min_distance` away from every accepted peak. Flat-topped
/// maxima are reported at the center of the run of counts at least half the
/// maximum, so a thick line is located at its middle row. Returns at most `count` indices, ascending.
std::vector<int> find_histogram_peaks(const Eigen::VectorXi& counts, int count, int min_distance);

/// Exactly `cfg.rows` isoelectric-line rows, ascending. Rows inside the header
/// hint are ignored. Throws LayoutError naming how many peaks were found.
std::vector<int> detect_isoelectric_lines(const Histogram& vertical, const TemplateConfig& cfg);

/// `cfg.cols - 1` separator columns from the horizontal histogram of the band
/// spanned by the baselines. Throws LayoutError on too few peaks.
std::vector<int> detect_column_separators(const BinaryImage& img, std::span<const int> baselines,
                                          const TemplateConfig& cfg);

struct LeadCrop {
    Lead lead = Lead::I;
    int row = 0;
    int col = 0;
    /// Page coordinates.
    Rect rect;
    /// Baseline row in crop-local coordinates.
    int baseline = 0;
    /// Blanked label area, page coordinates, clipped to `rect`.
    Rect label_strip;
};

struct LeadLayout {
    std::vector<int> baselines;
    std::vector<int> separators;
    /// Reading order, one per lead.
    std::vector<LeadCrop> crops;
    /// Every lead's label rectangle, page coordinates.
    std::vector<Rect> label_strips;
    std::optional<Rect> ref_pulse_region;
    /// Pulse baseline in region-local coordinates.
    int ref_pulse_baseline = 0;
    int margin_l = 0;
    int spacing = 0;

    const LeadCrop& crop(Lead lead) const;
};

/// Median distance between consecutive baselines; for a single row the
/// distance from the header boundary to the page bottom.
int baseline_spacing(std::span<const int> baselines, int page_height, const TemplateConfig& cfg);

/// Label rectangle (page coordinates) for a lead column spanning
/// [left, right) with the given baseline row.
Rect label_strip_rect(int left, int right, int baseline, int spacing, const TemplateConfig& cfg);

/// Horizontal [left, right) bounds of lead column `col`.
std::pair<int, int> column_bounds(int col, int page_width, std::span<const int> separators,
                                  const TemplateConfig& cfg);

/// Each crop spans rows from the isoelectric line above its own minus L to the
/// isoelectric line below plus L (page header / spacing-extrapolated lines at
/// the ends), clamped to the page; columns lie strictly between separators.
LeadLayout crop_leads(const BinaryImage& img, std::span<const int> baselines, std::span<const int> separators,
                      const TemplateConfig& cfg, std::optional<int> margin_l = std::nullopt);

/// Crop pixels with every label strip that reaches into the crop blanked;
/// a lead's label sits inside the crop of the row above it.
BinaryImage extract_crop(const BinaryImage& img, const LeadLayout& layout, const LeadCrop& crop);

}  // namespace diecg
