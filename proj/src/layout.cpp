// Copyright 2026 The diecg Authors
// SPDX-License-Identifier: Apache-2.0

#include "diecg/layout.hpp"

#include "diecg/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace diecg {

namespace {

struct PeakCandidate {
    int position = 0;
    int height = 0;
    int prominence = 0;
};

int iround(double v) { return static_cast<int>(std::lround(v)); }

}  // namespace

std::vector<int> find_histogram_peaks(const Eigen::VectorXi& counts, int count, int min_distance) {
    const int n = static_cast<int>(counts.size());
    std::vector<PeakCandidate> candidates;

    int i = 0;
    while (i < n) {
        int j = i;
        while (j + 1 < n && counts[j + 1] == counts[i]) ++j;
        const int v = counts[i];
        const bool rises = i == 0 || counts[i - 1] < v;
        const bool falls = j == n - 1 || counts[j + 1] < v;
        if (v > 0 && rises && falls) {
            // Bases: lowest point between the plateau and the nearest strictly
            // higher sample on each side.
            int left_min = v;
            for (int k = i - 1; k >= 0 && counts[k] <= v; --k) left_min = std::min(left_min, counts[k]);
            int right_min = v;
            for (int k = j + 1; k < n && counts[k] <= v; ++k) right_min = std::min(right_min, counts[k]);
            if (i == 0) left_min = 0;
            if (j == n - 1) right_min = 0;

            int lo = i, hi = j;
            const double near_top = 0.5 * v;
            while (lo > 0 && counts[lo - 1] >= near_top) --lo;
            while (hi < n - 1 && counts[hi + 1] >= near_top) ++hi;
            candidates.push_back({(lo + hi) / 2, v, v - std::max(left_min, right_min)});
        }
        i = j + 1;
    }

    std::stable_sort(candidates.begin(), candidates.end(), [](const PeakCandidate& a, const PeakCandidate& b) {
        if (a.prominence != b.prominence) return a.prominence > b.prominence;
        return a.height > b.height;
    });

    std::vector<int> accepted;
    for (const auto& c : candidates) {
        if (static_cast<int>(accepted.size()) >= count) break;
        const bool clear = std::all_of(accepted.begin(), accepted.end(),
                                       [&](int p) { return std::abs(p - c.position) >= min_distance; });
        if (clear) accepted.push_back(c.position);
    }
    std::sort(accepted.begin(), accepted.end());
    return accepted;
}

std::vector<int> detect_isoelectric_lines(const Histogram& vertical, const TemplateConfig& cfg) {
    const int height = static_cast<int>(vertical.counts.size());
    Eigen::VectorXi counts = vertical.counts;
    const int header = std::clamp(static_cast<int>(cfg.header_rows_hint * height), 0, height);
    counts.head(header).setZero();

    const int min_distance = std::max(1, height / (2 * cfg.rows));
    auto peaks = find_histogram_peaks(counts, cfg.rows, min_distance);
    if (static_cast<int>(peaks.size()) < cfg.rows) {
        throw LayoutError("found " + std::to_string(peaks.size()) + " isoelectric line(s), expected " +
                          std::to_string(cfg.rows));
    }
    return peaks;
}

int baseline_spacing(std::span<const int> baselines, int page_height, const TemplateConfig& cfg) {
    if (baselines.size() < 2) {
        const int header = static_cast<int>(cfg.header_rows_hint * page_height);
        return std::max(1, page_height - header);
    }
    std::vector<int> diffs;
    for (std::size_t k = 1; k < baselines.size(); ++k) diffs.push_back(baselines[k] - baselines[k - 1]);
    std::nth_element(diffs.begin(), diffs.begin() + diffs.size() / 2, diffs.end());
    return std::max(1, diffs[diffs.size() / 2]);
}

std::vector<int> detect_column_separators(const BinaryImage& img, std::span<const int> baselines,
                                          const TemplateConfig& cfg) {
    if (cfg.cols <= 1) return {};
    if (baselines.empty()) throw LayoutError("separator detection needs baselines");

    const int height = static_cast<int>(img.rows());
    const int width = static_cast<int>(img.cols());
    const int spacing = baseline_spacing(baselines, height, cfg);
    const int header = static_cast<int>(cfg.header_rows_hint * height);
    const int top = std::clamp(baselines.front() - spacing / 2, header, height - 1);
    const int bottom = std::clamp(baselines.back() + spacing / 2, top + 1, height);

    Histogram hist = projection_histogram(img.middleRows(top, bottom - top), Axis::Horizontal);
    const int x0 = std::clamp(iround(cfg.signal_x0 * width) + cfg.separator_gap_px, 0, width);
    const int x1 = std::clamp(iround(cfg.signal_x1 * width) - cfg.separator_gap_px, x0, width);
    hist.counts.head(x0).setZero();
    hist.counts.tail(width - x1).setZero();

    const int wanted = cfg.cols - 1;
    auto peaks = find_histogram_peaks(hist.counts, wanted, std::max(1, width / (2 * cfg.cols)));
    if (static_cast<int>(peaks.size()) < wanted) {
        throw LayoutError("found " + std::to_string(peaks.size()) + " column separator(s), expected " +
                          std::to_string(wanted));
    }
    return peaks;
}

Rect label_strip_rect(int left, int right, int baseline, int spacing, const TemplateConfig& cfg) {
    const int w = right - left;
    const auto& ls = cfg.label_strip;
    return {left + iround(ls.x * w), baseline + iround(ls.top * spacing), iround(ls.width * w),
            iround(ls.height * spacing)};
}

std::pair<int, int> column_bounds(int col, int page_width, std::span<const int> separators,
                                  const TemplateConfig& cfg) {
    const int gap = cfg.separator_gap_px;
    const int left = col == 0 ? iround(cfg.signal_x0 * page_width) : separators[col - 1] + gap;
    const int right = col == cfg.cols - 1 ? iround(cfg.signal_x1 * page_width) : separators[col] - gap + 1;
    return {std::clamp(left, 0, page_width), std::clamp(right, 0, page_width)};
}

const LeadCrop& LeadLayout::crop(Lead lead) const {
    for (const auto& c : crops) {
        if (c.lead == lead) return c;
    }
    throw LayoutError("layout has no crop for lead " + std::string(lead_name(lead)));
}

LeadLayout crop_leads(const BinaryImage& img, std::span<const int> baselines, std::span<const int> separators,
                      const TemplateConfig& cfg, std::optional<int> margin_l) {
    if (static_cast<int>(baselines.size()) != cfg.rows) {
        throw LayoutError("expected " + std::to_string(cfg.rows) + " baselines, got " +
                          std::to_string(baselines.size()));
    }
    if (static_cast<int>(separators.size()) != cfg.cols - 1) {
        throw LayoutError("expected " + std::to_string(cfg.cols - 1) + " separators, got " +
                          std::to_string(separators.size()));
    }

    const int height = static_cast<int>(img.rows());
    const int width = static_cast<int>(img.cols());
    const int header = static_cast<int>(cfg.header_rows_hint * height);

    LeadLayout layout;
    layout.baselines.assign(baselines.begin(), baselines.end());
    layout.separators.assign(separators.begin(), separators.end());
    layout.spacing = baseline_spacing(baselines, height, cfg);
    layout.margin_l = margin_l   ? *margin_l
                      : cfg.margin_l_px ? *cfg.margin_l_px
                                        : std::max(1, iround(cfg.margin_l_fraction * layout.spacing));
    const int L = layout.margin_l;

    for (int r = 0; r < cfg.rows; ++r) {
        const int b = baselines[r];
        const int upper = r > 0 ? baselines[r - 1] : b - layout.spacing;
        const int lower = r + 1 < cfg.rows ? baselines[r + 1] : b + layout.spacing;
        const int top = std::max({upper - L, 0, r == 0 ? header : 0});
        const int bottom = std::min(lower + L, height - 1);

        for (int c = 0; c < cfg.cols; ++c) {
            const auto [left, right] = column_bounds(c, width, separators, cfg);
            LeadCrop crop;
            crop.lead = cfg.lead_order[static_cast<std::size_t>(r * cfg.cols + c)];
            crop.row = r;
            crop.col = c;
            crop.rect = {left, top, right - left, bottom - top + 1};
            if (crop.rect.empty() || b < top || b > bottom) {
                throw LayoutError("degenerate crop for lead " + std::string(lead_name(crop.lead)));
            }
            crop.baseline = b - top;
            const Rect strip = label_strip_rect(left, right, b, layout.spacing, cfg);
            layout.label_strips.push_back(strip);
            crop.label_strip = strip.intersect(crop.rect);
            layout.crops.push_back(crop);
        }
    }

    const auto& pr = cfg.pulse_region;
    const int pb = baselines[std::min(pr.row, cfg.rows - 1)];
    const int px0 = std::clamp(iround(pr.x0 * width), 0, width);
    const int px1 = std::clamp(iround(pr.x1 * width), 0, width);
    const int py0 = std::clamp(pb - iround(pr.above * layout.spacing), 0, height - 1);
    const int py1 = std::clamp(pb + iround(pr.below * layout.spacing), 0, height - 1);
    Rect region{px0, py0, px1 - px0, py1 - py0 + 1};
    if (!region.empty()) {
        layout.ref_pulse_region = region;
        layout.ref_pulse_baseline = pb - py0;
    }
    return layout;
}

BinaryImage extract_crop(const BinaryImage& img, const LeadLayout& layout, const LeadCrop& crop) {
    const Rect& r = crop.rect;
    BinaryImage out = img.block(r.y, r.x, r.height, r.width);
    for (const Rect& strip : layout.label_strips) {
        const Rect ls = strip.intersect(r);
        if (!ls.empty()) out.block(ls.y - r.y, ls.x - r.x, ls.height, ls.width).setConstant(kPaper);
    }
    return out;
}

}  // namespace diecg
