// Copyright 2026 The diecg Authors
// SPDX-License-Identifier: Apache-2.0

#include "diecg/calibrate.hpp"

#include "diecg/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace diecg {

TraceMask track_pulse_region(const BinaryImage& page, const LeadLayout& layout, int band_n) {
    if (!layout.ref_pulse_region) throw CalibrationError("no pulse region");
    const Rect& r = *layout.ref_pulse_region;
    const LeadImage region{page.block(r.y, r.x, r.height, r.width), layout.ref_pulse_baseline};
    return track_trace(region, band_n);
}

std::vector<int> pulse_bands(const LeadLayout& layout, int band_n) {
    const int wide = (layout.ref_pulse_baseline + 1) / 2;
    if (wide > band_n) return {band_n, wide};
    return {band_n};
}

RefPulse measure_ref_pulse(const TraceMask& region, const RefPulseSpec& spec) {
    const BinaryImage& m = region.mask;
    const int rows = static_cast<int>(m.rows());
    const int cols = static_cast<int>(m.cols());
    const int b = region.baseline;
    const int tol = kPlateauTolerancePx;
    const int above = std::min(b - tol, rows);
    if (above <= 0 || cols == 0) throw CalibrationError("pulse region has no room above the baseline");

    const Eigen::VectorXi per_row = m.topRows(above).rowwise().count().cast<int>();
    const auto peak = find_histogram_peaks(per_row, 1, 1);
    if (peak.empty()) throw CalibrationError("no reference-pulse plateau found");
    // Rows of the plateau line: the run around the peak row at half its count.
    int lo = peak.front(), hi = peak.front();
    const int top_count = per_row[peak.front()];
    while (lo > 0 && 2 * per_row[lo - 1] >= top_count) --lo;
    while (hi + 1 < above && 2 * per_row[hi + 1] >= top_count) ++hi;
    lo -= tol;
    hi += tol;

    // A plateau column has ink on the plateau line and nothing longer than a
    // speckle or grid dot elsewhere; edge columns carry a vertical stroke.
    const int line_lo = std::max(lo, 0);
    int best_start = 0, best_len = 0;
    int start = 0, len = 0;
    for (int x = 0; x < cols; ++x) {
        const auto column = m.col(x);
        const bool on_line = column.segment(line_lo, hi - line_lo + 1).any();
        int stray = 0, run = 0;
        for (int y = 0; y < rows; ++y) {
            run = (column[y] == kInk && (y < line_lo || y > hi)) ? run + 1 : 0;
            stray = std::max(stray, run);
        }
        if (on_line && stray <= kMaxStrayRunPx) {
            if (len == 0) start = x;
            ++len;
            if (len > best_len) {
                best_len = len;
                best_start = start;
            }
        } else {
            len = 0;
        }
    }
    if (best_len < 2) throw CalibrationError("no reference-pulse plateau found");

    const RawTrace raw = extract_waveform(region);
    std::vector<double> amps(raw.values.data() + best_start, raw.values.data() + best_start + best_len);
    const auto mid = amps.begin() + static_cast<std::ptrdiff_t>(amps.size() / 2);
    std::nth_element(amps.begin(), mid, amps.end());
    double height = *mid;
    if (amps.size() % 2 == 0) height = 0.5 * (height + *std::max_element(amps.begin(), mid));

    RefPulse pulse;
    pulse.width_px = static_cast<double>(best_len + 1);
    pulse.height_px = height;
    pulse.spec_width_s = spec.width_s;
    pulse.spec_height_mv = spec.height_mv;
    if (!(pulse.height_px > 0.0)) throw CalibrationError("reference-pulse plateau is not above the baseline");
    return pulse;
}

EcgSignal to_physical(const RawTrace& raw, const Calibration& cal, Lead lead) {
    if (!cal.valid()) throw CalibrationError("calibration scales must be positive and finite");
    return {raw.values / cal.px_per_mv, cal.px_per_second, lead};
}

EcgSignal resample_to_200hz(const EcgSignal& sig, std::vector<std::string>* warnings) {
    if (!(sig.fs > 0.0)) throw CalibrationError("native sample rate must be positive");
    if (warnings && sig.fs * 4.0 < kTargetRate) {
        std::ostringstream msg;
        msg << "lead " << lead_name(sig.lead) << ": native rate " << sig.fs << " Hz is far below "
            << kTargetRate << " Hz (severe upsampling)";
        warnings->push_back(msg.str());
    }
    return {resample_linear(sig.samples, sig.fs, kTargetRate), kTargetRate, sig.lead};
}

}  // namespace diecg
