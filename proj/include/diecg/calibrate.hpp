// Copyright 2026 The diecg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "diecg/layout.hpp"
#include "diecg/lead.hpp"
#include "diecg/trace.hpp"

#include <Eigen/Core>

#include <cmath>
#include <string>
#include <vector>

namespace diecg {

inline constexpr double kTargetRate = 200.0;

struct RefPulse {
    double width_px = 0.0;
    double height_px = 0.0;
    double spec_width_s = 0.1;
    double spec_height_mv = 0.5;
};

struct Calibration {
    double px_per_second = 0.0;
    double px_per_mv = 0.0;

    bool valid() const {
        return std::isfinite(px_per_second) && std::isfinite(px_per_mv) && px_per_second > 0.0 && px_per_mv > 0.0;
    }

    static Calibration from_pulse(const RefPulse& pulse) {
        return {pulse.width_px / pulse.spec_width_s, pulse.height_px / pulse.spec_height_mv};
    }

    /// Standard paper: 25 mm/s and 10 mm/mV.
    static Calibration standard_paper(double px_per_mm) { return {25.0 * px_per_mm, 10.0 * px_per_mm}; }
};

struct EcgSignal {
    Eigen::VectorXd samples;
    /// Samples per second.
    double fs = kTargetRate;
    Lead lead = Lead::I;

    double duration_s() const { return static_cast<double>(samples.size()) / fs; }
};

/// Plateau tolerance in pixels.
inline constexpr int kPlateauTolerancePx = 2;
/// Longest vertical ink run off the plateau line still treated as noise.
inline constexpr int kMaxStrayRunPx = 4;

/// Tracks the layout's pulse region with band `band_n`. Throws
/// CalibrationError when the layout has no pulse region.
TraceMask track_pulse_region(const BinaryImage& page, const LeadLayout& layout, int band_n);

/// Bands to try on the pulse region, in order: the lead band, then half the
/// rows above the pulse baseline when that is wider. A pulse edge jumps the
/// full pulse height within one column, and at high resolution two lead bands
/// do not cover it. The wider band admits more speckle, so it is the second try.
std::vector<int> pulse_bands(const LeadLayout& layout, int band_n);

/// Measures the printed square pulse in a tracked pulse region.
///
/// The plateau line is the most inked row band above the baseline. Plateau
/// columns carry ink within 2 px of that band and no vertical run longer than
/// kMaxStrayRunPx anywhere else; the two vertical edges flank the longest run of them, so the
/// printed width is the run length plus one. The height is the median amplitude over the run,
/// which ignores isolated speckles caught in the band.
/// Throws CalibrationError when no plateau of at least two columns exists.
RefPulse measure_ref_pulse(const TraceMask& region, const RefPulseSpec& spec);

/// samples = raw / px_per_mv at the native column rate px_per_second.
EcgSignal to_physical(const RawTrace& raw, const Calibration& cal, Lead lead);

/// Linear interpolation onto a grid of `out_rate` spanning the same duration:
/// round(n * out_rate / in_rate) samples, sample k taken at input position
/// k * in_rate / out_rate (held at the last input sample past the end).
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> resample_linear(const Eigen::MatrixBase<Derived>& x,
                                                                           double in_rate, double out_rate) {
    using Scalar = typename Derived::Scalar;
    const Eigen::Index n = x.size();
    const auto m = static_cast<Eigen::Index>(std::llround(static_cast<double>(n) * out_rate / in_rate));
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> y(m);
    if (n == 0) return y;
    const double step = in_rate / out_rate;
    for (Eigen::Index k = 0; k < m; ++k) {
        const double pos = static_cast<double>(k) * step;
        const auto i = static_cast<Eigen::Index>(std::floor(pos));
        if (i >= n - 1) {
            y[k] = x[n - 1];
            continue;
        }
        const Scalar frac = static_cast<Scalar>(pos - static_cast<double>(i));
        y[k] = x[i] + frac * (x[i + 1] - x[i]);
    }
    return y;
}

/// Resamples to 200 Hz. Appends a warning when the native rate is more than
/// four times below the target (heavy upsampling).
EcgSignal resample_to_200hz(const EcgSignal& sig, std::vector<std::string>* warnings = nullptr);

}  // namespace diecg
