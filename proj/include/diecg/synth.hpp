// Copyright 2026 The diecg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "diecg/image.hpp"
#include "diecg/layout.hpp"
#include "diecg/lead.hpp"
#include "diecg/quality.hpp"

#include <Eigen/Core>
#include <json.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace diecg {

enum class Waveform { Pqrst, Sine, Flat };

struct SynthSpec {
    int template_id = 1;
    std::string record_id = "synth";
    std::optional<ClassLabel> class_label;
    Waveform waveform = Waveform::Pqrst;
    double bpm = 75.0;
    /// Lead II R amplitude for PQRST, peak amplitude for Sine.
    double amplitude_mv = 1.0;
    double sine_hz = 1.0;
    /// Time of the first R peak on the page clock.
    double first_beat_s = 0.3;
    /// Minor grid pitch; px_per_second = 25 * pitch, px_per_mv = 10 * pitch.
    int grid_px = 10;
    int thickness = 3;
    double speckle_density = 0.0;
    /// Intensity of the dark dots printed at major grid intersections; 255
    /// disables them.
    int grid_dot_intensity = 255;
    RefPulseSpec pulse;
    /// Baseline spacing in mV.
    double row_spacing_mv = 3.2;
    /// Render even when traces come closer than the tracking band.
    bool allow_overlap = false;
    std::uint64_t seed = 0;

    double px_per_second() const { return 25.0 * grid_px; }
    double px_per_mv() const { return 10.0 * grid_px; }
};

/// Throws ValidationError listing every invalid field.
void validate(const SynthSpec& spec);

/// Preset for a template id with heart rate, amplitude and phase drawn from
/// `seed`: 50-140 bpm, 0.9-1.15 mV.
SynthSpec synth_preset(int template_id, std::uint64_t seed);

SynthSpec synth_spec_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const SynthSpec& spec);

struct SynthLeadTruth {
    int row = 0;
    int col = 0;
    /// First page column drawn for this lead.
    int x0 = 0;
    int baseline = 0;
    /// Exact amplitude at each drawn column, starting at x0.
    Eigen::VectorXd px;
    Eigen::VectorXd mv;
    /// Centre of the rasterized stroke in each column, in pixels above the
    /// baseline. Differs from px where the curve bends sharply within a column.
    Eigen::VectorXd drawn_px;
};

struct SynthTruth {
    int width = 0;
    int height = 0;
    int template_id = 0;
    std::vector<int> baselines;
    std::vector<int> separators;
    int header_rows = 0;
    /// Canonical lead order.
    std::array<SynthLeadTruth, kLeadCount> leads{};
    double px_per_second = 0.0;
    double px_per_mv = 0.0;
    int pulse_width_px = 0;
    int pulse_height_px = 0;
    double bpm = 0.0;
    /// Mean RR interval of the rendered rhythm.
    double rr_ms = 0.0;
    /// R-peak times on the page clock.
    std::vector<double> r_peak_times_s;
    /// Lead II R peaks as 200 Hz sample indices from the start of its strip.
    RPeakSet lead_ii_peaks;
};

nlohmann::ordered_json to_json(const SynthTruth& truth);

/// Amplitude in mV of `lead` at time `t` on the page clock.
double synth_amplitude(const SynthSpec& spec, Lead lead, double t);

struct SynthImage {
    RgbImage image;
    SynthTruth truth;
};

/// Renders a printout in the style of the SynthSpec's template. Throws
/// ValidationError for an invalid spec and RenderError when a trace would
/// run into a label or come within the tracking band of a neighbouring lead,
/// unless `allow_overlap` is set.
SynthImage render(const SynthSpec& spec);

struct PerturbParams {
    /// Fraction of pixels turned into black speckles.
    double speckle_density = 0.0;
    /// Intensity written at major grid intersections (255 = unchanged).
    int grid_dot_intensity = 255;
    int major_pitch_px = 50;
    int dot_px = 2;
};

/// Adds isolated black speckles and darkens major grid intersections.
/// Deterministic for a given seed.
void perturb(RgbImage& image, const PerturbParams& params, std::uint64_t seed);

/// Writes `<dir>/<record_id>.png`, `<record_id>.truth.json` and
/// `annotations/<record_id>.rpeaks.json`.
void write_synth(const SynthSpec& spec, const SynthImage& out, const std::filesystem::path& dir);

/// Draws `text` with a 5x7 bitmap font, scaled to fit `box`. Unknown
/// characters are skipped.
void draw_text(RgbImage& image, const Rect& box, const std::string& text, std::uint8_t value = 0);

}  // namespace diecg
