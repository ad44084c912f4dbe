// Copyright 2026 The diecg Authors
// SPDX-License-Identifier: Apache-2.0

#include "diecg/synth.hpp"

#include "diecg/error.hpp"
#include "diecg/raster.hpp"
#include "diecg/signalio.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>

namespace diecg {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

int iround(double v) { return static_cast<int>(std::lround(v)); }

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// P, Q, R, S, T amplitudes relative to the lead II R wave.
struct LeadShape {
    double p, q, r, s, t;
};

constexpr std::array<LeadShape, kLeadCount> kShapes = {{
    {0.10, -0.05, 0.70, -0.10, 0.20},   // I
    {0.15, -0.08, 1.00, -0.15, 0.30},   // II
    {0.05, -0.05, 0.40, -0.10, 0.10},   // III
    {-0.12, 0.06, -0.85, 0.12, -0.25},  // aVR
    {0.05, -0.05, 0.35, -0.10, 0.05},   // aVL
    {0.10, -0.05, 0.70, -0.12, 0.20},   // aVF
    {0.08, 0.00, 0.25, -0.80, -0.05},   // V1
    {0.08, 0.00, 0.45, -0.90, 0.30},    // V2
    {0.08, -0.02, 0.70, -0.60, 0.35},   // V3
    {0.10, -0.05, 1.10, -0.35, 0.35},   // V4
    {0.10, -0.08, 1.05, -0.15, 0.30},   // V5
    {0.10, -0.08, 0.85, -0.10, 0.25},   // V6
}};

// Gaussian truncated at 3 sigma and shifted so it meets zero continuously.
double bump(double dt, double sigma) {
    if (std::abs(dt) >= 3.0 * sigma) return 0.0;
    static const double floor = std::exp(-4.5);
    return (std::exp(-0.5 * dt * dt / (sigma * sigma)) - floor) / (1.0 - floor);
}

double beat(const LeadShape& s, double dt, double rr) {
    const double root = std::sqrt(rr);
    return s.p * bump(dt + 0.16 * root, 0.02 * root) + s.q * bump(dt + 0.03, 0.010) + s.r * bump(dt, 0.016) +
           s.s * bump(dt - 0.036, 0.014) + s.t * bump(dt - 0.28 * root, 0.045 * root);
}

struct Geometry {
    int width = 0;
    int height = 0;
    int header = 0;
    int area0 = 0;
    double pps = 0.0;
    double ppmv = 0.0;
    int spacing = 0;
    std::vector<int> baselines;
    std::vector<int> starts;  // first page column of each lead column, plus the end
    std::vector<int> separators;
};

Geometry page_geometry(const SynthSpec& spec, const TemplateConfig& cfg) {
    Geometry g;
    g.pps = spec.px_per_second();
    g.ppmv = spec.px_per_mv();
    const double area = 10.0 * g.pps;
    g.width = iround(area / (cfg.signal_x1 - cfg.signal_x0));
    g.area0 = iround(cfg.signal_x0 * g.width);
    g.header = iround(1.6 * g.ppmv);
    g.height = iround(g.ppmv * (1.6 + cfg.rows * spec.row_spacing_mv + 0.4));
    g.spacing = iround(spec.row_spacing_mv * g.ppmv);
    for (int r = 0; r < cfg.rows; ++r) {
        g.baselines.push_back(iround(g.ppmv * (1.6 + (r + 0.62) * spec.row_spacing_mv)));
    }
    const double seg = area / cfg.cols;
    for (int c = 0; c <= cfg.cols; ++c) g.starts.push_back(g.area0 + iround(c * seg));
    for (int c = 1; c < cfg.cols; ++c) g.separators.push_back(g.starts[static_cast<std::size_t>(c)]);
    return g;
}

void fill_rect(RgbImage& img, Rect r, std::uint8_t rv, std::uint8_t gv, std::uint8_t bv) {
    r = r.intersect({0, 0, static_cast<int>(img.width()), static_cast<int>(img.height())});
    if (r.empty()) return;
    img.r.block(r.y, r.x, r.height, r.width).setConstant(rv);
    img.g.block(r.y, r.x, r.height, r.width).setConstant(gv);
    img.b.block(r.y, r.x, r.height, r.width).setConstant(bv);
}

void draw_grid(RgbImage& img, int pitch) {
    const int w = static_cast<int>(img.width());
    const int h = static_cast<int>(img.height());
    for (int y = 0; y < h; y += pitch) {
        const bool major = (y / pitch) % 5 == 0;
        fill_rect(img, {0, y, w, 1}, 255, major ? 170 : 215, major ? 170 : 215);
    }
    for (int x = 0; x < w; x += pitch) {
        const bool major = (x / pitch) % 5 == 0;
        for (int y = 0; y < h; ++y) {
            // Major lines win at crossings.
            if (major || img.g(y, x) == 255) img.set(y, x, 255, major ? 170 : 215, major ? 170 : 215);
        }
    }
}

// Per-column vertical ink extent of a drawn trace.
struct Extent {
    int x0 = 0;
    std::vector<int> top;
    std::vector<int> bottom;
};

// Draws y(x) (rows, fractional) over columns [x0, x1]. Each column covers the
// curve on [x - 0.5, x + 0.5] sampled at 9 points; the covered row range is
// widened by the line thickness.
template <typename RowAt>
Extent draw_curve(RgbImage& img, int x0, int x1, int thickness, RowAt row_at) {
    const int up = (thickness - 1) / 2;
    const int down = thickness - 1 - up;
    const int h = static_cast<int>(img.height());
    Extent ext;
    ext.x0 = x0;
    constexpr int kSub = 8;
    for (int x = x0; x <= x1; ++x) {
        double lo = 1e300, hi = -1e300;
        for (int i = 0; i <= kSub; ++i) {
            const double y = row_at(x - 0.5 + static_cast<double>(i) / kSub);
            lo = std::min(lo, y);
            hi = std::max(hi, y);
        }
        const int top = iround(lo) - up;
        const int bottom = iround(hi) + down;
        ext.top.push_back(top);
        ext.bottom.push_back(bottom);
        if (x < 0 || x >= img.width()) continue;
        for (int y = std::max(top, 0); y <= std::min(bottom, h - 1); ++y) img.set(y, x, 0, 0, 0);
    }
    return ext;
}

// 5x7 glyphs for the characters used in lead names.
const std::map<char, std::array<const char*, 7>>& font() {
    static const std::map<char, std::array<const char*, 7>> glyphs = {
        {'I', {"#####", "..#..", "..#..", "..#..", "..#..", "..#..", "#####"}},
        {'V', {"#...#", "#...#", "#...#", "#...#", "#...#", ".#.#.", "..#.."}},
        {'a', {".....", ".....", ".###.", "....#", ".####", "#...#", ".####"}},
        {'R', {"####.", "#...#", "#...#", "####.", "#.#..", "#..#.", "#...#"}},
        {'L', {"#....", "#....", "#....", "#....", "#....", "#....", "#####"}},
        {'F', {"#####", "#....", "#....", "####.", "#....", "#....", "#...."}},
        {'1', {"..#..", ".##..", "..#..", "..#..", "..#..", "..#..", ".###."}},
        {'2', {".###.", "#...#", "....#", "...#.", "..#..", ".#...", "#####"}},
        {'3', {"####.", "....#", "....#", ".###.", "....#", "....#", "####."}},
        {'4', {"...#.", "..##.", ".#.#.", "#..#.", "#####", "...#.", "...#."}},
        {'5', {"#####", "#....", "####.", "....#", "....#", "#...#", ".###."}},
        {'6', {".###.", "#....", "#....", "####.", "#...#", "#...#", ".###."}},
    };
    return glyphs;
}

}  // namespace

void draw_text(RgbImage& image, const Rect& box, const std::string& text, std::uint8_t value) {
    if (box.empty() || text.empty()) return;
    const int scale = std::max(1, std::min(box.height / 7, box.width / (6 * static_cast<int>(text.size()))));
    int x = box.x;
    for (char ch : text) {
        auto it = font().find(ch);
        if (it == font().end()) continue;
        for (int gy = 0; gy < 7; ++gy) {
            for (int gx = 0; gx < 5; ++gx) {
                if (it->second[static_cast<std::size_t>(gy)][gx] != '#') continue;
                fill_rect(image, {x + gx * scale, box.y + gy * scale, scale, scale}, value, value, value);
            }
        }
        x += 6 * scale;
    }
}

void validate(const SynthSpec& spec) {
    std::vector<std::string> bad;
    if (spec.template_id < 1 || spec.template_id > 4) bad.push_back("template_id must be 1-4");
    if (spec.record_id.empty()) bad.push_back("record_id must not be empty");
    if (!(spec.bpm >= 20.0 && spec.bpm <= 250.0)) bad.push_back("bpm must be in [20, 250]");
    if (!(spec.amplitude_mv >= 0.0 && std::isfinite(spec.amplitude_mv))) bad.push_back("amplitude_mv must be >= 0");
    if (!(spec.sine_hz > 0.0)) bad.push_back("sine_hz must be positive");
    if (!std::isfinite(spec.first_beat_s)) bad.push_back("first_beat_s must be finite");
    if (spec.grid_px < 2 || spec.grid_px > 40) bad.push_back("grid_px must be in [2, 40]");
    if (spec.thickness < 1 || spec.thickness > 15) bad.push_back("thickness must be in [1, 15]");
    if (!(spec.speckle_density >= 0.0 && spec.speckle_density <= 0.01)) {
        bad.push_back("speckle_density must be in [0, 0.01]");
    }
    if (spec.grid_dot_intensity < 0 || spec.grid_dot_intensity > 255) bad.push_back("grid_dot_intensity must be 0-255");
    if (!(spec.pulse.width_s > 0.0 && spec.pulse.width_s <= 0.35)) bad.push_back("pulse.width_s must be in (0, 0.35]");
    if (!(spec.pulse.height_mv > 0.0 && spec.pulse.height_mv <= 1.5)) bad.push_back("pulse.height_mv must be in (0, 1.5]");
    if (!(spec.row_spacing_mv >= 1.0 && spec.row_spacing_mv <= 10.0)) bad.push_back("row_spacing_mv must be in [1, 10]");
    if (!bad.empty()) {
        std::string msg = "invalid synth spec:";
        for (const auto& b : bad) msg += "\n  " + b;
        throw ValidationError(msg);
    }
}

SynthSpec synth_preset(int template_id, std::uint64_t seed) {
    if (template_id < 1 || template_id > 4) throw ValidationError("no preset for template " + std::to_string(template_id));
    std::mt19937_64 rng(seed * 4 + static_cast<std::uint64_t>(template_id));
    SynthSpec spec;
    spec.template_id = template_id;
    spec.record_id = "t" + std::to_string(template_id) + "_" + std::to_string(seed);
    spec.seed = seed;
    spec.bpm = 50.0 + 90.0 * uniform01(rng);
    spec.amplitude_mv = 0.9 + 0.25 * uniform01(rng);
    spec.first_beat_s = uniform01(rng) * 60.0 / spec.bpm;
    switch (template_id) {
        case 1:
            break;
        case 2:
            spec.speckle_density = 0.0005;
            break;
        case 3:
            spec.grid_px = 8;
            spec.row_spacing_mv = 3.0;
            spec.pulse.width_s = 0.2;
            spec.speckle_density = 0.001;
            break;
        case 4:
            spec.grid_px = 12;
            spec.thickness = 5;
            spec.speckle_density = 0.0005;
            spec.grid_dot_intensity = 70;
            break;
    }
    return spec;
}

namespace {

const char* waveform_name(Waveform w) {
    switch (w) {
        case Waveform::Pqrst: return "pqrst";
        case Waveform::Sine: return "sine";
        case Waveform::Flat: return "flat";
    }
    return "pqrst";
}

}  // namespace

SynthSpec synth_spec_from_json(const json& j) {
    if (!j.is_object()) throw ValidationError("synth spec must be a JSON object");
    SynthSpec spec;
    if (j.contains("preset")) {
        const std::string preset = j.at("preset").get<std::string>();
        if (preset.rfind("template", 0) != 0 || preset.size() != 9) {
            throw ValidationError("unknown preset " + preset);
        }
        spec = synth_preset(preset[8] - '0', j.value("seed", std::uint64_t{0}));
    }
    try {
        spec.template_id = j.value("template_id", spec.template_id);
        spec.record_id = j.value("record_id", spec.record_id);
        if (j.contains("class_label") && !j["class_label"].is_null()) {
            const auto name = j["class_label"].get<std::string>();
            spec.class_label = parse_class(name);
            if (!spec.class_label) throw ValidationError("unknown class_label " + name);
        }
        if (j.contains("waveform")) {
            const auto w = j["waveform"].get<std::string>();
            if (w == "pqrst") spec.waveform = Waveform::Pqrst;
            else if (w == "sine") spec.waveform = Waveform::Sine;
            else if (w == "flat") spec.waveform = Waveform::Flat;
            else throw ValidationError("waveform must be pqrst, sine or flat");
        }
        spec.bpm = j.value("bpm", spec.bpm);
        spec.amplitude_mv = j.value("amplitude_mv", spec.amplitude_mv);
        spec.sine_hz = j.value("sine_hz", spec.sine_hz);
        spec.first_beat_s = j.value("first_beat_s", spec.first_beat_s);
        spec.grid_px = j.value("grid_px", spec.grid_px);
        spec.thickness = j.value("thickness", spec.thickness);
        spec.speckle_density = j.value("speckle_density", spec.speckle_density);
        spec.grid_dot_intensity = j.value("grid_dot_intensity", spec.grid_dot_intensity);
        if (j.contains("pulse")) {
            spec.pulse.width_s = j["pulse"].value("width_s", spec.pulse.width_s);
            spec.pulse.height_mv = j["pulse"].value("height_mv", spec.pulse.height_mv);
        }
        spec.row_spacing_mv = j.value("row_spacing_mv", spec.row_spacing_mv);
        spec.allow_overlap = j.value("allow_overlap", spec.allow_overlap);
        spec.seed = j.value("seed", spec.seed);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("synth spec: ") + e.what());
    }
    validate(spec);
    return spec;
}

ordered_json to_json(const SynthSpec& spec) {
    ordered_json j;
    j["template_id"] = spec.template_id;
    j["record_id"] = spec.record_id;
    j["class_label"] = spec.class_label ? ordered_json(std::string(class_name(*spec.class_label))) : ordered_json();
    j["waveform"] = waveform_name(spec.waveform);
    j["bpm"] = spec.bpm;
    j["amplitude_mv"] = spec.amplitude_mv;
    j["sine_hz"] = spec.sine_hz;
    j["first_beat_s"] = spec.first_beat_s;
    j["grid_px"] = spec.grid_px;
    j["thickness"] = spec.thickness;
    j["speckle_density"] = spec.speckle_density;
    j["grid_dot_intensity"] = spec.grid_dot_intensity;
    j["pulse"] = {{"width_s", spec.pulse.width_s}, {"height_mv", spec.pulse.height_mv}};
    j["row_spacing_mv"] = spec.row_spacing_mv;
    j["allow_overlap"] = spec.allow_overlap;
    j["seed"] = spec.seed;
    return j;
}

double synth_amplitude(const SynthSpec& spec, Lead lead, double t) {
    switch (spec.waveform) {
        case Waveform::Flat:
            return 0.0;
        case Waveform::Sine:
            return spec.amplitude_mv * std::sin(2.0 * std::numbers::pi * spec.sine_hz * t);
        case Waveform::Pqrst:
            break;
    }
    const double rr = 60.0 / spec.bpm;
    const LeadShape& shape = kShapes[lead_index(lead)];
    // Beats within one second either side contribute.
    const double k0 = std::floor((t - 1.0 - spec.first_beat_s) / rr);
    double v = 0.0;
    for (double k = k0; spec.first_beat_s + k * rr <= t + 1.0; k += 1.0) {
        v += beat(shape, t - (spec.first_beat_s + k * rr), rr);
    }
    return spec.amplitude_mv * v;
}

SynthImage render(const SynthSpec& spec) {
    validate(spec);
    const TemplateConfig& cfg = builtin_template(spec.template_id);
    const Geometry g = page_geometry(spec, cfg);
    std::mt19937_64 rng(spec.seed);

    SynthImage out{RgbImage(g.height, g.width, 255), {}};
    RgbImage& img = out.image;
    SynthTruth& truth = out.truth;
    truth.width = g.width;
    truth.height = g.height;
    truth.template_id = spec.template_id;
    truth.baselines = g.baselines;
    truth.separators = g.separators;
    truth.header_rows = g.header;
    truth.px_per_second = g.pps;
    truth.px_per_mv = g.ppmv;
    truth.bpm = spec.waveform == Waveform::Pqrst ? spec.bpm : 0.0;
    truth.rr_ms = spec.waveform == Waveform::Pqrst ? 60000.0 / spec.bpm : 0.0;

    draw_grid(img, spec.grid_px);

    // Header: a rule above the lead area and blocks standing in for text.
    fill_rect(img, {0, iround(0.85 * g.header), g.width, 2}, 0, 0, 0);
    const int block_h = std::max(2, iround(0.08 * g.header));
    for (int line = 0; line < 3; ++line) {
        int x = iround(0.02 * g.width);
        const int y = iround((0.15 + 0.2 * line) * g.header);
        while (x < g.width / 2) {
            const int w = 4 * block_h + static_cast<int>(uniform01(rng) * 10.0 * block_h);
            fill_rect(img, {x, y, w, block_h}, 30, 30, 30);
            x += w + 2 * block_h;
        }
    }

    // Labels, separators and the calibration pulse on every row.
    std::vector<Rect> labels;
    for (int r = 0; r < cfg.rows; ++r) {
        const int b = g.baselines[static_cast<std::size_t>(r)];
        for (int c = 0; c < cfg.cols; ++c) {
            const auto [left, right] = column_bounds(c, g.width, g.separators, cfg);
            const Rect strip = label_strip_rect(left, right, b, g.spacing, cfg);
            labels.push_back(strip);
            const Rect inner{strip.x + 3, strip.y + 3, strip.width - 6, strip.height - 6};
            const Lead lead = cfg.lead_order[static_cast<std::size_t>(r * cfg.cols + c)];
            draw_text(img, inner, std::string(lead_name(lead)));
        }
        for (int sep : g.separators) {
            fill_rect(img, {sep - 1, b - iround(0.45 * g.spacing), 3, iround(0.75 * g.spacing)}, 0, 0, 0);
        }
    }

    truth.pulse_width_px = iround(spec.pulse.width_s * g.pps);
    truth.pulse_height_px = iround(spec.pulse.height_mv * g.ppmv);
    const int pulse_start = iround(0.06 * g.pps);
    const int rise = iround(0.12 * g.pps);
    const int fall = rise + truth.pulse_width_px;
    const int pulse_end = fall + iround(0.04 * g.pps);
    for (int r = 0; r < cfg.rows; ++r) {
        const double b = g.baselines[static_cast<std::size_t>(r)];
        const double h = truth.pulse_height_px;
        draw_curve(img, pulse_start, pulse_end, spec.thickness,
                   [&](double x) { return (x > rise && x < fall) ? b - h : b; });
    }

    // Traces.
    std::array<Extent, kLeadCount> extents;
    for (int r = 0; r < cfg.rows; ++r) {
        for (int c = 0; c < cfg.cols; ++c) {
            const Lead lead = cfg.lead_order[static_cast<std::size_t>(r * cfg.cols + c)];
            const int b = g.baselines[static_cast<std::size_t>(r)];
            const int x0 = g.starts[static_cast<std::size_t>(c)];
            const int x1 = g.starts[static_cast<std::size_t>(c + 1)] - 1;
            auto time_at = [&](double x) { return (x - g.area0) / g.pps; };
            SynthLeadTruth& lt = truth.leads[lead_index(lead)];
            lt.row = r;
            lt.col = c;
            lt.x0 = x0;
            lt.baseline = b;
            lt.mv.resize(x1 - x0 + 1);
            for (int x = x0; x <= x1; ++x) lt.mv[x - x0] = synth_amplitude(spec, lead, time_at(x));
            lt.px = lt.mv * g.ppmv;
            extents[lead_index(lead)] = draw_curve(img, x0, x1, spec.thickness, [&](double x) {
                return b - g.ppmv * synth_amplitude(spec, lead, time_at(x));
            });
            const Extent& drawn = extents[lead_index(lead)];
            lt.drawn_px.resize(lt.px.size());
            for (Eigen::Index k = 0; k < lt.drawn_px.size(); ++k) {
                lt.drawn_px[k] = b - 0.5 * (drawn.top[static_cast<std::size_t>(k)] + drawn.bottom[static_cast<std::size_t>(k)]);
            }
        }
    }

    if (!spec.allow_overlap) {
        const int band = cfg.band_n > 0 ? cfg.band_n : spec.thickness + 4;
        for (std::size_t i = 0; i < kLeadCount; ++i) {
            const Extent& e = extents[i];
            const std::string name(lead_name(kLeadOrder[i]));
            for (std::size_t k = 0; k < e.top.size(); ++k) {
                const int x = e.x0 + static_cast<int>(k);
                if (e.top[k] < g.header || e.bottom[k] >= g.height) {
                    throw RenderError("lead " + name + " leaves the lead area at column " + std::to_string(x));
                }
                for (const Rect& lab : labels) {
                    if (x < lab.x - 2 || x >= lab.right() + 2) continue;
                    if (e.bottom[k] >= lab.y - 2 && e.top[k] < lab.bottom() + 2) {
                        throw RenderError("lead " + name + " runs into a lead label at column " + std::to_string(x));
                    }
                }
            }
        }
        for (int r = 0; r + 1 < cfg.rows; ++r) {
            for (int c = 0; c < cfg.cols; ++c) {
                const Lead upper = cfg.lead_order[static_cast<std::size_t>(r * cfg.cols + c)];
                const Lead lower = cfg.lead_order[static_cast<std::size_t>((r + 1) * cfg.cols + c)];
                const Extent& u = extents[lead_index(upper)];
                const Extent& l = extents[lead_index(lower)];
                const int n = static_cast<int>(u.top.size());
                for (int k = 0; k < n; ++k) {
                    for (int d = -1; d <= 1; ++d) {
                        if (k + d < 0 || k + d >= n) continue;
                        if (l.top[static_cast<std::size_t>(k + d)] - u.bottom[static_cast<std::size_t>(k)] <= band) {
                            throw RenderError("leads " + std::string(lead_name(upper)) + " and " +
                                              std::string(lead_name(lower)) + " come within " +
                                              std::to_string(band) + " px at column " + std::to_string(u.x0 + k));
                        }
                    }
                }
            }
        }
    }

    PerturbParams noise;
    noise.speckle_density = spec.speckle_density;
    noise.grid_dot_intensity = spec.grid_dot_intensity;
    noise.major_pitch_px = 5 * spec.grid_px;
    perturb(img, noise, spec.seed ^ 0x9e3779b97f4a7c15ULL);

    if (spec.waveform == Waveform::Pqrst) {
        const double rr = 60.0 / spec.bpm;
        for (double t = spec.first_beat_s; t < 10.0; t += rr) truth.r_peak_times_s.push_back(t);
        const SynthLeadTruth& ii = truth.leads[lead_index(Lead::II)];
        const double t0 = (ii.x0 - g.area0) / g.pps;
        const double t1 = (ii.x0 + ii.mv.size() - 1 - g.area0) / g.pps;
        truth.lead_ii_peaks.record_id = spec.record_id;
        for (double t : truth.r_peak_times_s) {
            if (t >= t0 && t <= t1) truth.lead_ii_peaks.peaks.push_back(iround((t - t0) * 200.0));
        }
    }
    truth.lead_ii_peaks.record_id = spec.record_id;
    return out;
}

void perturb(RgbImage& image, const PerturbParams& params, std::uint64_t seed) {
    if (params.speckle_density < 0.0 || params.speckle_density > 0.01) {
        throw ValidationError("speckle density must be in [0, 0.01]");
    }
    const int w = static_cast<int>(image.width());
    const int h = static_cast<int>(image.height());
    if (params.grid_dot_intensity < 255 && params.major_pitch_px > 0) {
        const auto v = static_cast<std::uint8_t>(std::max(params.grid_dot_intensity, 0));
        for (int y = 0; y < h; y += params.major_pitch_px) {
            for (int x = 0; x < w; x += params.major_pitch_px) {
                for (int dy = 0; dy < params.dot_px && y + dy < h; ++dy) {
                    for (int dx = 0; dx < params.dot_px && x + dx < w; ++dx) {
                        if (luminance(image.r(y + dy, x + dx), image.g(y + dy, x + dx), image.b(y + dy, x + dx)) > v) {
                            image.set(y + dy, x + dx, v, v, v);
                        }
                    }
                }
            }
        }
    }
    if (params.speckle_density > 0.0) {
        std::mt19937_64 rng(seed);
        const auto total = static_cast<double>(w) * h;
        const auto count = static_cast<long long>(std::llround(params.speckle_density * total));
        for (long long i = 0; i < count; ++i) {
            const auto pos = static_cast<long long>(uniform01(rng) * total);
            image.set(pos / w, pos % w, 0, 0, 0);
        }
    }
}

namespace {

ordered_json rounded(const Eigen::VectorXd& v) {
    ordered_json a = ordered_json::array();
    for (double x : v) a.push_back(quantize_sample(x));
    return a;
}

}  // namespace

ordered_json to_json(const SynthTruth& truth) {
    ordered_json j;
    j["width"] = truth.width;
    j["height"] = truth.height;
    j["template_id"] = truth.template_id;
    j["baselines"] = truth.baselines;
    j["separators"] = truth.separators;
    j["header_rows"] = truth.header_rows;
    j["px_per_second"] = truth.px_per_second;
    j["px_per_mv"] = truth.px_per_mv;
    j["pulse"] = {{"width_px", truth.pulse_width_px}, {"height_px", truth.pulse_height_px}};
    j["bpm"] = truth.bpm;
    j["rr_ms"] = truth.rr_ms;
    j["r_peak_times_s"] = truth.r_peak_times_s;
    j["lead_ii_peaks"] = to_json(truth.lead_ii_peaks);
    ordered_json leads = ordered_json::array();
    for (std::size_t i = 0; i < kLeadCount; ++i) {
        const SynthLeadTruth& lt = truth.leads[i];
        leads.push_back({{"name", lead_name(kLeadOrder[i])},
                         {"row", lt.row},
                         {"col", lt.col},
                         {"x0", lt.x0},
                         {"baseline", lt.baseline},
                         {"px", rounded(lt.px)},
                         {"mv", rounded(lt.mv)}});
    }
    j["leads"] = std::move(leads);
    return j;
}

void write_synth(const SynthSpec& spec, const SynthImage& out, const fs::path& dir) {
    fs::create_directories(dir / "annotations");
    write_png(dir / (spec.record_id + ".png"), out.image);
    ordered_json sidecar;
    sidecar["spec"] = to_json(spec);
    sidecar["truth"] = to_json(out.truth);
    write_file_atomic(dir / (spec.record_id + ".truth.json"), sidecar.dump() + "\n");
    if (spec.waveform == Waveform::Pqrst) write_rpeaks(out.truth.lead_ii_peaks, dir / "annotations");
}

}  // namespace diecg
