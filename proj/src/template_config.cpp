// Copyright 2026 The diecg Authors
// SPDX-License-Identifier: Apache-2.0

#include "diecg/error.hpp"
#include "diecg/layout.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace diecg {

using nlohmann::json;

void validate(const TemplateConfig& cfg) {
    std::vector<std::string> bad;
    if (cfg.rows < 1 || cfg.cols < 1 || cfg.rows * cfg.cols != static_cast<int>(kLeadCount)) {
        bad.emplace_back("rows x cols must equal 12");
    }
    std::set<Lead> seen(cfg.lead_order.begin(), cfg.lead_order.end());
    if (seen.size() != kLeadCount) bad.emplace_back("lead_order must name each of the 12 leads once");
    if (cfg.margin_l_px ? *cfg.margin_l_px <= 0 : !(cfg.margin_l_fraction > 0.0)) {
        bad.emplace_back("margin_l must be positive");
    }
    if (!(cfg.header_rows_hint >= 0.0 && cfg.header_rows_hint < 1.0)) bad.emplace_back("header_rows_hint");
    if (!(cfg.signal_x0 >= 0.0 && cfg.signal_x0 < cfg.signal_x1 && cfg.signal_x1 <= 1.0)) {
        bad.emplace_back("signal_x0/signal_x1");
    }
    if (cfg.separator_gap_px < 0) bad.emplace_back("separator_gap_px");
    if (!(cfg.label_strip.width >= 0.0 && cfg.label_strip.height >= 0.0)) bad.emplace_back("label_strip");
    if (cfg.pulse_region.row < 0 || cfg.pulse_region.row >= cfg.rows ||
        !(cfg.pulse_region.x0 >= 0.0 && cfg.pulse_region.x0 < cfg.pulse_region.x1 && cfg.pulse_region.x1 <= 1.0)) {
        bad.emplace_back("pulse_region");
    }
    if (cfg.ref_pulse.width_s != 0.1 && cfg.ref_pulse.width_s != 0.2) {
        bad.emplace_back("ref_pulse.width_s must be 0.1 or 0.2");
    }
    if (cfg.ref_pulse.height_mv != 0.5) bad.emplace_back("ref_pulse.height_mv must be 0.5");
    if (!(cfg.default_px_per_mm > 0.0)) bad.emplace_back("default_px_per_mm");
    if (cfg.band_n < 0) bad.emplace_back("band_n");

    if (!bad.empty()) {
        std::ostringstream msg;
        msg << "invalid template config '" << cfg.name << "':";
        for (const auto& b : bad) msg << ' ' << b << ';';
        throw ValidationError(msg.str());
    }
}

TemplateConfig template_from_json(const json& j) {
    TemplateConfig cfg;
    try {
        cfg.id = j.value("id", 0);
        cfg.name = j.value("name", std::string{});
        cfg.rows = j.at("rows").get<int>();
        cfg.cols = j.at("cols").get<int>();
        const auto& order = j.at("lead_order");
        if (!order.is_array() || order.size() != kLeadCount) {
            throw ValidationError("lead_order must list 12 leads");
        }
        for (std::size_t i = 0; i < kLeadCount; ++i) {
            const auto name = order[i].get<std::string>();
            const auto lead = parse_lead(name);
            if (!lead) throw ValidationError("lead_order: unknown lead '" + name + "'");
            cfg.lead_order[i] = *lead;
        }
        cfg.margin_l_fraction = j.value("margin_l_fraction", cfg.margin_l_fraction);
        if (j.contains("margin_l_px") && !j["margin_l_px"].is_null()) cfg.margin_l_px = j["margin_l_px"].get<int>();
        cfg.header_rows_hint = j.value("header_rows_hint", cfg.header_rows_hint);
        cfg.signal_x0 = j.value("signal_x0", cfg.signal_x0);
        cfg.signal_x1 = j.value("signal_x1", cfg.signal_x1);
        cfg.separator_gap_px = j.value("separator_gap_px", cfg.separator_gap_px);
        if (j.contains("label_strip")) {
            const auto& ls = j["label_strip"];
            cfg.label_strip = {ls.at("x").get<double>(), ls.at("width").get<double>(), ls.at("top").get<double>(),
                               ls.at("height").get<double>()};
        }
        if (j.contains("pulse_region")) {
            const auto& pr = j["pulse_region"];
            cfg.pulse_region = {pr.at("row").get<int>(), pr.at("x0").get<double>(), pr.at("x1").get<double>(),
                                pr.at("above").get<double>(), pr.at("below").get<double>()};
        }
        if (j.contains("ref_pulse")) {
            cfg.ref_pulse.width_s = j["ref_pulse"].at("width_s").get<double>();
            cfg.ref_pulse.height_mv = j["ref_pulse"].at("height_mv").get<double>();
        }
        cfg.default_px_per_mm = j.value("default_px_per_mm", cfg.default_px_per_mm);
        cfg.band_n = j.value("band_n", cfg.band_n);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("invalid template config: ") + e.what());
    }
    validate(cfg);
    return cfg;
}

nlohmann::ordered_json to_json(const TemplateConfig& cfg) {
    nlohmann::ordered_json order = nlohmann::ordered_json::array();
    for (Lead lead : cfg.lead_order) order.push_back(std::string(lead_name(lead)));
    nlohmann::ordered_json j;
    j["id"] = cfg.id;
    j["name"] = cfg.name;
    j["rows"] = cfg.rows;
    j["cols"] = cfg.cols;
    j["lead_order"] = order;
    j["margin_l_fraction"] = cfg.margin_l_fraction;
    if (cfg.margin_l_px) j["margin_l_px"] = *cfg.margin_l_px;
    j["header_rows_hint"] = cfg.header_rows_hint;
    j["signal_x0"] = cfg.signal_x0;
    j["signal_x1"] = cfg.signal_x1;
    j["separator_gap_px"] = cfg.separator_gap_px;
    j["label_strip"] = {{"x", cfg.label_strip.x},
                        {"width", cfg.label_strip.width},
                        {"top", cfg.label_strip.top},
                        {"height", cfg.label_strip.height}};
    nlohmann::ordered_json pr;
    pr["row"] = cfg.pulse_region.row;
    pr["x0"] = cfg.pulse_region.x0;
    pr["x1"] = cfg.pulse_region.x1;
    pr["above"] = cfg.pulse_region.above;
    pr["below"] = cfg.pulse_region.below;
    j["pulse_region"] = pr;
    nlohmann::ordered_json rp;
    rp["width_s"] = cfg.ref_pulse.width_s;
    rp["height_mv"] = cfg.ref_pulse.height_mv;
    j["ref_pulse"] = rp;
    j["default_px_per_mm"] = cfg.default_px_per_mm;
    j["band_n"] = cfg.band_n;
    return j;
}

TemplateConfig load_template_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read template config '" + path.string() + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError("template config '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return template_from_json(j);
}

namespace {

// All bundled templates print a 10 s record at 25 mm/s with 0.4 s of left
// margin (calibration pulse) and 0.2 s of right margin.
constexpr double kPageSeconds = 10.6;

TemplateConfig make_builtin(int id) {
    using enum Lead;
    TemplateConfig cfg;
    cfg.id = id;
    cfg.signal_x0 = 0.4 / kPageSeconds;
    cfg.signal_x1 = 10.4 / kPageSeconds;
    cfg.separator_gap_px = 4;
    cfg.margin_l_fraction = 0.08;
    cfg.label_strip = {0.01, 0.10, -0.60, 0.12};
    cfg.pulse_region = {0, 0.03 / kPageSeconds, 0.37 / kPageSeconds, 0.30, 0.15};
    cfg.band_n = 30;
    switch (id) {
        case 1:
            cfg.name = "template1";
            cfg.rows = 3;
            cfg.cols = 4;
            cfg.lead_order = {I, aVR, V1, V4, II, aVL, V2, V5, III, aVF, V3, V6};
            cfg.header_rows_hint = 1.6 / 11.6;
            cfg.ref_pulse = {0.1, 0.5};
            cfg.default_px_per_mm = 10.0;
            break;
        case 2:
            cfg.name = "template2";
            cfg.rows = 4;
            cfg.cols = 3;
            cfg.lead_order = {I, aVL, V3, II, aVF, V4, III, V1, V5, aVR, V2, V6};
            cfg.header_rows_hint = 1.6 / 14.8;
            cfg.ref_pulse = {0.1, 0.5};
            cfg.default_px_per_mm = 10.0;
            break;
        case 3:
            cfg.name = "template3";
            cfg.rows = 6;
            cfg.cols = 2;
            cfg.lead_order = {I, V1, II, V2, III, V3, aVR, V4, aVL, V5, aVF, V6};
            cfg.header_rows_hint = 1.6 / 20.0;
            cfg.ref_pulse = {0.2, 0.5};
            cfg.default_px_per_mm = 8.0;
            break;
        case 4:
            cfg.name = "template4";
            cfg.rows = 3;
            cfg.cols = 4;
            cfg.lead_order = {I, aVR, V1, V4, II, aVL, V2, V5, III, aVF, V3, V6};
            cfg.header_rows_hint = 1.6 / 11.6;
            cfg.ref_pulse = {0.1, 0.5};
            cfg.default_px_per_mm = 12.0;
            break;
        default:
            throw ValidationError("no bundled template with id " + std::to_string(id));
    }
    validate(cfg);
    return cfg;
}

}  // namespace

const TemplateConfig& builtin_template(int id) {
    static const std::array<TemplateConfig, 4> templates = {make_builtin(1), make_builtin(2), make_builtin(3),
                                                            make_builtin(4)};
    if (id < 1 || id > 4) throw ValidationError("no bundled template with id " + std::to_string(id));
    return templates[static_cast<std::size_t>(id - 1)];
}

TemplateConfig resolve_template(const std::string& id_or_path) {
    std::string s = id_or_path;
    if (s.rfind("template", 0) == 0 && s.size() == 9) s = s.substr(8);
    if (s.size() == 1 && s[0] >= '1' && s[0] <= '4') return builtin_template(s[0] - '0');
    return load_template_config(id_or_path);
}

}  // namespace diecg
