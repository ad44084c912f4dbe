// Copyright 2026 The diecg Authors
// SPDX-License-Identifier: Apache-2.0

#include "diecg/signalio.hpp"

#include "diecg/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

namespace diecg {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

double quantize_sample(double v) {
    const double q = std::round(v * 1e6) / 1e6;
    return q == 0.0 ? 0.0 : q;
}

EcgRecord quantized(const EcgRecord& rec) {
    EcgRecord out = rec;
    for (auto& lead : out.leads) lead = lead.unaryExpr([](double v) { return quantize_sample(v); });
    return out;
}

bool records_equal(const EcgRecord& a, const EcgRecord& b) {
    if (a.record_id != b.record_id || a.class_label != b.class_label || a.fs != b.fs) return false;
    if (!(a.provenance == b.provenance)) return false;
    for (std::size_t i = 0; i < kLeadCount; ++i) {
        if (a.leads[i].size() != b.leads[i].size()) return false;
        if (!(a.leads[i].array() == b.leads[i].array()).all()) return false;
    }
    return true;
}

namespace {

ordered_json rect_json(const Rect& r) { return ordered_json::array({r.x, r.y, r.width, r.height}); }

// Typed field access that reports the full field path on failure.
class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

    const json& at(const std::string& key) const {
        if (!j_.is_object()) throw SchemaError(path_.empty() ? "<root>" : path_, "expected an object");
        auto it = j_.find(key);
        if (it == j_.end()) throw SchemaError(field(key), "missing");
        return *it;
    }

    bool has(const std::string& key) const { return j_.is_object() && j_.contains(key); }

    std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    std::string str(const std::string& key) const {
        const json& v = at(key);
        if (!v.is_string()) throw SchemaError(field(key), "expected a string");
        return v.get<std::string>();
    }

    double num(const std::string& key) const {
        const json& v = at(key);
        if (!v.is_number()) throw SchemaError(field(key), "expected a number");
        return v.get<double>();
    }

    int integer(const std::string& key) const {
        const json& v = at(key);
        if (!v.is_number_integer()) throw SchemaError(field(key), "expected an integer");
        return v.get<int>();
    }

    bool boolean(const std::string& key) const {
        const json& v = at(key);
        if (!v.is_boolean()) throw SchemaError(field(key), "expected a boolean");
        return v.get<bool>();
    }

    const json& array(const std::string& key) const {
        const json& v = at(key);
        if (!v.is_array()) throw SchemaError(field(key), "expected an array");
        return v;
    }

    Reader child(const std::string& key) const { return {at(key), field(key)}; }

private:
    const json& j_;
    std::string path_;
};

std::vector<int> int_list(const json& arr, const std::string& path) {
    std::vector<int> out;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        if (!arr[i].is_number_integer()) throw SchemaError(path + "[" + std::to_string(i) + "]", "expected an integer");
        out.push_back(arr[i].get<int>());
    }
    return out;
}

Rect rect_from(const json& arr, const std::string& path) {
    if (!arr.is_array() || arr.size() != 4) throw SchemaError(path, "expected [x, y, width, height]");
    const auto v = int_list(arr, path);
    return {v[0], v[1], v[2], v[3]};
}

}  // namespace

ordered_json record_to_json(const EcgRecord& rec) {
    const Provenance& p = rec.provenance;
    ordered_json prov;
    prov["source_image"] = p.source_image;
    prov["template_id"] = p.template_id;
    prov["calibration"] = {{"source", p.calibration_source},
                           {"px_per_second", p.px_per_second},
                           {"px_per_mv", p.px_per_mv}};
    prov["band_n"] = p.band_n;
    prov["margin_l"] = p.margin_l;
    prov["tool_version"] = p.tool_version;
    prov["baselines"] = p.baselines;
    prov["separators"] = p.separators;
    ordered_json leads_meta = ordered_json::array();
    for (std::size_t i = 0; i < kLeadCount; ++i) {
        const LeadProvenance& lp = p.leads[i];
        leads_meta.push_back({{"name", lead_name(kLeadOrder[i])},
                              {"crop", rect_json(lp.crop)},
                              {"baseline", lp.baseline},
                              {"fill_fraction", lp.fill_fraction},
                              {"band_escape", lp.band_escape}});
    }
    prov["leads"] = std::move(leads_meta);
    prov["warnings"] = p.warnings;

    ordered_json j;
    j["schema"] = kRecordSchema;
    j["record_id"] = rec.record_id;
    j["class_label"] = rec.class_label ? ordered_json(std::string(class_name(*rec.class_label))) : ordered_json();
    j["fs"] = rec.fs;
    j["provenance"] = std::move(prov);
    ordered_json leads = ordered_json::array();
    for (std::size_t i = 0; i < kLeadCount; ++i) {
        ordered_json samples = ordered_json::array();
        for (double v : rec.leads[i]) samples.push_back(quantize_sample(v));
        leads.push_back({{"name", lead_name(kLeadOrder[i])}, {"samples", std::move(samples)}});
    }
    j["leads"] = std::move(leads);
    return j;
}

EcgRecord record_from_json(const json& j) {
    const Reader root(j, "");
    if (root.str("schema") != kRecordSchema) throw SchemaError("schema", "unsupported schema " + root.str("schema"));

    EcgRecord rec;
    rec.record_id = root.str("record_id");
    if (rec.record_id.empty()) throw SchemaError("record_id", "must not be empty");
    const json& label = root.at("class_label");
    if (!label.is_null()) {
        if (!label.is_string()) throw SchemaError("class_label", "expected a string or null");
        rec.class_label = parse_class(label.get<std::string>());
        if (!rec.class_label) throw SchemaError("class_label", "unknown class " + label.get<std::string>());
    }
    rec.fs = root.num("fs");
    if (rec.fs != 200.0) throw SchemaError("fs", "records are stored at 200 Hz");

    const Reader prov = root.child("provenance");
    Provenance& p = rec.provenance;
    p.source_image = prov.str("source_image");
    p.template_id = prov.integer("template_id");
    const Reader cal = prov.child("calibration");
    p.calibration_source = cal.str("source");
    p.px_per_second = cal.num("px_per_second");
    p.px_per_mv = cal.num("px_per_mv");
    p.band_n = prov.integer("band_n");
    p.margin_l = prov.integer("margin_l");
    p.tool_version = prov.str("tool_version");
    p.baselines = int_list(prov.array("baselines"), "provenance.baselines");
    p.separators = int_list(prov.array("separators"), "provenance.separators");
    const json& leads_meta = prov.array("leads");
    if (leads_meta.size() != kLeadCount) throw SchemaError("provenance.leads", "expected 12 entries");
    for (std::size_t i = 0; i < kLeadCount; ++i) {
        const std::string path = "provenance.leads[" + std::to_string(i) + "]";
        const Reader lm(leads_meta[i], path);
        if (lm.str("name") != lead_name(kLeadOrder[i])) {
            throw SchemaError(lm.field("name"), "expected " + std::string(lead_name(kLeadOrder[i])));
        }
        p.leads[i].crop = rect_from(lm.at("crop"), lm.field("crop"));
        p.leads[i].baseline = lm.integer("baseline");
        p.leads[i].fill_fraction = lm.num("fill_fraction");
        p.leads[i].band_escape = lm.boolean("band_escape");
    }
    const json& warnings = prov.array("warnings");
    for (std::size_t i = 0; i < warnings.size(); ++i) {
        if (!warnings[i].is_string()) {
            throw SchemaError("provenance.warnings[" + std::to_string(i) + "]", "expected a string");
        }
        p.warnings.push_back(warnings[i].get<std::string>());
    }

    const json& leads = root.array("leads");
    if (leads.size() != kLeadCount) {
        throw SchemaError("leads", "expected 12 leads, found " + std::to_string(leads.size()));
    }
    for (std::size_t i = 0; i < kLeadCount; ++i) {
        const std::string path = "leads[" + std::to_string(i) + "]";
        const Reader lr(leads[i], path);
        if (lr.str("name") != lead_name(kLeadOrder[i])) {
            throw SchemaError(lr.field("name"), "expected " + std::string(lead_name(kLeadOrder[i])));
        }
        const json& samples = lr.array("samples");
        Eigen::VectorXd v(static_cast<Eigen::Index>(samples.size()));
        for (std::size_t k = 0; k < samples.size(); ++k) {
            if (!samples[k].is_number()) {
                throw SchemaError(lr.field("samples") + "[" + std::to_string(k) + "]", "expected a number");
            }
            v[static_cast<Eigen::Index>(k)] = samples[k].get<double>();
        }
        rec.leads[i] = std::move(v);
    }
    return rec;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file_atomic(const fs::path& path, const std::string& contents) {
    const auto tag = std::hash<std::thread::id>{}(std::this_thread::get_id());
    fs::path tmp = path;
    tmp += ".tmp" + std::to_string(tag);
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out << contents;
        if (!out.flush()) throw IoError("cannot write " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        throw IoError("cannot rename to " + path.string() + ": " + ec.message());
    }
}

fs::path write_record(const EcgRecord& rec, const fs::path& dir) {
    fs::create_directories(dir);
    const fs::path path = dir / (rec.record_id + ".json");
    write_file_atomic(path, record_to_json(rec).dump() + "\n");
    return path;
}

EcgRecord read_record(const fs::path& path) {
    const std::string text = read_file(path);
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw SchemaError("<root>", "not valid JSON: " + path.string());
    return record_from_json(j);
}

fs::path write_record_csv(const EcgRecord& rec, const fs::path& dir) {
    fs::create_directories(dir);
    Eigen::Index rows = 0;
    for (const auto& l : rec.leads) rows = std::max(rows, l.size());

    std::string out = "time_s";
    for (Lead l : kLeadOrder) {
        out += ',';
        out += lead_name(l);
    }
    out += '\n';
    char cell[64];
    for (Eigen::Index k = 0; k < rows; ++k) {
        std::snprintf(cell, sizeof cell, "%.3f", static_cast<double>(k) / rec.fs);
        out += cell;
        for (const auto& l : rec.leads) {
            out += ',';
            if (k < l.size()) {
                std::snprintf(cell, sizeof cell, "%.6f", quantize_sample(l[k]));
                out += cell;
            }
        }
        out += '\n';
    }
    const fs::path path = dir / (rec.record_id + ".csv");
    write_file_atomic(path, out);
    return path;
}

std::vector<fs::path> list_record_files(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
    std::vector<fs::path> out;
    const std::string marker = std::string("\"schema\":\"") + kRecordSchema + "\"";
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
        std::ifstream in(entry.path(), std::ios::binary);
        std::string head(64, '\0');
        in.read(head.data(), static_cast<std::streamsize>(head.size()));
        head.resize(static_cast<std::size_t>(in.gcount()));
        if (head.find(marker) != std::string::npos) out.push_back(entry.path());
    }
    std::sort(out.begin(), out.end());
    return out;
}

ConcatSequence concat_leads(const EcgRecord& rec, int t_lead) {
    if (t_lead <= 0) throw ValidationError("t_lead must be positive");
    ConcatSequence seq;
    seq.t_lead = t_lead;
    seq.samples = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(kLeadCount) * t_lead);
    for (std::size_t i = 0; i < kLeadCount; ++i) {
        const auto n = std::min<Eigen::Index>(rec.leads[i].size(), t_lead);
        seq.samples.segment(static_cast<Eigen::Index>(i) * t_lead, n) = rec.leads[i].head(n);
    }
    return seq;
}

}  // namespace diecg
