// Copyright 2026 The diecg Authors
// SPDX-License-Identifier: Apache-2.0

#include "diecg/quality.hpp"

#include "diecg/error.hpp"
#include "diecg/signalio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace diecg {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

void validate(const RPeakSet& set, std::optional<int> signal_length) {
    if (!(set.fs > 0.0)) throw ValidationError("rpeaks.fs must be positive");
    for (std::size_t i = 0; i < set.peaks.size(); ++i) {
        if (i > 0 && set.peaks[i] <= set.peaks[i - 1]) {
            throw ValidationError("rpeaks.peaks must be strictly increasing at index " + std::to_string(i));
        }
        if (set.peaks[i] < 0 || (signal_length && set.peaks[i] >= *signal_length)) {
            throw ValidationError("rpeaks.peaks[" + std::to_string(i) + "] outside the signal");
        }
    }
}

ordered_json to_json(const RPeakSet& set) {
    ordered_json j;
    j["record_id"] = set.record_id;
    j["lead"] = lead_name(set.lead);
    j["fs"] = set.fs;
    j["peaks"] = set.peaks;
    return j;
}

RPeakSet rpeaks_from_json(const json& j) {
    if (!j.is_object()) throw SchemaError("<root>", "expected an object");
    RPeakSet set;
    for (const char* key : {"record_id", "lead", "fs", "peaks"}) {
        if (!j.contains(key)) throw SchemaError(key, "missing");
    }
    if (!j["record_id"].is_string()) throw SchemaError("record_id", "expected a string");
    set.record_id = j["record_id"].get<std::string>();
    if (j["lead"] != "II") throw SchemaError("lead", "annotations are defined on lead II");
    if (!j["fs"].is_number()) throw SchemaError("fs", "expected a number");
    set.fs = j["fs"].get<double>();
    if (!j["peaks"].is_array()) throw SchemaError("peaks", "expected an array");
    for (std::size_t i = 0; i < j["peaks"].size(); ++i) {
        const json& v = j["peaks"][i];
        if (!v.is_number_integer()) throw SchemaError("peaks[" + std::to_string(i) + "]", "expected an integer");
        set.peaks.push_back(v.get<int>());
    }
    try {
        validate(set);
    } catch (const ValidationError& e) {
        throw SchemaError("peaks", e.what());
    }
    return set;
}

fs::path write_rpeaks(const RPeakSet& set, const fs::path& dir) {
    fs::create_directories(dir);
    const fs::path path = dir / (set.record_id + ".rpeaks.json");
    write_file_atomic(path, to_json(set).dump() + "\n");
    return path;
}

RPeakSet read_rpeaks(const fs::path& path) {
    json j = json::parse(read_file(path), nullptr, false);
    if (j.is_discarded()) throw SchemaError("<root>", "not valid JSON: " + path.string());
    return rpeaks_from_json(j);
}

std::map<std::string, RPeakSet> read_annotation_dir(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
    std::map<std::string, RPeakSet> out;
    const std::string suffix = ".rpeaks.json";
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (!entry.is_regular_file() || name.size() <= suffix.size() ||
            name.compare(name.size() - suffix.size(), suffix.size(), suffix) != 0) {
            continue;
        }
        RPeakSet set = read_rpeaks(entry.path());
        out[set.record_id] = std::move(set);
    }
    return out;
}

Eigen::VectorXd qrs_statistic(const Eigen::VectorXd& x, double fs, const DetectorParams& params) {
    const Eigen::Index n = x.size();
    Eigen::VectorXd sq = Eigen::VectorXd::Zero(n);
    for (Eigen::Index k = 2; k + 2 < n; ++k) {
        const double d = (2.0 * x[k + 2] + x[k + 1] - x[k - 1] - 2.0 * x[k - 2]) / 8.0;
        sq[k] = d * d;
    }
    const Eigen::Index half = std::max<Eigen::Index>(0, std::lround(params.integration_s * fs) / 2);
    Eigen::VectorXd prefix(n + 1);
    prefix[0] = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) prefix[k + 1] = prefix[k] + sq[k];
    Eigen::VectorXd out(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const Eigen::Index lo = std::max<Eigen::Index>(0, k - half);
        const Eigen::Index hi = std::min<Eigen::Index>(n - 1, k + half);
        out[k] = (prefix[hi + 1] - prefix[lo]) / static_cast<double>(2 * half + 1);
    }
    return out;
}

RPeakSet detect_r_peaks(const EcgSignal& sig, const DetectorParams& params, std::string record_id) {
    const Eigen::VectorXd& x = sig.samples;
    const double fs = sig.fs;
    const Eigen::Index n = x.size();
    if (static_cast<double>(n) < fs) throw ValidationError("R-peak detection needs at least one second of signal");

    RPeakSet out;
    out.record_id = std::move(record_id);
    out.fs = fs;
    out.lead = Lead::II;

    const Eigen::VectorXd stat = qrs_statistic(x, fs, params);
    const double global_max = stat.maxCoeff();
    if (!(global_max > 0.0)) return out;

    const auto roll = static_cast<Eigen::Index>(std::lround(params.rolling_window_s * fs / 2.0));
    std::vector<Eigen::Index> candidates;
    for (Eigen::Index k = 1; k + 1 < n; ++k) {
        if (!(stat[k] > stat[k - 1] && stat[k] >= stat[k + 1])) continue;
        const Eigen::Index lo = std::max<Eigen::Index>(0, k - roll);
        const Eigen::Index hi = std::min<Eigen::Index>(n - 1, k + roll);
        const double local_max = stat.segment(lo, hi - lo + 1).maxCoeff();
        const double threshold = std::max(params.threshold_ratio * local_max, params.global_floor * global_max);
        if (stat[k] >= threshold) candidates.push_back(k);
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return stat[a] > stat[b]; });

    const auto refractory = static_cast<Eigen::Index>(std::lround(params.refractory_s * fs));
    std::vector<Eigen::Index> accepted;
    for (Eigen::Index k : candidates) {
        const bool clear = std::all_of(accepted.begin(), accepted.end(),
                                       [&](Eigen::Index a) { return std::abs(a - k) >= refractory; });
        if (clear) accepted.push_back(k);
    }

    const auto reach = static_cast<Eigen::Index>(std::lround(params.refine_s * fs));
    std::vector<Eigen::Index> refined;
    for (Eigen::Index k : accepted) {
        const Eigen::Index lo = std::max<Eigen::Index>(0, k - reach);
        const Eigen::Index hi = std::min<Eigen::Index>(n - 1, k + reach);
        Eigen::Index arg = 0;
        x.segment(lo, hi - lo + 1).maxCoeff(&arg);
        const Eigen::Index p = lo + arg;
        if (p == 0 || p == n - 1) continue;
        // First sample of a flat top counts as the peak.
        if (!(x[p] > x[p - 1] && x[p] >= x[p + 1])) continue;
        refined.push_back(p);
    }
    std::sort(refined.begin(), refined.end());

    // Two detections can refine onto nearby maxima; keep the taller one.
    std::vector<Eigen::Index> kept;
    for (Eigen::Index p : refined) {
        if (!kept.empty() && p - kept.back() < refractory) {
            if (x[p] > x[kept.back()]) kept.back() = p;
            continue;
        }
        kept.push_back(p);
    }
    for (Eigen::Index p : kept) out.peaks.push_back(static_cast<int>(p));
    return out;
}

double rr_mean_ms(std::span<const int> peaks, double fs) {
    if (peaks.size() < 2) throw UndefinedResultError("RR interval needs at least two R peaks");
    const double span = static_cast<double>(peaks.back() - peaks.front());
    return span / static_cast<double>(peaks.size() - 1) * 1000.0 / fs;
}

double rr_mean_ms(const RPeakSet& set) { return rr_mean_ms(set.peaks, set.fs); }

double mae_rr(std::span<const double> truth, std::span<const double> pred) {
    if (truth.size() != pred.size()) {
        throw AlignmentError("mae_rr: " + std::to_string(truth.size()) + " truth values vs " +
                             std::to_string(pred.size()) + " predictions");
    }
    if (truth.empty()) throw AlignmentError("mae_rr: no records");
    double sum = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) sum += std::abs(truth[i] - pred[i]);
    return sum / static_cast<double>(truth.size());
}

QaReport build_qa_report(std::vector<QaEntry> entries, std::vector<std::string> unmatched) {
    std::sort(entries.begin(), entries.end(),
              [](const QaEntry& a, const QaEntry& b) { return a.record_id < b.record_id; });
    std::sort(unmatched.begin(), unmatched.end());

    auto make_row = [&](std::string name, auto&& selected) {
        QaRow row;
        row.name = std::move(name);
        std::vector<double> truth, pred;
        for (const auto& e : entries) {
            if (!selected(e)) continue;
            if (e.excluded()) {
                ++row.excluded;
                continue;
            }
            truth.push_back(*e.truth_rr_ms);
            pred.push_back(*e.pred_rr_ms);
        }
        row.n = static_cast<int>(truth.size());
        if (!truth.empty()) row.mae_ms = mae_rr(truth, pred);
        return row;
    };

    QaReport report;
    for (ClassLabel c : kClassOrder) {
        report.rows.push_back(make_row(std::string(class_name(c)), [c](const QaEntry& e) { return e.label == c; }));
    }
    report.rows.push_back(make_row("Total", [](const QaEntry&) { return true; }));
    report.entries = std::move(entries);
    report.unmatched = std::move(unmatched);
    return report;
}

ordered_json to_json(const QaReport& report) {
    auto opt = [](const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(); };
    ordered_json j;
    j["rows"] = ordered_json::array();
    for (const auto& r : report.rows) {
        j["rows"].push_back({{"class", r.name}, {"n", r.n}, {"excluded", r.excluded}, {"mae_ms", opt(r.mae_ms)}});
    }
    j["records"] = ordered_json::array();
    for (const auto& e : report.entries) {
        j["records"].push_back({{"record_id", e.record_id},
                                {"class_label", e.label ? ordered_json(std::string(class_name(*e.label))) : ordered_json()},
                                {"truth_peaks", e.truth_peaks},
                                {"pred_peaks", e.pred_peaks},
                                {"truth_rr_ms", opt(e.truth_rr_ms)},
                                {"pred_rr_ms", opt(e.pred_rr_ms)},
                                {"excluded", e.excluded()}});
    }
    j["unmatched"] = report.unmatched;
    return j;
}

std::string format_qa_table(const QaReport& report) {
    std::string out = "Class        N  Excluded  MAE (ms)\n";
    char line[128];
    for (const auto& r : report.rows) {
        if (r.mae_ms) {
            std::snprintf(line, sizeof line, "%-9s %4d %9d %9.2f\n", r.name.c_str(), r.n, r.excluded, *r.mae_ms);
        } else {
            std::snprintf(line, sizeof line, "%-9s %4d %9d %9s\n", r.name.c_str(), r.n, r.excluded, "-");
        }
        out += line;
    }
    return out;
}

}  // namespace diecg
