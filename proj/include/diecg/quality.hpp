// Copyright 2026 The diecg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "diecg/calibrate.hpp"
#include "diecg/lead.hpp"

#include <Eigen/Core>
#include <json.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace diecg {

/// R-peak sample indices on lead II.
struct RPeakSet {
    std::string record_id;
    Lead lead = Lead::II;
    double fs = 200.0;
    std::vector<int> peaks;

    bool operator==(const RPeakSet&) const = default;
};

/// Throws ValidationError unless peaks are strictly increasing and, when
/// `signal_length` is given, inside [0, signal_length).
void validate(const RPeakSet& set, std::optional<int> signal_length = std::nullopt);

nlohmann::ordered_json to_json(const RPeakSet& set);
/// Throws SchemaError naming the offending field.
RPeakSet rpeaks_from_json(const nlohmann::json& j);
/// Writes `<dir>/<record_id>.rpeaks.json` atomically.
std::filesystem::path write_rpeaks(const RPeakSet& set, const std::filesystem::path& dir);
RPeakSet read_rpeaks(const std::filesystem::path& path);
/// Every `*.rpeaks.json` in `dir`, keyed by record id.
std::map<std::string, RPeakSet> read_annotation_dir(const std::filesystem::path& dir);

struct DetectorParams {
    /// Moving-average window over the squared derivative.
    double integration_s = 0.08;
    double refractory_s = 0.2;
    /// Threshold = max(ratio * max over the surrounding window, floor * global max).
    double threshold_ratio = 0.5;
    double rolling_window_s = 2.0;
    double global_floor = 0.1;
    /// Half-width of the search for the signal maximum around a detection.
    double refine_s = 0.06;
};

/// Derivative, squared, moving-average integrated.
Eigen::VectorXd qrs_statistic(const Eigen::VectorXd& x, double fs, const DetectorParams& params = {});

/// QRS detector. Local maxima of the statistic above the adaptive threshold
/// are accepted greedily from the largest, at least one refractory period
/// apart, then moved to the signal maximum within `refine_s`. A refined
/// position must be a local maximum (rising into it, first sample of a flat
/// top) away from the strip ends, which
/// drops beats cut off by the crop. Throws ValidationError for signals
/// shorter than one second.
RPeakSet detect_r_peaks(const EcgSignal& sig, const DetectorParams& params = {}, std::string record_id = {});

/// Mean successive difference in ms. Throws UndefinedResultError for fewer
/// than two peaks.
double rr_mean_ms(std::span<const int> peaks, double fs);
double rr_mean_ms(const RPeakSet& set);

/// Mean absolute difference of index-aligned per-record means. Throws
/// AlignmentError on empty or unequal-length inputs.
double mae_rr(std::span<const double> truth, std::span<const double> pred);

struct QaEntry {
    std::string record_id;
    std::optional<ClassLabel> label;
    int truth_peaks = 0;
    int pred_peaks = 0;
    std::optional<double> truth_rr_ms;
    std::optional<double> pred_rr_ms;

    bool excluded() const { return !truth_rr_ms || !pred_rr_ms; }
};

struct QaRow {
    /// Class name, or "Total".
    std::string name;
    int n = 0;
    int excluded = 0;
    std::optional<double> mae_ms;
};

struct QaReport {
    std::vector<QaEntry> entries;
    /// The five classes in table order, then "Total".
    std::vector<QaRow> rows;
    /// Records without a matching annotation.
    std::vector<std::string> unmatched;
};

/// Aggregates entries into per-class and total rows. Unlabeled entries count
/// toward the total only.
QaReport build_qa_report(std::vector<QaEntry> entries, std::vector<std::string> unmatched = {});

nlohmann::ordered_json to_json(const QaReport& report);
/// Plain-text table: Class, N, Excluded, MAE (ms).
std::string format_qa_table(const QaReport& report);

}  // namespace diecg
