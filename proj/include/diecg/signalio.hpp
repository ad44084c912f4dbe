// Copyright 2026 The diecg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "diecg/image.hpp"
#include "diecg/lead.hpp"

#include <Eigen/Core>
#include <json.hpp>

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace diecg {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kRecordSchema = "diecg-record/1";
inline constexpr int kDefaultLeadLength = 500;

struct LeadProvenance {
    /// Crop rectangle in page pixels and its baseline row (crop-local).
    Rect crop;
    int baseline = 0;
    double fill_fraction = 0.0;
    bool band_escape = false;

    bool operator==(const LeadProvenance&) const = default;
};

struct Provenance {
    std::string source_image;
    int template_id = 0;
    /// "pulse" when measured from the printed pulse, "fallback" otherwise.
    std::string calibration_source;
    double px_per_second = 0.0;
    double px_per_mv = 0.0;
    int band_n = 0;
    int margin_l = 0;
    std::string tool_version = kToolVersion;
    std::vector<int> baselines;
    std::vector<int> separators;
    /// Canonical lead order.
    std::array<LeadProvenance, kLeadCount> leads{};
    std::vector<std::string> warnings;

    bool operator==(const Provenance&) const = default;
};

/// Twelve lead signals in mV at 200 Hz, stored in canonical lead order.
struct EcgRecord {
    std::string record_id;
    std::optional<ClassLabel> class_label;
    double fs = 200.0;
    std::array<Eigen::VectorXd, kLeadCount> leads;
    Provenance provenance;

    Eigen::VectorXd& lead(Lead l) { return leads[lead_index(l)]; }
    const Eigen::VectorXd& lead(Lead l) const { return leads[lead_index(l)]; }
};

/// Rounds to the stored precision (six decimal places). Negative zero maps
/// to zero.
double quantize_sample(double v);

/// The record as written: samples quantized, same metadata.
EcgRecord quantized(const EcgRecord& rec);

/// Field-by-field equality; samples compared exactly.
bool records_equal(const EcgRecord& a, const EcgRecord& b);

nlohmann::ordered_json record_to_json(const EcgRecord& rec);

/// Throws SchemaError naming the offending field.
EcgRecord record_from_json(const nlohmann::json& j);

/// Writes `<dir>/<record_id>.json` atomically and returns the path.
std::filesystem::path write_record(const EcgRecord& rec, const std::filesystem::path& dir);

/// Throws IoError when unreadable, SchemaError when malformed.
EcgRecord read_record(const std::filesystem::path& path);

/// `<dir>/<record_id>.csv`: a time_s column followed by the 12 leads, one row
/// per sample. Shorter leads leave trailing cells empty.
std::filesystem::path write_record_csv(const EcgRecord& rec, const std::filesystem::path& dir);

/// Record files (`*.json` carrying the record schema) in `dir`, sorted by name.
std::vector<std::filesystem::path> list_record_files(const std::filesystem::path& dir);

struct ConcatSequence {
    Eigen::VectorXd samples;
    int t_lead = 0;
};

/// Each lead cut to its first `t_lead` samples or zero-padded at the end,
/// then joined in canonical order. Throws ValidationError if t_lead <= 0.
ConcatSequence concat_leads(const EcgRecord& rec, int t_lead = kDefaultLeadLength);

/// Writes `contents` to `path` through a temporary file and a rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

std::string read_file(const std::filesystem::path& path);

}  // namespace diecg
