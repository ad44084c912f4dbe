// Copyright 2026 The diecg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "diecg/layout.hpp"
#include "diecg/lead.hpp"
#include "diecg/pipeline.hpp"
#include "diecg/quality.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace diecg {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitPartial = 2;

/// Bad invocation or configuration; maps to exit code 1.
class UsageError : public Error {
public:
    using Error::Error;
};

struct ManifestRow {
    std::filesystem::path image;
    TemplateConfig config;
    std::optional<ClassLabel> class_label;
};

/// Comma-separated with a header naming `image` and `template` columns and an
/// optional `label` column. Relative image paths resolve against the manifest's
/// directory. Throws UsageError on duplicates, unknown templates or labels, or
/// an empty manifest.
std::vector<ManifestRow> read_manifest(const std::filesystem::path& path);

/// Splits one CSV line; double-quoted fields may contain commas and "" escapes.
std::vector<std::string> split_csv_line(const std::string& line);

enum class OutputFormat { Record, Csv };

struct DigitizeRequest {
    std::vector<ManifestRow> rows;
    std::filesystem::path out_dir;
    std::optional<int> margin_l;
    std::optional<int> band_n;
    int workers = 1;
    OutputFormat format = OutputFormat::Record;
    bool debug = false;
};

struct ImageStatus {
    std::filesystem::path image;
    std::string record_id;
    bool ok = false;
    std::string stage;
    std::string message;
};

struct BatchSummary {
    std::vector<ImageStatus> statuses;
    int succeeded = 0;
    int failed = 0;

    int exit_code() const { return failed == 0 ? kExitOk : kExitPartial; }
};

/// Digitizes every row, `workers` images at a time. Failures are recorded with
/// their stage and do not stop the batch. Writes `status.csv` to the output
/// directory in manifest order.
BatchSummary run_digitize(const DigitizeRequest& req);

struct QaRequest {
    std::filesystem::path records_dir;
    std::optional<std::filesystem::path> annotations_dir;
    /// Use the detector's own peaks as annotations and write them out for
    /// review; the report then only carries exclusion counts.
    bool self_detect = false;
    std::filesystem::path out_dir;
    DetectorParams detector;
};

/// Writes `qa_report.json` and `qa_report.txt`. Throws AlignmentError when no
/// record id has an annotation.
QaReport run_qa(const QaRequest& req);

struct SynthRequest {
    /// "template1".."template4", or empty when `spec_file` is given.
    std::string preset;
    std::optional<std::filesystem::path> spec_file;
    int count = 1;
    std::uint64_t seed = 0;
    std::filesystem::path out_dir;
};

/// Renders `count` images with seeds seed, seed+1, ...; class labels cycle
/// through the five classes. Writes images, truth sidecars, R-peak
/// annotations and a `manifest.csv` ready for `digitize`.
void run_synth(const SynthRequest& req);

/// Writes one line per record: record_id, class label, then 12 * t_lead samples.
void run_concat(const std::filesystem::path& records_dir, int t_lead, const std::filesystem::path& out_file);

/// Entry point of the `diecg` tool.
int run_cli(int argc, char** argv);

}  // namespace diecg
