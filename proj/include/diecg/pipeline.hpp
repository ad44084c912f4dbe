// Copyright 2026 The diecg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "diecg/error.hpp"
#include "diecg/image.hpp"
#include "diecg/layout.hpp"
#include "diecg/signalio.hpp"

#include <filesystem>
#include <optional>
#include <string>

namespace diecg {

enum class Stage { Load, Binarize, Layout, Trace, Calibration };

const char* stage_name(Stage stage);

/// A digitization failure tagged with the pipeline stage that raised it.
class StageError : public Error {
public:
    StageError(Stage stage, const std::string& what) : Error(std::string(stage_name(stage)) + ": " + what), stage_(stage) {}

    Stage stage() const noexcept { return stage_; }

private:
    Stage stage_;
};

struct DigitizeOptions {
    std::string record_id;
    std::optional<ClassLabel> class_label;
    std::string source_image;
    /// Overrides for L and N; otherwise taken from the template config.
    std::optional<int> margin_l;
    std::optional<int> band_n;
    /// When set, the binarized page and every lead mask are written here.
    std::optional<std::filesystem::path> debug_dir;
};

/// Binarize, locate rows and columns, track every lead, calibrate from the
/// printed pulse (or the template's standard-paper scale) and resample to
/// 200 Hz. Throws StageError.
EcgRecord digitize(const GrayImage& page, const TemplateConfig& cfg, const DigitizeOptions& opts);

/// Loads the image first; the record id defaults to the file stem.
EcgRecord digitize_file(const std::filesystem::path& image, const TemplateConfig& cfg, DigitizeOptions opts);

}  // namespace diecg
