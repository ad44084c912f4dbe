// Copyright 2026 The diecg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

namespace diecg {

enum class Lead : std::uint8_t { I, II, III, aVR, aVL, aVF, V1, V2, V3, V4, V5, V6 };

inline constexpr std::size_t kLeadCount = 12;

/// Canonical storage order for a 12-lead record.
inline constexpr std::array<Lead, kLeadCount> kLeadOrder = {
    Lead::I,  Lead::II, Lead::III, Lead::aVR, Lead::aVL, Lead::aVF,
    Lead::V1, Lead::V2, Lead::V3,  Lead::V4,  Lead::V5,  Lead::V6};

constexpr std::size_t lead_index(Lead lead) { return static_cast<std::size_t>(lead); }

constexpr std::string_view lead_name(Lead lead) {
    constexpr std::array<std::string_view, kLeadCount> names = {
        "I", "II", "III", "aVR", "aVL", "aVF", "V1", "V2", "V3", "V4", "V5", "V6"};
    return names[lead_index(lead)];
}

constexpr std::optional<Lead> parse_lead(std::string_view name) {
    for (Lead lead : kLeadOrder) {
        if (lead_name(lead) == name) return lead;
    }
    return std::nullopt;
}

enum class ClassLabel : std::uint8_t { Covid19, MI, RMI, Abnormal, Normal };

inline constexpr std::array<ClassLabel, 5> kClassOrder = {
    ClassLabel::Covid19, ClassLabel::MI, ClassLabel::RMI, ClassLabel::Abnormal, ClassLabel::Normal};

constexpr std::string_view class_name(ClassLabel label) {
    constexpr std::array<std::string_view, 5> names = {"COVID-19", "MI", "RMI", "Abnormal", "Normal"};
    return names[static_cast<std::size_t>(label)];
}

constexpr std::optional<ClassLabel> parse_class(std::string_view name) {
    for (ClassLabel c : kClassOrder) {
        if (class_name(c) == name) return c;
    }
    return std::nullopt;
}

}  // namespace diecg
