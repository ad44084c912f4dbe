// Copyright 2026 The diecg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace diecg {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class FormatError : public Error {
public:
    using Error::Error;
};

class LayoutError : public Error {
public:
    using Error::Error;
};

class TraceNotFoundError : public Error {
public:
    using Error::Error;
};

class CalibrationError : public Error {
public:
    using Error::Error;
};

class AlignmentError : public Error {
public:
    using Error::Error;
};

class UndefinedResultError : public Error {
public:
    using Error::Error;
};

class RenderError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration or spec values; the message lists every offending field.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A record or annotation file does not match its schema. `path()` names the
/// offending field, e.g. `leads[3].samples`.
class SchemaError : public Error {
public:
    SchemaError(std::string field_path, const std::string& what)
        : Error(field_path + ": " + what), path_(std::move(field_path)) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

}  // namespace diecg
