// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace corpusforge {

/// Base class for all toolkit errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Bad or inconsistent configuration (CLI exit code 1).
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

/// Bad input data: missing files, duplicate ids, malformed records (CLI exit code 2).
class DataError : public Error {
public:
    explicit DataError(const std::string& msg) : Error(msg) {}
};

/// Invalid UTF-8. Carries the byte offset of the first offending byte.
class Utf8Error : public DataError {
public:
    Utf8Error(std::size_t byte_offset, const std::string& detail)
        : DataError("invalid UTF-8 at byte offset " + std::to_string(byte_offset) +
                    ": " + detail),
          byte_offset_(byte_offset) {}

    std::size_t byte_offset() const { return byte_offset_; }

private:
    std::size_t byte_offset_;
};

/// A mixture plan that cannot be satisfied from the available pool (CLI exit code 3).
class InfeasiblePlanError : public Error {
public:
    explicit InfeasiblePlanError(const std::string& msg) : Error(msg) {}
};

}  // namespace corpusforge
