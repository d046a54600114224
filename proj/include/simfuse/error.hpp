// Copyright (C) 2026 The simfuse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace simfuse {

enum class ErrorCode {
    invalid_argument,
    io,
    format,
    invariant,
    mismatch,
};

constexpr std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::invalid_argument: return "invalid_argument";
        case ErrorCode::io: return "io";
        case ErrorCode::format: return "format";
        case ErrorCode::invariant: return "invariant";
        case ErrorCode::mismatch: return "mismatch";
    }
    return "unknown";
}

/// Every failure in the library surfaces as this exception. The message is a
/// single line so the CLI can print it verbatim.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace simfuse
