// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace tqt {

enum class ErrorCode {
    InvalidArgument,
    DimensionMismatch,
    RankOutOfRange,
    BadMagic,
    BadVersion,
    TruncatedPayload,
    ExtentOverflow,
    Io,
    Infeasible,
    Internal,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
          code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

}  // namespace tqt
