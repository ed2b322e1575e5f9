// Copyright 2026 The cblue Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cblue {

enum class ErrorCode {
    DimensionMismatch,
    NonFinite,
    NotHermitian,
    NotPositiveDefinite,
    RankDeficientConstraints,
    EmptyNullspace,
    RankDeficient,
    RankDeficientReducedModel,
    SingularKktSystem,
    InvalidArgument,
};

std::string_view to_string(ErrorCode code);

// Every precondition failure in the library is reported through this type.
// The code identifies the violated precondition; what() carries context.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace cblue
