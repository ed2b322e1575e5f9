// Copyright 2026 The cblue Authors.
// SPDX-License-Identifier: Apache-2.0

#include "cblue/error.hpp"

namespace cblue {

std::string_view to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::NotHermitian: return "NotHermitian";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::RankDeficientConstraints: return "RankDeficientConstraints";
    case ErrorCode::EmptyNullspace: return "EmptyNullspace";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::RankDeficientReducedModel: return "RankDeficientReducedModel";
    case ErrorCode::SingularKktSystem: return "SingularKktSystem";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code)
{
}

}  // namespace cblue
