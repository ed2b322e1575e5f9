// Copyright 2026 The cblue Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <ostream>

namespace cblue::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // estimation precondition or verification failure
inline constexpr int kExitUsage = 2;    // bad flags, unreadable or malformed input

// Entry point of the `cblue` tool: subcommands estimate, experiment, verify.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cblue::cli
