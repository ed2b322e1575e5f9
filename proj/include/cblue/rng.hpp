// Copyright 2026 The cblue Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace cblue {

// Philox4x32-10 block function: one 128-bit counter and a 64-bit key in,
// 128 pseudo-random bits out.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Counter-based random stream.
///
/// A stream is addressed by (seed, substream); two words of substream index
/// select independent sequences, e.g. (sweep point, trial). Output depends only
/// on that address and the draw position, never on the order in which streams
/// are created or consumed, which makes parallel runs reproducible.
class CounterRng {
public:
    using result_type = std::uint32_t;

    CounterRng(std::uint64_t seed, std::uint32_t substream_major, std::uint32_t substream_minor);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()();

    // Uniform on [0, 1) with 53 random bits.
    double uniform();
    // Uniform on (0, 1].
    double uniform_open_zero();

private:
    void refill();

    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 4> counter_;
    std::array<std::uint32_t, 4> buffer_{};
    unsigned next_ = 4;
};

}  // namespace cblue
