#pragma once

// Counter-based random numbers (Philox4x32-10).  Every variate is a pure
// function of (seed, index, stage, stream), so sample i never depends on how
// work was partitioned across threads.

#include <array>
#include <cstdint>

namespace klconc::rng {

namespace detail {

inline void mulhilo32(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    std::uint64_t prod = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(prod >> 32);
    lo = static_cast<std::uint32_t>(prod);
}

}  // namespace detail

// One Philox4x32-10 block: 128 counter bits -> 128 output bits under a 64-bit key.
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) {
    constexpr std::uint32_t kMul0 = 0xD2511F53u;
    constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        detail::mulhilo32(kMul0, ctr[0], hi0, lo0);
        detail::mulhilo32(kMul1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return ctr;
}

// 64 uniform bits addressed by (seed, index, stage, stream).
inline std::uint64_t bits64(std::uint64_t seed, std::uint64_t index, std::uint32_t stage,
                            std::uint32_t stream) {
    auto out = philox4x32({static_cast<std::uint32_t>(index),
                           static_cast<std::uint32_t>(index >> 32), stage, stream},
                          {static_cast<std::uint32_t>(seed),
                           static_cast<std::uint32_t>(seed >> 32)});
    return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

// Uniform double in [0,1) with 53 random bits.
inline double uniform01(std::uint64_t seed, std::uint64_t index, std::uint32_t stage,
                        std::uint32_t stream) {
    return static_cast<double>(bits64(seed, index, stage, stream) >> 11) * 0x1.0p-53;
}

// Stream ids; distinct uses of the same seed must not share a stream.
inline constexpr std::uint32_t kStreamMultinomial = 1;
inline constexpr std::uint32_t kStreamDirichlet = 2;
inline constexpr std::uint32_t kStreamGrid = 3;

}  // namespace klconc::rng
