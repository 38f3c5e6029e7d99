#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace homog {

/// splitmix64 finalizer. Used to derive stream keys from (seed, purpose, index)
/// words; see Steele/Lea/Flood 2014.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t stream_key(std::uint64_t seed, std::uint64_t a) {
    return mix64(seed ^ mix64(a));
}
constexpr std::uint64_t stream_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return mix64(stream_key(seed, a) ^ mix64(b + 0x1234567ULL));
}
constexpr std::uint64_t stream_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                                   std::uint64_t c) {
    return mix64(stream_key(seed, a, b) ^ mix64(c + 0x9876543ULL));
}

/// Philox4x32-10 block function (Salmon et al., SC'11). Counter-based: the
/// value at any 128-bit counter is computable in O(1), which is what lets
/// field cells and parallel streams be addressed randomly.
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) {
    constexpr std::uint32_t kM0 = 0xD2511F53u, kM1 = 0xCD9E8D57u;
    constexpr std::uint32_t kW0 = 0x9E3779B9u, kW1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
        const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
        const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kW0;
        key[1] += kW1;
    }
    return ctr;
}

/// One independent random stream, identified by a 64-bit key. Draws advance a
/// 128-bit counter, so distinct keys give independent streams and the same key
/// always replays the same sequence.
class RngStream {
public:
    RngStream() : RngStream(0) {}
    explicit RngStream(std::uint64_t key)
        : key_{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)} {}

    std::uint32_t next_u32() {
        if (idx_ == 4) refill();
        return block_[idx_++];
    }

    std::uint64_t next_u64() {
        const std::uint64_t lo = next_u32();
        const std::uint64_t hi = next_u32();
        return (hi << 32) | lo;
    }

    /// uniform on (0,1), never exactly 0 or 1
    double next_double() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53;
    }

    /// standard normal via Box-Muller (second value cached)
    double next_normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        const double u1 = next_double();
        const double u2 = next_double();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        cached_ = r * std::sin(a);
        have_cached_ = true;
        return r * std::cos(a);
    }

private:
    void refill() {
        block_ = philox4x32({static_cast<std::uint32_t>(ctr_),
                             static_cast<std::uint32_t>(ctr_ >> 32),
                             static_cast<std::uint32_t>(ctr_hi_),
                             static_cast<std::uint32_t>(ctr_hi_ >> 32)},
                            key_);
        if (++ctr_ == 0) ++ctr_hi_;
        idx_ = 0;
    }

    std::array<std::uint32_t, 2> key_;
    std::uint64_t ctr_ = 0, ctr_hi_ = 0;
    std::array<std::uint32_t, 4> block_{};
    int idx_ = 4;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

/// O(1) keyed value lookup: uniform (0,1) attached to (key, index). Index may
/// be negative (field cells extend both ways from the origin).
inline double keyed_uniform(std::uint64_t key, std::int64_t index) {
    const auto ctr = static_cast<std::uint64_t>(index);
    const auto b = philox4x32({static_cast<std::uint32_t>(ctr),
                               static_cast<std::uint32_t>(ctr >> 32), 0x5eedu, 0xfacadeu},
                              {static_cast<std::uint32_t>(key),
                               static_cast<std::uint32_t>(key >> 32)});
    const std::uint64_t x = (static_cast<std::uint64_t>(b[1]) << 32) | b[0];
    return (static_cast<double>(x >> 11) + 0.5) * 0x1p-53;
}

}  // namespace homog
