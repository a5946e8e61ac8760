#pragma once

#include <cstdint>
#include <limits>
#include <span>

namespace hashbreak {

// SplitMix64 finalizer; a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Small UniformRandomBitGenerator (SplitMix64). Cheap to construct, so every
// (key, counter...) tuple gets its own independent stream and results never
// depend on the order in which streams are consumed.
class SplitMix64 {
public:
    using result_type = std::uint64_t;

    constexpr explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    constexpr result_type operator()() noexcept {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix64(state_);
    }

private:
    std::uint64_t state_;
};

// Stream for a key and up to two counters.
constexpr SplitMix64 stream_for(std::uint64_t key, std::uint64_t a, std::uint64_t b = 0) noexcept {
    return SplitMix64(mix64(key ^ mix64(a + 0x632be59bd9b4e019ULL) ^ mix64(~b)));
}

// First 8 bytes (big-endian) of SHA-256 over the bytes given.
std::uint64_t digest64(std::span<const std::uint8_t> bytes);

} // namespace hashbreak
