#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace hashbreak {

enum class HashAlgorithm { AHash, DHash, PHash, PHashContinuous, PdqLite };

enum class DistanceMetric { Hamming, Euclidean };

inline constexpr HashAlgorithm kAllAlgorithms[] = {
    HashAlgorithm::PHashContinuous, HashAlgorithm::PHash, HashAlgorithm::AHash,
    HashAlgorithm::DHash, HashAlgorithm::PdqLite};

// Canonical lowercase names: ahash, dhash, phash, phash-continuous, pdq.
std::string_view algorithm_name(HashAlgorithm algo) noexcept;
std::optional<HashAlgorithm> parse_algorithm(std::string_view name) noexcept;

std::string_view metric_name(DistanceMetric metric) noexcept;
std::optional<DistanceMetric> parse_metric(std::string_view name) noexcept;

DistanceMetric metric_for(HashAlgorithm algo) noexcept;

// Payload length: 64 for everything except PdqLite (256).
std::size_t payload_length(HashAlgorithm algo) noexcept;

// Fixed-length bit string. Bit 0 is the first bit produced by the hash
// pipeline and the most significant bit of the hex form.
class BitVec {
public:
    BitVec() = default;
    explicit BitVec(std::size_t bits) : bits_(bits), words_((bits + 63) / 64, 0) {}

    std::size_t size() const noexcept { return bits_; }
    bool get(std::size_t i) const noexcept { return (words_[i / 64] >> (i % 64)) & 1U; }
    void set(std::size_t i, bool v) noexcept {
        const std::uint64_t mask = std::uint64_t{1} << (i % 64);
        if (v) words_[i / 64] |= mask; else words_[i / 64] &= ~mask;
    }
    std::size_t popcount() const noexcept;
    const std::vector<std::uint64_t>& words() const noexcept { return words_; }

    friend bool operator==(const BitVec&, const BitVec&) = default;

private:
    std::size_t bits_ = 0;
    std::vector<std::uint64_t> words_;
};

using RealVec = std::vector<double>;

// A perceptual hash tagged with the algorithm that produced it. The payload
// kind always matches the algorithm (bits, or 64 finite reals for
// pHash-continuous).
class Hash {
public:
    Hash(HashAlgorithm algo, BitVec bits);
    Hash(HashAlgorithm algo, RealVec reals);

    HashAlgorithm algorithm() const noexcept { return algo_; }
    bool is_bits() const noexcept { return std::holds_alternative<BitVec>(payload_); }
    const BitVec& bits() const { return std::get<BitVec>(payload_); }
    const RealVec& reals() const { return std::get<RealVec>(payload_); }

    // Lowercase MSB-first hex for bit hashes, comma-separated %.17g reals otherwise.
    std::string to_string() const;
    static Hash parse(HashAlgorithm algo, std::string_view text);

    friend bool operator==(const Hash&, const Hash&) = default;

private:
    HashAlgorithm algo_;
    std::variant<BitVec, RealVec> payload_;
};

// Hamming distance for bit payloads, Euclidean for real payloads.
// Throws AlgorithmMismatch when the two hashes come from different algorithms.
double distance(const Hash& a, const Hash& b);

} // namespace hashbreak
