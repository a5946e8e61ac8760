#include "hashbreak/hash.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>

#include "hashbreak/errors.hpp"

namespace hashbreak {

std::string_view algorithm_name(HashAlgorithm algo) noexcept {
    switch (algo) {
    case HashAlgorithm::AHash: return "ahash";
    case HashAlgorithm::DHash: return "dhash";
    case HashAlgorithm::PHash: return "phash";
    case HashAlgorithm::PHashContinuous: return "phash-continuous";
    case HashAlgorithm::PdqLite: return "pdq";
    }
    return "unknown";
}

std::optional<HashAlgorithm> parse_algorithm(std::string_view name) noexcept {
    for (HashAlgorithm a : kAllAlgorithms) {
        if (algorithm_name(a) == name) return a;
    }
    if (name == "pdqlite" || name == "pdq-lite") return HashAlgorithm::PdqLite;
    if (name == "phashc" || name == "phash_continuous") return HashAlgorithm::PHashContinuous;
    return std::nullopt;
}

std::string_view metric_name(DistanceMetric metric) noexcept {
    return metric == DistanceMetric::Hamming ? "hamming" : "euclidean";
}

std::optional<DistanceMetric> parse_metric(std::string_view name) noexcept {
    if (name == "hamming") return DistanceMetric::Hamming;
    if (name == "euclidean") return DistanceMetric::Euclidean;
    return std::nullopt;
}

DistanceMetric metric_for(HashAlgorithm algo) noexcept {
    return algo == HashAlgorithm::PHashContinuous ? DistanceMetric::Euclidean
                                                  : DistanceMetric::Hamming;
}

std::size_t payload_length(HashAlgorithm algo) noexcept {
    return algo == HashAlgorithm::PdqLite ? 256 : 64;
}

std::size_t BitVec::popcount() const noexcept {
    std::size_t n = 0;
    for (std::uint64_t w : words_) n += static_cast<std::size_t>(std::popcount(w));
    return n;
}

Hash::Hash(HashAlgorithm algo, BitVec bits) : algo_(algo), payload_(std::move(bits)) {
    if (algo == HashAlgorithm::PHashContinuous) {
        throw AlgorithmMismatch("phash-continuous hashes carry real payloads");
    }
    if (std::get<BitVec>(payload_).size() != payload_length(algo)) {
        throw AlgorithmMismatch(std::string(algorithm_name(algo)) + " expects " +
                                std::to_string(payload_length(algo)) + " bits");
    }
}

Hash::Hash(HashAlgorithm algo, RealVec reals) : algo_(algo), payload_(std::move(reals)) {
    if (algo != HashAlgorithm::PHashContinuous) {
        throw AlgorithmMismatch(std::string(algorithm_name(algo)) + " hashes carry bit payloads");
    }
    const auto& r = std::get<RealVec>(payload_);
    if (r.size() != payload_length(algo)) {
        throw AlgorithmMismatch("phash-continuous expects 64 reals");
    }
    for (double v : r) {
        if (!std::isfinite(v)) throw AlgorithmMismatch("non-finite value in continuous hash");
    }
}

std::string Hash::to_string() const {
    if (is_bits()) {
        static constexpr char kHex[] = "0123456789abcdef";
        const BitVec& b = bits();
        std::string out;
        out.reserve(b.size() / 4);
        for (std::size_t i = 0; i < b.size(); i += 4) {
            unsigned nibble = 0;
            for (std::size_t j = 0; j < 4; ++j) nibble = (nibble << 1) | (b.get(i + j) ? 1U : 0U);
            out.push_back(kHex[nibble]);
        }
        return out;
    }
    std::string out;
    char buf[32];
    for (std::size_t i = 0; i < reals().size(); ++i) {
        if (i) out.push_back(',');
        std::snprintf(buf, sizeof buf, "%.17g", reals()[i]);
        out += buf;
    }
    return out;
}

Hash Hash::parse(HashAlgorithm algo, std::string_view text) {
    if (algo == HashAlgorithm::PHashContinuous) {
        RealVec values;
        std::size_t pos = 0;
        while (pos <= text.size()) {
            std::size_t end = text.find(',', pos);
            if (end == std::string_view::npos) end = text.size();
            const std::string field(text.substr(pos, end - pos));
            char* stop = nullptr;
            const double v = std::strtod(field.c_str(), &stop);
            if (field.empty() || stop != field.c_str() + field.size()) {
                throw ParseError("bad real in continuous hash: '" + field + "'");
            }
            values.push_back(v);
            pos = end + 1;
        }
        return Hash(algo, std::move(values));
    }
    const std::size_t bits = payload_length(algo);
    if (text.size() * 4 != bits) {
        throw ParseError("expected " + std::to_string(bits / 4) + " hex chars for " +
                         std::string(algorithm_name(algo)));
    }
    BitVec b(bits);
    for (std::size_t i = 0; i < text.size(); ++i) {
        unsigned nibble = 0;
        const char ch = text[i];
        if (ch >= '0' && ch <= '9') nibble = static_cast<unsigned>(ch - '0');
        else if (ch >= 'a' && ch <= 'f') nibble = static_cast<unsigned>(ch - 'a' + 10);
        else if (ch >= 'A' && ch <= 'F') nibble = static_cast<unsigned>(ch - 'A' + 10);
        else throw ParseError(std::string("bad hex character '") + ch + "'");
        for (std::size_t j = 0; j < 4; ++j) b.set(4 * i + j, (nibble >> (3 - j)) & 1U);
    }
    return Hash(algo, std::move(b));
}

double distance(const Hash& a, const Hash& b) {
    if (a.algorithm() != b.algorithm()) {
        throw AlgorithmMismatch("cannot compare " + std::string(algorithm_name(a.algorithm())) +
                                " with " + std::string(algorithm_name(b.algorithm())));
    }
    if (a.is_bits()) {
        const auto& wa = a.bits().words();
        const auto& wb = b.bits().words();
        std::size_t n = 0;
        for (std::size_t i = 0; i < wa.size(); ++i) {
            n += static_cast<std::size_t>(std::popcount(wa[i] ^ wb[i]));
        }
        return static_cast<double>(n);
    }
    const auto& ra = a.reals();
    const auto& rb = b.reals();
    double s = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        const double d = ra[i] - rb[i];
        s += d * d;
    }
    return std::sqrt(s);
}

} // namespace hashbreak
