#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "hashbreak/hash.hpp"
#include "hashbreak/nesattack.hpp"
#include "hashbreak/scanner.hpp"
#include "hashbreak/wbattack.hpp"

namespace hashbreak::report {

using Json = nlohmann::ordered_json;

std::string seed_hex(std::uint64_t seed);

// Resolved attack configuration. The thread count is left out because it
// never changes a result.
Json config_json(const nes::AttackConfig& cfg);

struct AttackContext {
    std::string image;             // input path as given
    HashAlgorithm algo = HashAlgorithm::PHash;
    std::size_t run = 0;
    bool diverse = false;
    std::string original_hash;
    std::string modified_hash;     // hash of the saved 8-bit image
    double saved_distance = 0.0;   // distance after 8-bit quantization
};

Json attack_json(const nes::AttackReport& r, const nes::AttackConfig& cfg, const AttackContext& ctx);

struct WbContext {
    std::string image;
    std::string kind;              // "wb_sample" or "wb_optim"
    std::size_t k = 0, a = 0, b = 0;
    double threshold = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t max_samples = 0;
    std::size_t max_iterations = 0;
    std::size_t restarts = 0;
};

Json wb_json(const wb::WbResult& r, const WbContext& ctx);

// Writes via a temporary file and a rename so readers never see partial output.
void write_atomic(const std::filesystem::path& path, const std::string& text);

// "%.17g"
std::string fmt17(double v);

} // namespace hashbreak::report
