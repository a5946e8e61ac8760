#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hashbreak/hash.hpp"
#include "hashbreak/nesattack.hpp"

namespace hashbreak::cli {

enum ExitCode : int { kOk = 0, kInputError = 2, kAttackFailed = 3, kPropertyViolation = 4 };

// Flat key=value settings. '#' starts a comment; blank lines are ignored.
// Keys outside known_keys() are rejected with InvalidConfig.
class CliConfig {
public:
    static CliConfig parse(const std::string& text);
    static CliConfig load(const std::filesystem::path& path);

    void set(const std::string& key, const std::string& value);
    bool has(const std::string& key) const { return values_.count(key) != 0; }
    std::optional<std::string> get(const std::string& key) const;

    std::string str(const std::string& key, const std::string& fallback) const;
    double real(const std::string& key, double fallback) const;
    std::uint64_t u64(const std::string& key, std::uint64_t fallback) const;
    bool flag(const std::string& key, bool fallback) const;
    // Comma-separated reals; empty when the key is absent.
    std::vector<double> reals(const std::string& key) const;

    const std::map<std::string, std::string>& values() const noexcept { return values_; }

private:
    std::map<std::string, std::string> values_;
};

const std::vector<std::string>& known_keys();

// Per-algorithm defaults overlaid with any attack keys present in `cfg`,
// validated. Diversity mode (diverse=true) switches to the diversity
// schedule unless the keys are given explicitly.
nes::AttackConfig resolve_attack_config(const CliConfig& cfg, HashAlgorithm algo);

// Image files under `dir` (png/pgm/ppm/pnm), as sorted relative generic paths.
std::vector<std::string> list_images(const std::filesystem::path& dir);

// Entry point behind the executable. Never throws; returns an ExitCode.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace hashbreak::cli
