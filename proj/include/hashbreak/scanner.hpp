#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "hashbreak/hash.hpp"

namespace hashbreak::scanner {

struct Record {
    std::string id;
    Hash hash;
};

// In-memory hash database. All records share one algorithm; ids are unique.
class HashDb {
public:
    HashDb(HashAlgorithm algo, double threshold);

    HashAlgorithm algorithm() const noexcept { return algo_; }
    DistanceMetric metric() const noexcept { return metric_for(algo_); }
    double threshold() const noexcept { return threshold_; }
    void set_threshold(double t);

    // Throws AlgorithmMismatch on a foreign hash and InvalidConfig on a duplicate id.
    void add(std::string id, Hash hash);

    const std::vector<Record>& records() const noexcept { return records_; }
    std::size_t size() const noexcept { return records_.size(); }
    bool empty() const noexcept { return records_.empty(); }

    // Index of `id`, or size() when absent.
    std::size_t find(const std::string& id) const;

    // TSV: header "hashdb<TAB>algo<TAB>metric<TAB>T", then "id<TAB>algo<TAB>hash".
    std::string serialize() const;
    static HashDb deserialize(const std::string& text);
    void save(const std::filesystem::path& path) const;
    static HashDb load(const std::filesystem::path& path);

private:
    HashAlgorithm algo_;
    double threshold_;
    std::vector<Record> records_;
};

struct MatchResult {
    bool flagged = false;
    double min_distance = 0.0;
    std::size_t nearest = 0;   // record index
};

// Exact linear scan at threshold T. Ties go to the lowest record index.
// Throws EmptyDb and AlgorithmMismatch.
MatchResult match(const HashDb& db, const Hash& q, double threshold);
inline MatchResult match(const HashDb& db, const Hash& q) { return match(db, q, db.threshold()); }

// Fraction of queries flagged. Throws EmptyQuerySet.
double estimate_fpr(const HashDb& db, const std::vector<Hash>& queries, double threshold);

// Fraction of modified images whose nearest db entry is farther than T.
// Throws UnknownId when an original id is not in the db.
double estimate_fnr(const HashDb& db, const std::vector<std::pair<std::string, Hash>>& attacked,
                    double threshold);

struct EvalRow {
    double threshold = 0.0;
    double fpr = 0.0;
    double fnr = 0.0;
    bool has_fnr = false;
    std::size_t n = 0;   // db size
    std::size_t m = 0;   // out-of-db queries
    std::size_t attacked = 0;
};

// Threshold sweep. FNR is skipped (has_fnr = false) for an empty attacked set.
std::vector<EvalRow> evaluate(const HashDb& db, const std::vector<Hash>& queries,
                              const std::vector<std::pair<std::string, Hash>>& attacked,
                              const std::vector<double>& thresholds);

inline constexpr double kDailyImageVolume = 4.5e9;

double daily_false_flags(double fpr, double daily_volume, double prevalence);

enum class User { NonOffender, Offender };

// Per-user flag count model: N images, l of them illegal for an offender.
struct FlagModel {
    std::uint64_t n = 0;
    std::uint64_t l = 0;
    double fpr = 0.0;
    double fnr = 0.0;

    // Throws OutOfRange when l > n or a rate is outside [0, 1].
    void validate() const;
};

// P(flags = k). Throws OutOfRange for k > N or an invalid model.
double flag_prob(const FlagModel& model, User user, std::uint64_t k);

// P(flags >= k) by summing the pmf.
double flag_tail(const FlagModel& model, User user, std::uint64_t k);

// Full pmf over k = 0..N.
std::vector<double> flag_pmf(const FlagModel& model, User user);

} // namespace hashbreak::scanner
