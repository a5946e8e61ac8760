#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <random>

#include "hashbreak/errors.hpp"
#include "hashbreak/scanner.hpp"
#include "testkit.hpp"

using namespace hashbreak;
using namespace hashbreak::scanner;
namespace fs = std::filesystem;

namespace {

Hash random_bits_hash(std::mt19937_64& gen, HashAlgorithm algo = HashAlgorithm::PHash) {
    BitVec b(payload_length(algo));
    for (std::size_t i = 0; i < b.size(); ++i) b.set(i, gen() & 1U);
    return Hash(algo, std::move(b));
}

Hash random_real_hash(std::mt19937_64& gen) {
    std::normal_distribution<double> g(0.0, 1.0);
    RealVec r(64);
    for (double& v : r) v = g(gen);
    return Hash(HashAlgorithm::PHashContinuous, std::move(r));
}

Hash flip_bits(const Hash& h, std::size_t count) {
    BitVec b = h.bits();
    for (std::size_t i = 0; i < count; ++i) b.set(i, !b.get(i));
    return Hash(h.algorithm(), std::move(b));
}

HashDb random_db(std::mt19937_64& gen, std::size_t n, HashAlgorithm algo, double t) {
    HashDb db(algo, t);
    for (std::size_t i = 0; i < n; ++i) {
        db.add("r" + std::to_string(i),
               algo == HashAlgorithm::PHashContinuous ? random_real_hash(gen) : random_bits_hash(gen, algo));
    }
    return db;
}

// Brute-force oracle: recomputes every distance with its own Hamming/L2 code.
MatchResult oracle_match(const HashDb& db, const Hash& q, double t) {
    MatchResult r;
    r.min_distance = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < db.size(); ++i) {
        const Hash& h = db.records()[i].hash;
        double d = 0.0;
        if (h.is_bits()) {
            d = testkit::naive_hamming(h.bits().words(), q.bits().words(), h.bits().size());
        } else {
            std::vector<double> diff(64);
            for (std::size_t j = 0; j < 64; ++j) diff[j] = h.reals()[j] - q.reals()[j];
            d = testkit::norm2(diff);
        }
        if (d < r.min_distance) {
            r.min_distance = d;
            r.nearest = i;
        }
    }
    r.flagged = r.min_distance <= t;
    return r;
}

} // namespace

TEST_CASE("match examples") {
    std::mt19937_64 gen(1);
    HashDb db(HashAlgorithm::PHash, 4);
    const Hash h = random_bits_hash(gen);
    db.add("only", h);
    const auto same = match(db, h, 0.0);
    CHECK(same.flagged);
    CHECK(same.min_distance == 0.0);
    CHECK(same.nearest == 0);

    const auto far = match(db, flip_bits(h, 5));
    CHECK_FALSE(far.flagged);
    CHECK(far.min_distance == 5.0);
    CHECK(match(db, flip_bits(h, 4)).flagged);

    CHECK_THROWS_AS(match(HashDb(HashAlgorithm::PHash, 1), h), EmptyDb);
    CHECK_THROWS_AS(match(db, Hash(HashAlgorithm::AHash, BitVec(64))), AlgorithmMismatch);
}

TEST_CASE("ties go to the lowest index") {
    std::mt19937_64 gen(2);
    const Hash h = random_bits_hash(gen);
    HashDb db(HashAlgorithm::PHash, 0);
    db.add("a", flip_bits(h, 3));
    db.add("b", flip_bits(h, 2));
    db.add("c", flip_bits(h, 2));
    const auto r = match(db, h);
    CHECK(r.nearest == 1);
    CHECK(r.min_distance == 2.0);
}

TEST_CASE("match agrees with a brute-force scan") {
    std::mt19937_64 gen(3);
    for (auto algo : {HashAlgorithm::PHash, HashAlgorithm::PdqLite, HashAlgorithm::PHashContinuous}) {
        const HashDb db = random_db(gen, 200, algo, 0);
        const double t = algo == HashAlgorithm::PHash ? 20 : algo == HashAlgorithm::PdqLite ? 110 : 10.5;
        for (int q = 0; q < 200; ++q) {
            Hash query = algo == HashAlgorithm::PHashContinuous ? random_real_hash(gen) : random_bits_hash(gen, algo);
            if (q % 10 == 0 && query.is_bits()) query = flip_bits(db.records()[q].hash, 3);
            const auto got = match(db, query, t);
            const auto want = oracle_match(db, query, t);
            REQUIRE(got.flagged == want.flagged);
            REQUIRE(got.nearest == want.nearest);
            REQUIRE(std::abs(got.min_distance - want.min_distance) <= 1e-12);
        }
    }
}

TEST_CASE("database rules") {
    HashDb db(HashAlgorithm::AHash, 3);
    db.add("x", Hash(HashAlgorithm::AHash, BitVec(64)));
    CHECK_THROWS_AS(db.add("x", Hash(HashAlgorithm::AHash, BitVec(64))), InvalidConfig);
    CHECK_THROWS_AS(db.add("y", Hash(HashAlgorithm::DHash, BitVec(64))), AlgorithmMismatch);
    CHECK_THROWS_AS(db.add("bad\tid", Hash(HashAlgorithm::AHash, BitVec(64))), InvalidConfig);
    CHECK_THROWS_AS(db.set_threshold(-1), InvalidConfig);
    CHECK(db.find("x") == 0);
    CHECK(db.find("nope") == db.size());
}

TEST_CASE("database round-trips through text and files") {
    std::mt19937_64 gen(4);
    for (auto algo : {HashAlgorithm::PdqLite, HashAlgorithm::PHashContinuous}) {
        const HashDb db = random_db(gen, 25, algo, 0.1 + 1.0 / 3.0);
        const HashDb back = HashDb::deserialize(db.serialize());
        CHECK(back.algorithm() == algo);
        CHECK(back.threshold() == db.threshold());
        REQUIRE(back.size() == db.size());
        for (std::size_t i = 0; i < db.size(); ++i) {
            CHECK(back.records()[i].id == db.records()[i].id);
            CHECK(back.records()[i].hash == db.records()[i].hash);
        }
        const auto path = fs::temp_directory_path() / "hashbreak_scanner_db.tsv";
        db.save(path);
        CHECK(HashDb::load(path).serialize() == db.serialize());
    }
    CHECK_THROWS_AS(HashDb::deserialize("garbage\n"), ParseError);
    CHECK_THROWS_AS(HashDb::load("/nonexistent/db.tsv"), IoError);
}

TEST_CASE("fpr examples") {
    std::mt19937_64 gen(5);
    const HashDb db = random_db(gen, 1000, HashAlgorithm::PHash, 0);
    std::vector<Hash> same;
    for (const auto& r : db.records()) same.push_back(r.hash);
    CHECK(estimate_fpr(db, same, 0) == 1.0);

    std::vector<Hash> queries;
    for (int i = 0; i < 1000; ++i) queries.push_back(random_bits_hash(gen));
    CHECK(estimate_fpr(db, queries, 0) <= 1e-3);

    double prev = -1.0;
    for (double t = 0; t <= 32; t += 1) {
        const double f = estimate_fpr(db, queries, t);
        CHECK(f >= prev);
        CHECK(f == estimate_fpr(db, queries, t));
        prev = f;
    }
    CHECK(prev == 1.0);
    CHECK_THROWS_AS(estimate_fpr(db, {}, 1), EmptyQuerySet);
}

TEST_CASE("fpr never drops as the database grows") {
    std::mt19937_64 gen(6);
    std::vector<Hash> queries;
    for (int i = 0; i < 300; ++i) queries.push_back(random_bits_hash(gen));
    HashDb db(HashAlgorithm::PHash, 22);
    double prev = 0.0;
    for (int i = 0; i < 60; ++i) {
        db.add(std::to_string(i), random_bits_hash(gen));
        const double f = estimate_fpr(db, queries, 22);
        CHECK(f >= prev);
        prev = f;
    }
}

TEST_CASE("fnr examples") {
    std::mt19937_64 gen(7);
    HashDb one(HashAlgorithm::PHash, 0);
    const Hash h = random_bits_hash(gen);
    one.add("orig", h);
    CHECK(estimate_fnr(one, {{"orig", h}}, 0) == 0.0);
    CHECK(estimate_fnr(one, {{"orig", flip_bits(h, 7)}}, 6) == 1.0);
    CHECK_THROWS_AS(estimate_fnr(one, {{"missing", h}}, 6), UnknownId);
    CHECK_THROWS_AS(estimate_fnr(one, {}, 6), EmptyQuerySet);

    // Caught by a different db entry.
    HashDb two(HashAlgorithm::PHash, 0);
    two.add("orig", h);
    const Hash moved = flip_bits(h, 20);
    two.add("other", flip_bits(moved, 1));
    CHECK(estimate_fnr(two, {{"orig", moved}}, 2) == 0.0);

    const HashDb db = random_db(gen, 100, HashAlgorithm::PHash, 0);
    std::vector<std::pair<std::string, Hash>> attacked;
    for (std::size_t i = 0; i < 100; ++i) attacked.emplace_back(db.records()[i].id, flip_bits(db.records()[i].hash, i % 15));
    double prev = 2.0;
    for (double t = 0; t <= 16; t += 1) {
        const double f = estimate_fnr(db, attacked, t);
        CHECK(f <= prev);
        prev = f;
    }
}

TEST_CASE("evaluate sweeps thresholds") {
    std::mt19937_64 gen(8);
    const HashDb db = random_db(gen, 50, HashAlgorithm::PHash, 0);
    std::vector<Hash> queries;
    for (int i = 0; i < 40; ++i) queries.push_back(random_bits_hash(gen));
    std::vector<std::pair<std::string, Hash>> attacked{{"r0", flip_bits(db.records()[0].hash, 5)}};
    const auto rows = evaluate(db, queries, attacked, {2, 6, 10, 14});
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].has_fnr);
    CHECK(rows[0].fnr == 1.0);
    CHECK(rows[1].fnr == 0.0);
    CHECK(rows[2].n == 50);
    CHECK(rows[2].m == 40);
    CHECK(rows[3].attacked == 1);
    const auto no_fnr = evaluate(db, queries, {}, {2});
    CHECK_FALSE(no_fnr[0].has_fnr);
}

TEST_CASE("daily false flags") {
    const double v = daily_false_flags(0.0011, kDailyImageVolume, 1e-4);
    CHECK(v >= 4.5e6);
    CHECK(v <= 5.5e6);
    CHECK(daily_false_flags(0.0, kDailyImageVolume, 1e-4) == 0.0);
    const double w = daily_false_flags(0.0011, kDailyImageVolume, 1e-7);
    CHECK(std::abs(w - v) / v < 1e-4);
}

TEST_CASE("flag model examples") {
    CHECK(flag_prob({1, 0, 0.3, 0.2}, User::NonOffender, 1) == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(flag_prob({1, 0, 0.3, 0.2}, User::NonOffender, 0) == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(flag_prob({5, 5, 0.01, 0.0}, User::Offender, 5) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(flag_prob({5, 5, 0.01, 0.0}, User::Offender, 4) == 0.0);
    CHECK(flag_prob({4, 0, 0.0, 0.1}, User::NonOffender, 0) == 1.0);
    CHECK_THROWS_AS(flag_prob({3, 4, 0.1, 0.1}, User::Offender, 0), OutOfRange);
    CHECK_THROWS_AS(flag_prob({3, 1, 1.5, 0.1}, User::Offender, 0), OutOfRange);
    CHECK_THROWS_AS(flag_prob({3, 1, 0.1, 0.1}, User::Offender, 4), OutOfRange);
    CHECK(flag_tail({10, 2, 0.05, 0.1}, User::Offender, 0) == doctest::Approx(1.0).epsilon(1e-12));
    for (std::uint64_t k = 0; k <= 5; ++k) {
        CHECK(flag_tail({1000, 100, 1e-3, 0.1}, User::Offender, k) <= 1.0);
        CHECK(flag_tail({1000, 100, 1e-3, 0.1}, User::NonOffender, k) <= 1.0);
    }
}

TEST_CASE("pmfs sum to one and coincide when 1 - fnr equals fpr") {
    for (const FlagModel m : {FlagModel{1000, 100, 0.0011, 0.3}, FlagModel{200, 7, 0.2, 0.9},
                              FlagModel{50, 50, 0.5, 0.5}, FlagModel{1000, 999, 1e-6, 1e-6}}) {
        for (User u : {User::NonOffender, User::Offender}) {
            const auto pmf = flag_pmf(m, u);
            long double s = 0;
            for (double p : pmf) s += p;
            CHECK(std::abs(static_cast<double>(s) - 1.0) <= 1e-9);
        }
    }
    const FlagModel same{300, 40, 0.25, 0.75};
    const auto a = flag_pmf(same, User::NonOffender);
    const auto b = flag_pmf(same, User::Offender);
    CHECK(testkit::max_abs_diff(a, b) <= 1e-9);
}

TEST_CASE("pmf matches a Monte Carlo simulation") {
    const FlagModel m{1000, 100, 0.0011, 0.3};
    const std::size_t users = 100000;
    std::mt19937_64 gen(2024);
    for (User u : {User::NonOffender, User::Offender}) {
        std::vector<std::size_t> counts(m.n + 1, 0);
        std::binomial_distribution<std::uint64_t> clean(u == User::Offender ? m.n - m.l : m.n, m.fpr);
        std::binomial_distribution<std::uint64_t> bad(m.l, 1.0 - m.fnr);
        for (std::size_t i = 0; i < users; ++i) {
            std::uint64_t k = clean(gen);
            if (u == User::Offender) k += bad(gen);
            ++counts[k];
        }
        const auto pmf = flag_pmf(m, u);
        // Bins with under 10 expected users are pooled into one.
        auto check_bin = [&](double p, std::size_t count) {
            const double emp = static_cast<double>(count) / static_cast<double>(users);
            const double sd = std::sqrt(p * (1.0 - p) / static_cast<double>(users));
            CHECK(std::abs(emp - p) <= 3.0 * sd + 1e-12);
        };
        double rare_p = 0.0;
        std::size_t rare_count = 0;
        for (std::size_t k = 0; k <= m.n; ++k) {
            INFO("k = " << k);
            if (pmf[k] * static_cast<double>(users) >= 10.0) {
                check_bin(pmf[k], counts[k]);
            } else {
                rare_p += pmf[k];
                rare_count += counts[k];
            }
        }
        check_bin(rare_p, rare_count);
    }
}
