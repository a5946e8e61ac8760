#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "hashbreak/dctlab.hpp"
#include "hashbreak/errors.hpp"
#include "hashbreak/nesattack.hpp"
#include "hashbreak/wbattack.hpp"
#include "testkit.hpp"

using namespace hashbreak;
using namespace hashbreak::wb;

namespace {

const dctlab::DctMap& map32() {
    static const dctlab::DctMap m(32, 1, 8);
    return m;
}

double feature_norm(const std::vector<double>& d) { return testkit::norm2(map32().apply(d)); }

std::vector<double> as_vec(const Perturbation& p) { return {p.data().begin(), p.data().end()}; }

} // namespace

TEST_CASE("input validation") {
    const Image mid = Image::filled(32, 32, 1, 0.5);
    CHECK_THROWS_AS(wb_sample(mid, map32(), 0.0, 10, 0), InvalidRange);
    CHECK_THROWS_AS(wb_optimize(mid, map32(), -1.0, 10, 1, 0), InvalidRange);
    CHECK_THROWS_AS(wb_sample(Image::filled(16, 16, 1, 0.5), map32(), 0.1, 10, 0), ShapeMismatch);
    CHECK_THROWS_AS(wb_sample(Image::filled(32, 32, 3, 0.5), map32(), 0.1, 10, 0), ShapeMismatch);
}

TEST_CASE("lower bound") {
    CHECK(theoretical_lower_bound(1.6) == 1.6);
    CHECK(theoretical_lower_bound(0.0) == 0.0);
}

TEST_CASE("sampling on an interior image lands exactly on the sphere") {
    const Image mid = Image::filled(32, 32, 1, 0.5);
    const auto r = wb_sample(mid, map32(), 0.1, 1000000, 1);
    CHECK(r.success);
    CHECK(r.samples <= 2);
    CHECK(std::abs(r.delta_norm - 0.1) <= 1e-9);
    CHECK(std::abs(r.feature_norm - 0.1) <= 1e-9);

    const auto d = as_vec(r.delta);
    CHECK(std::abs(testkit::norm2(d) - 0.1) <= 1e-9);
    CHECK(std::abs(feature_norm(d) - testkit::norm2(d)) <= 1e-9);
    CHECK(within_bounds(mid.data(), d));
}

TEST_CASE("sampling is deterministic per seed") {
    const Image x = testkit::natural_image(32, 32, 1, 2);
    const auto a = wb_sample(x, map32(), 0.3, 100000, 9);
    const auto b = wb_sample(x, map32(), 0.3, 100000, 9);
    const auto c = wb_sample(x, map32(), 0.3, 100000, 10);
    CHECK(a.delta == b.delta);
    CHECK(a.samples == b.samples);
    CHECK_FALSE(a.delta == c.delta);
}

TEST_CASE("saturated image and large radius exhausts the budget") {
    const Image black = Image::filled(32, 32, 1, 0.0);
    CHECK_THROWS_AS(wb_sample(black, map32(), 10.0, 500, 3), Exhausted);
    try {
        wb_sample(black, map32(), 10.0, 500, 3);
    } catch (const Exhausted& e) {
        CHECK(e.samples() == 500);
    }
}

TEST_CASE("accepted samples are symmetric around zero") {
    const Image mid = Image::filled(32, 32, 1, 0.5);
    const double t = 0.05;
    const std::size_t n = 10000;
    std::vector<double> mean(1024, 0.0);
    for (std::uint64_t s = 0; s < n; ++s) {
        const auto r = wb_sample(mid, map32(), t, 10, s);
        const auto d = r.delta.data();
        for (std::size_t i = 0; i < 1024; ++i) mean[i] += d[i];
    }
    for (double& v : mean) v /= static_cast<double>(n);
    // n c^2 |mean|^2 / T^2 is approximately chi-squared with c^2 = 64 degrees
    // of freedom; allow three standard deviations above its mean.
    const double stat = static_cast<double>(n) * 64.0 * std::pow(testkit::norm2(mean), 2) / (t * t);
    CHECK(stat <= 64.0 + 3.0 * std::sqrt(128.0));
}

TEST_CASE("optimization on an interior image") {
    const Image mid = Image::filled(32, 32, 1, 0.5);
    const auto r = wb_optimize(mid, map32(), 0.1, 1000, 10, 4);
    REQUIRE(r.success);
    CHECK(r.feature_norm >= 0.1 * (1.0 - 1e-6));
    CHECK(r.feature_norm <= 0.1 + 1e-12);
    CHECK(r.delta_norm <= 0.1 + 1e-9);
    CHECK(r.delta_norm >= 0.1 - 1e-9);
    CHECK(r.feature_norm >= r.delta_norm * (1.0 - 1e-6));
    CHECK(r.samples <= 5);
    CHECK(r.restarts == 0);
}

TEST_CASE("optimization never leaves the constraint set") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const Image x = seed % 2 ? testkit::random_image(32, 32, 1, seed) : testkit::natural_image(32, 32, 1, seed);
        const double t = 0.2 + 0.3 * static_cast<double>(seed % 6);
        const auto r = wb_optimize(x, map32(), t, 200, 3, seed);
        const auto d = as_vec(r.delta);
        CHECK(within_bounds(x.data(), d));
        CHECK(testkit::norm2(d) <= t + 1e-9);
        CHECK(std::abs(testkit::norm2(d) - r.delta_norm) <= 1e-12);
        CHECK(std::abs(feature_norm(d) - r.feature_norm) <= 1e-12);
        if (r.success) {
            CHECK(r.feature_norm >= t - 1e-9);
            CHECK(r.delta_norm >= t - 1e-9);
            CHECK(r.feature_norm >= r.delta_norm * (1.0 - 1e-6));
        }
    }
}

TEST_CASE("optimization is deterministic") {
    const Image x = testkit::natural_image(32, 32, 1, 77);
    const auto a = wb_optimize(x, map32(), 1.0, 300, 4, 5);
    const auto b = wb_optimize(x, map32(), 1.0, 300, 4, 5);
    CHECK(a.delta == b.delta);
    CHECK(a.samples == b.samples);
    CHECK(a.success == b.success);
}

TEST_CASE("white-box perturbations sit at T while black-box ones stay above it") {
    const double t = 0.5;
    const auto& map = map32();
    const nes::BlackBoxOracle dct_oracle(
        [&map](const Image& img) { return Hash(HashAlgorithm::PHashContinuous, map.apply(img.data())); },
        DistanceMetric::Euclidean);
    nes::AttackConfig cfg = nes::AttackConfig::defaults_for(HashAlgorithm::PHashContinuous);
    cfg.attack_side = 32;
    cfg.threshold = t;
    cfg.max_iterations = 2000;

    std::size_t within_2t = 0, attacked = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const Image x = testkit::random_image(32, 32, 1, 4000 + seed);
        const auto wbr = wb_optimize(x, map, t, 1000, 10, seed);
        if (wbr.success) CHECK(std::abs(wbr.delta_norm - t) <= 1e-9);

        cfg.seed = seed;
        const auto bb = nes::attack(x, dct_oracle, cfg);
        if (!bb.success) continue;
        ++attacked;
        const auto d = as_vec(bb.delta);
        const double dn = testkit::norm2(d);
        CHECK(feature_norm(d) > t);
        CHECK(dn >= t - 1e-9);
        if (dn <= 2.0 * t) ++within_2t;
    }
    CHECK(attacked >= 45);
    CHECK(static_cast<double>(within_2t) >= 0.7 * static_cast<double>(attacked));
    MESSAGE("black-box within 2T: " << within_2t << "/" << attacked);
}
