#include "hashbreak/wbattack.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "hashbreak/errors.hpp"
#include "hashbreak/rng.hpp"

namespace hashbreak::wb {
namespace {

void check_inputs(const Image& x, const dctlab::DctMap& map, double threshold) {
    if (!(threshold > 0.0)) throw InvalidRange("white-box threshold must be > 0");
    if (x.channels() != 1 || x.width() != map.k() || x.height() != map.k()) {
        throw ShapeMismatch("white-box attacks need a single-channel " + std::to_string(map.k()) +
                            "x" + std::to_string(map.k()) + " image");
    }
}

WbResult make_result(const Image& x, const dctlab::DctMap& map, std::vector<double> raw) {
    WbResult r;
    r.delta = clip_perturbation(x, raw);
    r.delta_norm = lp_norm(r.delta.data(), Norm::L2);
    r.feature_norm = lp_norm(map.apply(r.delta.data()), Norm::L2);
    return r;
}

void scale_to(std::vector<double>& v, double target) {
    const double norm = lp_norm(v, Norm::L2);
    if (norm == 0.0) return;
    const double s = target / norm;
    for (double& e : v) e *= s;
}

} // namespace

WbResult wb_sample(const Image& x, const dctlab::DctMap& map, double threshold,
                   std::uint64_t max_samples, std::uint64_t seed) {
    check_inputs(x, map, threshold);
    SplitMix64 gen = stream_for(seed, 0x5a3b1e);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> alpha(map.output_size());
    for (std::uint64_t s = 1; s <= max_samples; ++s) {
        for (double& a : alpha) a = normal(gen);
        scale_to(alpha, threshold);
        std::vector<double> delta = map.apply_transpose(alpha);
        if (within_bounds(x.data(), delta)) {
            WbResult r = make_result(x, map, std::move(delta));
            r.success = true;
            r.samples = s;
            return r;
        }
    }
    throw Exhausted(max_samples);
}

WbResult wb_optimize(const Image& x, const dctlab::DctMap& map, double threshold,
                     std::size_t max_iterations, std::size_t restarts, std::uint64_t seed) {
    check_inputs(x, map, threshold);
    // The relative test alone is looser than the absolute 1e-9 floor once T > 1e-3.
    const double target = std::max(threshold * (1.0 - kSuccessTolerance), threshold - kAbsoluteTolerance);
    WbResult best;
    bool have_best = false;
    best.delta = Perturbation::zeros_like(x);
    std::uint64_t total_iterations = 0;

    for (std::size_t restart = 0; restart < std::max<std::size_t>(restarts, 1); ++restart) {
        SplitMix64 gen = stream_for(seed, 0x0b7, restart);
        std::normal_distribution<double> normal(0.0, 1.0);
        auto random_start = [&] {
            std::vector<double> v(x.size());
            for (double& e : v) e = normal(gen);
            scale_to(v, 0.01 * threshold);
            const Perturbation p = clip_perturbation(x, v);
            return std::vector<double>(p.data().begin(), p.data().end());
        };

        std::vector<double> delta = random_start();
        for (std::size_t it = 0; it < max_iterations; ++it) {
            ++total_iterations;
            std::vector<double> r = map.project_row_space(delta);
            if (lp_norm(r, Norm::L2) <= 1e-300) {
                delta = random_start();
                continue;
            }
            scale_to(r, threshold);
            const Perturbation clipped = clip_perturbation(x, r);
            delta.assign(clipped.data().begin(), clipped.data().end());

            const double feature = lp_norm(map.apply(delta), Norm::L2);
            if (!have_best || feature > best.feature_norm) {
                best = make_result(x, map, delta);
                best.restarts = restart;
                have_best = true;
            }
            if (feature >= target) {
                WbResult done = make_result(x, map, std::move(delta));
                done.success = true;
                done.samples = total_iterations;
                done.restarts = restart;
                return done;
            }
        }
    }
    best.success = false;
    best.samples = total_iterations;
    return best;
}

double theoretical_lower_bound(double threshold) {
    return threshold;
}

} // namespace hashbreak::wb
