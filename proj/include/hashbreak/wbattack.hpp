#pragma once

#include <cstddef>
#include <cstdint>

#include "hashbreak/dctlab.hpp"
#include "hashbreak/image.hpp"

namespace hashbreak::wb {

struct WbResult {
    bool success = false;
    Perturbation delta;        // on the k x k image
    double delta_norm = 0.0;   // ||delta||_2
    double feature_norm = 0.0; // ||A delta||_2
    std::uint64_t samples = 0; // samples drawn or ascent iterations run
    std::size_t restarts = 0;  // restarts used (wb_optimize only)
};

// Rejection sampling on the radius-T sphere of A's row space: draw
// alpha ~ N(0, I), scale to norm T, take delta = A^T alpha and accept the
// first delta with X + delta inside the image box. Throws Exhausted after
// max_samples rejections and InvalidRange for T <= 0 or a mismatched image.
WbResult wb_sample(const Image& x, const dctlab::DctMap& map, double threshold,
                   std::uint64_t max_samples, std::uint64_t seed);

inline constexpr double kSuccessTolerance = 1e-6;
inline constexpr double kAbsoluteTolerance = 1e-9;

// Projected ascent for max ||A delta||^2 s.t. ||delta|| <= T and X + delta
// valid: alternate row-space projection, rescaling to the T-sphere and
// clipping into the box. Succeeds once ||A delta|| >= T (1 - 1e-6) and
// ||A delta|| >= T - 1e-9. Returns the best iterate with success = false
// when no restart converges.
WbResult wb_optimize(const Image& x, const dctlab::DctMap& map, double threshold,
                     std::size_t max_iterations, std::size_t restarts, std::uint64_t seed);

// Smallest L2 perturbation that can move the DCT features by T: T itself.
double theoretical_lower_bound(double threshold);

} // namespace hashbreak::wb
