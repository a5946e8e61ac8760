#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "hashbreak/hash.hpp"
#include "hashbreak/image.hpp"

namespace hashbreak::nes {

// Black-box attack hyperparameters. Defaults are the pHash settings; use
// defaults_for() to get the per-algorithm table.
struct AttackConfig {
    std::size_t attack_side = 64;        // attack space is attack_side^2 pixels
    double eps0 = 1.0 / 255.0;           // starting per-pixel perturbation bound
    double eps_step = 1.0 / 255.0;       // bound increment on plateau
    std::size_t plateau_window = 10;
    std::size_t samples = 800;           // NES samples per gradient, even
    std::size_t max_iterations = 10000;
    double momentum = 0.0;
    double step = 0.01;
    double sigma = 0.1;
    Norm p = Norm::L2;
    double threshold = 0.0;
    double eps_start = 0.0;              // diversity init magnitude, 0 = off
    std::uint64_t seed = 0;
    std::size_t threads = 0;             // 0 = default_thread_count(); never affects results

    // Throws InvalidConfig when an invariant is violated.
    void validate() const;

    static AttackConfig defaults_for(HashAlgorithm algo);
};

// Detection thresholds used to evaluate each algorithm (lowest first).
std::vector<double> default_thresholds(HashAlgorithm algo);

// Diversity-mode starting magnitude for the threshold at `index` of
// default_thresholds(algo).
double diversity_eps_start(HashAlgorithm algo, std::size_t index);

// Opaque image -> hash function plus its metric. Thread-safe; counts calls.
class BlackBoxOracle {
public:
    using HashFn = std::function<Hash(const Image&)>;

    BlackBoxOracle(HashFn fn, DistanceMetric metric);

    static BlackBoxOracle for_algorithm(HashAlgorithm algo);

    // Any exception escaping the hash function is rethrown as OracleFailure.
    Hash query(const Image& img) const;
    double distance(const Hash& a, const Hash& b) const;

    DistanceMetric metric() const noexcept { return metric_; }
    std::uint64_t calls() const noexcept { return calls_->load(); }

private:
    HashFn fn_;
    DistanceMetric metric_;
    std::shared_ptr<std::atomic<std::uint64_t>> calls_;
};

// f(candidate) for candidate = base + delta.
using Objective = std::function<double(const Image& candidate)>;

// d(reference, h(candidate)) through the oracle.
Objective distance_objective(const BlackBoxOracle& oracle, Hash reference);

// NES estimate of grad f at delta with d' antithetic samples. Every probe is
// clipped into the image box before f sees it. Pair i uses its own random
// stream derived from (stream_key, i), and pair contributions are summed in a
// fixed order, so the result is bitwise reproducible for any thread count.
// Throws OddSampleCount.
std::vector<double> estimate_gradient(const Objective& f, const Image& base,
                                      std::span<const double> delta, std::size_t samples,
                                      double sigma, std::uint64_t stream_key,
                                      std::size_t threads = 1);

struct UpdateResult {
    std::vector<double> delta;
    std::vector<double> momentum_grad;
};

// One signed-gradient ascent step with momentum, clipped to the image box and
// radially rescaled into the eps-ball.
UpdateResult update_perturbation(std::span<const double> delta, std::span<const double> grad,
                                 std::span<const double> prev_grad, const Image& base,
                                 double eps, double momentum, double step, Norm p);

// Maps a single-channel perturbation on the attack grid back to X: resize to
// X's pixel grid, then spread over RGB in proportion to the headroom of each
// channel. Throws ShapeMismatch when delta_bar's length is not a square.
Perturbation inverse_delta(const Image& x, std::span<const double> delta_bar,
                           std::size_t delta_width, std::size_t delta_height);

// Random valid starting point of magnitude eps_start * n^(1/p).
std::vector<double> diversity_init(const Image& base, double eps_start, Norm p,
                                   std::uint64_t stream_key);

// Seed material for an attack: first 64 bits of SHA-256 over the image shape,
// its pixel values (IEEE-754 little-endian) and the attacker seed.
std::uint64_t attack_seed(const Image& x, std::uint64_t attacker_seed);

struct AttackReport {
    bool success = false;
    std::size_t iterations = 0;
    double eps_norm = 0.0;
    Perturbation delta;                 // on the original image
    double f_final = 0.0;               // f_X(delta) through the oracle
    double l2_per_pixel = 0.0;
    std::vector<double> trace;          // f on the attack grid after each iteration
    std::vector<double> eps_trace;      // eps_norm after each iteration
    std::uint64_t seed = 0;
    std::uint64_t oracle_calls = 0;
    std::vector<double> delta_bar;      // final perturbation on the attack grid
};

// Full black-box attack loop. Throws OracleFailure if the oracle fails and
// InvalidConfig for bad parameters.
AttackReport attack(const Image& x, const BlackBoxOracle& oracle, const AttackConfig& cfg);

} // namespace hashbreak::nes
