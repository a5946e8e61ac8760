#include "hashbreak/nesattack.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <deque>
#include <random>
#include <string>

#include "hashbreak/errors.hpp"
#include "hashbreak/hashkit.hpp"
#include "hashbreak/parallel.hpp"
#include "hashbreak/rng.hpp"

namespace hashbreak::nes {

void AttackConfig::validate() const {
    auto fail = [](const std::string& what) { throw InvalidConfig(what); };
    if (attack_side == 0) fail("attack_side must be >= 1");
    if (samples == 0 || samples % 2 != 0) fail("samples must be a positive even number");
    if (!(eps0 > 0.0)) fail("eps0 must be > 0");
    if (!(eps_step > 0.0)) fail("eps_step must be > 0");
    if (!(sigma > 0.0)) fail("sigma must be > 0");
    if (!(step > 0.0)) fail("step must be > 0");
    if (!(momentum >= 0.0 && momentum < 1.0)) fail("momentum must lie in [0, 1)");
    if (max_iterations == 0) fail("max_iterations must be >= 1");
    if (plateau_window == 0) fail("plateau_window must be >= 1");
    if (!(threshold >= 0.0)) fail("threshold must be >= 0");
    if (!(eps_start >= 0.0)) fail("eps_start must be >= 0");
}

AttackConfig AttackConfig::defaults_for(HashAlgorithm algo) {
    AttackConfig cfg;
    switch (algo) {
    case HashAlgorithm::PHashContinuous:
        cfg.sigma = 0.001;
        cfg.step = 0.001;
        cfg.momentum = 0.8;
        break;
    case HashAlgorithm::PHash:
    case HashAlgorithm::PdqLite:
        cfg.sigma = 0.1;
        cfg.step = 0.01;
        break;
    case HashAlgorithm::AHash:
    case HashAlgorithm::DHash:
        cfg.sigma = 0.1;
        cfg.step = 0.001;
        break;
    }
    cfg.threshold = default_thresholds(algo).front();
    return cfg;
}

std::vector<double> default_thresholds(HashAlgorithm algo) {
    switch (algo) {
    case HashAlgorithm::PHashContinuous: return {0.05, 0.6, 1.1, 1.6};
    case HashAlgorithm::PHash: return {2, 6, 10, 14};
    case HashAlgorithm::AHash: return {1, 3, 5, 7};
    case HashAlgorithm::DHash: return {1, 4, 9, 12};
    case HashAlgorithm::PdqLite: return {30, 70, 85, 90};
    }
    return {};
}

double diversity_eps_start(HashAlgorithm algo, std::size_t index) {
    index = std::min<std::size_t>(index, 3);
    switch (algo) {
    case HashAlgorithm::PHashContinuous: return 0.0;
    case HashAlgorithm::AHash:
    case HashAlgorithm::DHash: return 0.02 + 0.01 * static_cast<double>(index);
    case HashAlgorithm::PHash:
    case HashAlgorithm::PdqLite: return 0.04 + 0.02 * static_cast<double>(index);
    }
    return 0.0;
}

BlackBoxOracle::BlackBoxOracle(HashFn fn, DistanceMetric metric)
    : fn_(std::move(fn)), metric_(metric), calls_(std::make_shared<std::atomic<std::uint64_t>>(0)) {}

BlackBoxOracle BlackBoxOracle::for_algorithm(HashAlgorithm algo) {
    return BlackBoxOracle([algo](const Image& img) { return hashkit::hash(img, algo); },
                          metric_for(algo));
}

Hash BlackBoxOracle::query(const Image& img) const {
    calls_->fetch_add(1, std::memory_order_relaxed);
    try {
        return fn_(img);
    } catch (const OracleFailure&) {
        throw;
    } catch (const std::exception& e) {
        throw OracleFailure(std::string("oracle failed: ") + e.what());
    }
}

double BlackBoxOracle::distance(const Hash& a, const Hash& b) const {
    return hashbreak::distance(a, b);
}

Objective distance_objective(const BlackBoxOracle& oracle, Hash reference) {
    return [oracle, ref = std::move(reference)](const Image& candidate) {
        return oracle.distance(ref, oracle.query(candidate));
    };
}

namespace {

// Pairs per reduction chunk. Fixed so the summation tree never depends on
// the thread count.
constexpr std::size_t kPairsPerChunk = 8;

// theta' = clip(base + sigma*theta) - base, written per element so that an
// unclipped coordinate is exactly +-sigma*theta and antithetic pairs cancel
// bit-exactly.
void clipped_probe(std::span<const double> base, std::span<const double> noise, double sign,
                   std::vector<double>& probe, std::vector<double>& candidate) {
    for (std::size_t j = 0; j < base.size(); ++j) {
        const double step = sign * noise[j];
        const double v = base[j] + step;
        if (v > 1.0) {
            candidate[j] = 1.0;
            probe[j] = 1.0 - base[j];
        } else if (v < 0.0) {
            candidate[j] = 0.0;
            probe[j] = -base[j];
        } else {
            candidate[j] = v;
            probe[j] = step;
        }
    }
}

} // namespace

std::vector<double> estimate_gradient(const Objective& f, const Image& base,
                                      std::span<const double> delta, std::size_t samples,
                                      double sigma, std::uint64_t stream_key,
                                      std::size_t threads) {
    if (samples == 0 || samples % 2 != 0) {
        throw OddSampleCount("NES sample count must be positive and even, got " +
                             std::to_string(samples));
    }
    if (delta.size() != base.size()) throw ShapeMismatch("perturbation does not match image");

    const std::size_t n = base.size();
    std::vector<double> point(n);
    {
        const auto xs = base.data();
        for (std::size_t j = 0; j < n; ++j) point[j] = std::clamp(xs[j] + delta[j], 0.0, 1.0);
    }

    const std::size_t pairs = samples / 2;
    const std::size_t chunks = (pairs + kPairsPerChunk - 1) / kPairsPerChunk;
    std::vector<std::vector<double>> partial(chunks);

    parallel_for(chunks, threads, [&](std::size_t chunk) {
        std::vector<double> acc(n, 0.0);
        std::vector<double> noise(n), probe_pos(n), probe_neg(n), cand(n);
        const std::size_t first = chunk * kPairsPerChunk;
        const std::size_t last = std::min(pairs, first + kPairsPerChunk);
        for (std::size_t i = first; i < last; ++i) {
            SplitMix64 gen = stream_for(stream_key, i);
            std::normal_distribution<double> normal(0.0, 1.0);
            for (std::size_t j = 0; j < n; ++j) noise[j] = sigma * normal(gen);

            clipped_probe(point, noise, 1.0, probe_pos, cand);
            const double f_pos =
                f(Image(base.width(), base.height(), base.channels(), cand));
            clipped_probe(point, noise, -1.0, probe_neg, cand);
            const double f_neg =
                f(Image(base.width(), base.height(), base.channels(), cand));
            for (std::size_t j = 0; j < n; ++j) {
                acc[j] += f_pos * probe_pos[j] + f_neg * probe_neg[j];
            }
        }
        partial[chunk] = std::move(acc);
    });

    std::vector<double> grad(n, 0.0);
    for (const auto& part : partial) {
        for (std::size_t j = 0; j < n; ++j) grad[j] += part[j];
    }
    const double scale = 1.0 / (sigma * static_cast<double>(samples));
    for (double& g : grad) g *= scale;
    return grad;
}

UpdateResult update_perturbation(std::span<const double> delta, std::span<const double> grad,
                                 std::span<const double> prev_grad, const Image& base,
                                 double eps, double momentum, double step, Norm p) {
    const std::size_t n = base.size();
    if (delta.size() != n || grad.size() != n || prev_grad.size() != n) {
        throw ShapeMismatch("update inputs must share the image shape");
    }
    UpdateResult r;
    r.momentum_grad.resize(n);
    std::vector<double> raw(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double g = momentum * prev_grad[j] + (1.0 - momentum) * grad[j];
        r.momentum_grad[j] = g;
        const double s = g > 0.0 ? 1.0 : (g < 0.0 ? -1.0 : 0.0);
        raw[j] = delta[j] + step * s;
    }
    Perturbation clipped = clip_perturbation(base, raw);
    r.delta.assign(clipped.data().begin(), clipped.data().end());
    const double norm = lp_norm(r.delta, p);
    if (norm > eps) {
        const double scale = eps / norm;
        for (double& v : r.delta) v *= scale;
    }
    return r;
}

Perturbation inverse_delta(const Image& x, std::span<const double> delta_bar,
                           std::size_t delta_width, std::size_t delta_height) {
    if (delta_bar.size() != delta_width * delta_height) {
        throw ShapeMismatch("attack-grid perturbation does not match its shape");
    }
    const std::vector<double> gray = hashkit::resample(delta_bar, delta_width, delta_height, 1,
                                                       x.width(), x.height());
    const auto xs = x.data();
    const std::size_t ch = x.channels();
    std::vector<double> raw(x.size());
    for (std::size_t i = 0; i < gray.size(); ++i) {
        const double dg = gray[i];
        if (ch == 1) {
            raw[i] = dg;
            continue;
        }
        const double mean = (xs[3 * i] + xs[3 * i + 1] + xs[3 * i + 2]) / 3.0;
        for (std::size_t c = 0; c < 3; ++c) {
            const double xc = xs[3 * i + c];
            double d = 0.0;
            if (dg <= 0.0) {
                d = mean > 0.0 ? dg * xc / mean : 0.0;
            } else {
                d = mean < 1.0 ? dg * (1.0 - xc) / (1.0 - mean) : 0.0;
            }
            raw[3 * i + c] = d;
        }
    }
    return clip_perturbation(x, raw);
}

std::vector<double> diversity_init(const Image& base, double eps_start, Norm p,
                                   std::uint64_t stream_key) {
    if (!(eps_start >= 0.0)) throw InvalidConfig("eps_start must be >= 0");
    const std::size_t n = base.size();
    std::vector<double> d(n, 0.0);
    if (eps_start == 0.0) return d;
    SplitMix64 gen = stream_for(stream_key, 0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto xs = base.data();
    for (std::size_t j = 0; j < n; ++j) {
        // U(-x, 1 - x)
        d[j] = unit(gen) - xs[j];
    }
    const double norm = lp_norm(d, p);
    if (norm > 0.0) {
        const double scale = eps_start * norm_scale(n, p) / norm;
        for (double& v : d) v *= scale;
    }
    for (double& v : d) v = std::clamp(v, 0.0, 1.0);
    const Perturbation valid = clip_perturbation(base, d);
    return {valid.data().begin(), valid.data().end()};
}

std::uint64_t attack_seed(const Image& x, std::uint64_t attacker_seed) {
    std::vector<std::uint8_t> bytes;
    bytes.reserve(8 * (x.size() + 4));
    auto put = [&](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    };
    put(x.width());
    put(x.height());
    put(x.channels());
    for (double v : x.data()) put(std::bit_cast<std::uint64_t>(v));
    put(attacker_seed);
    return digest64(bytes);
}

AttackReport attack(const Image& x, const BlackBoxOracle& oracle, const AttackConfig& cfg) {
    cfg.validate();
    const std::size_t threads = cfg.threads ? cfg.threads : default_thread_count();
    const std::uint64_t calls_before = oracle.calls();

    const std::size_t side = cfg.attack_side;
    const Image x_bar = hashkit::resize(hashkit::grayscale(x), side, side);
    const std::size_t n_bar = x_bar.size();
    const Objective f_bar = distance_objective(oracle, oracle.query(x_bar));
    const Objective f_full = distance_objective(oracle, oracle.query(x));

    AttackReport report;
    report.seed = attack_seed(x, cfg.seed);

    std::vector<double> delta = diversity_init(x_bar, cfg.eps_start, cfg.p, mix64(report.seed ^ 0xd1ce));
    std::vector<double> prev_grad(n_bar, 0.0);
    double eps_norm = cfg.eps0;
    double eps = eps_norm * norm_scale(n_bar, cfg.p);
    double f_current = cfg.eps_start > 0.0 ? f_bar(compose(x_bar, delta)) : 0.0;

    std::deque<double> window;
    Perturbation full_delta;
    double full_f = 0.0;

    for (std::size_t t = 0; t < cfg.max_iterations; ++t) {
        const auto grad = estimate_gradient(f_bar, x_bar, delta, cfg.samples, cfg.sigma,
                                            stream_for(report.seed, t + 1)(), threads);
        auto upd = update_perturbation(delta, grad, prev_grad, x_bar, eps, cfg.momentum, cfg.step, cfg.p);
        delta = std::move(upd.delta);
        prev_grad = std::move(upd.momentum_grad);

        const double f_next = f_bar(compose(x_bar, delta));
        window.push_back(f_next - f_current);
        if (window.size() > cfg.plateau_window) window.pop_front();
        f_current = f_next;
        if (window.size() == cfg.plateau_window) {
            const auto flat = static_cast<std::size_t>(
                std::count_if(window.begin(), window.end(), [](double d) { return d <= 0.0; }));
            if (2 * flat > cfg.plateau_window) {
                eps_norm += cfg.eps_step;
                eps = eps_norm * norm_scale(n_bar, cfg.p);
            }
        }
        report.trace.push_back(f_next);
        report.eps_trace.push_back(eps_norm);
        report.iterations = t + 1;

        if (f_next > cfg.threshold) {
            full_delta = inverse_delta(x, delta, side, side);
            full_f = f_full(apply_perturbation(x, full_delta));
            if (full_f > cfg.threshold) {
                report.success = true;
                break;
            }
        }
    }

    if (!report.success) {
        full_delta = inverse_delta(x, delta, side, side);
        full_f = f_full(apply_perturbation(x, full_delta));
    }
    report.eps_norm = eps_norm;
    report.delta = std::move(full_delta);
    report.f_final = full_f;
    report.l2_per_pixel = lp_per_pixel(report.delta.data(), Norm::L2);
    report.delta_bar = std::move(delta);
    report.oracle_calls = oracle.calls() - calls_before;
    return report;
}

} // namespace hashbreak::nes
