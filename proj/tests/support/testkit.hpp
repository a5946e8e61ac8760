#pragma once

// Test-side generators and independent reference implementations. Nothing
// here calls into the library code it is used to check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "hashbreak/image.hpp"

namespace testkit {

using hashbreak::Image;

inline std::filesystem::path corpus_dir() { return HASHBREAK_CORPUS_DIR; }

inline std::vector<std::filesystem::path> corpus_files() {
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(corpus_dir())) {
        if (e.path().extension() == ".png") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    return files;
}

// Uniform white noise image.
inline Image random_image(std::size_t w, std::size_t h, std::size_t ch, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> d(w * h * ch);
    for (double& v : d) v = u(gen);
    return Image(w, h, ch, std::move(d));
}

// Image with natural-looking statistics: a sum of random cosine waves whose
// amplitude falls off as 1/frequency, plus a little pixel noise, rescaled into
// [0.05, 0.95].
inline Image natural_image(std::size_t w, std::size_t h, std::size_t ch, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> g(0.0, 1.0);
    struct Wave { double fx, fy, phase, amp; std::vector<double> tint; };
    std::vector<Wave> waves;
    for (int i = 0; i < 24; ++i) {
        const double f = 0.5 + 7.5 * u(gen);
        const double ang = 2.0 * std::numbers::pi * u(gen);
        Wave wv{f * std::cos(ang), f * std::sin(ang), 2.0 * std::numbers::pi * u(gen), g(gen) / f, {}};
        for (std::size_t c = 0; c < ch; ++c) wv.tint.push_back(0.6 + 0.8 * u(gen));
        waves.push_back(wv);
    }
    std::vector<double> d(w * h * ch);
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            const double px = static_cast<double>(x) / static_cast<double>(w);
            const double py = static_cast<double>(y) / static_cast<double>(h);
            for (std::size_t c = 0; c < ch; ++c) {
                double v = 0.0;
                for (const auto& wv : waves) {
                    v += wv.tint[c] * wv.amp *
                         std::cos(2.0 * std::numbers::pi * (wv.fx * px + wv.fy * py) + wv.phase);
                }
                d[(y * w + x) * ch + c] = v + 0.02 * g(gen);
            }
        }
    }
    const auto [lo, hi] = std::minmax_element(d.begin(), d.end());
    const double mn = *lo, span = std::max(*hi - *lo, 1e-12);
    for (double& v : d) v = 0.05 + 0.9 * (v - mn) / span;
    return Image(w, h, ch, std::move(d));
}

inline std::vector<double> gaussian_vector(std::size_t n, std::uint64_t seed, double scale = 1.0) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> g(0.0, scale);
    std::vector<double> v(n);
    for (double& e : v) e = g(gen);
    return v;
}

inline double norm2(const std::vector<double>& v) {
    long double acc = 0.0L;
    for (double e : v) acc += static_cast<long double>(e) * e;
    return static_cast<double>(std::sqrt(acc));
}

inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
    long double dot = 0.0L;
    for (std::size_t i = 0; i < a.size(); ++i) dot += static_cast<long double>(a[i]) * b[i];
    return static_cast<double>(dot) / (norm2(a) * norm2(b));
}

// DCT-II coefficient (i) of a length-k signal by direct summation with the
// textbook orthonormal scaling, in long double.
inline long double dct_coeff(const std::vector<long double>& x, std::size_t i) {
    const std::size_t k = x.size();
    long double acc = 0.0L;
    for (std::size_t j = 0; j < k; ++j) {
        acc += x[j] * std::cos(std::numbers::pi_v<long double> * (2.0L * j + 1.0L) * i / (2.0L * k));
    }
    const long double scale = i == 0 ? std::sqrt(1.0L / k) : std::sqrt(2.0L / k);
    return scale * acc;
}

// Reference DCT feature block: 2-D DCT-II of a k x k row-major image by
// separable direct summation, rows/cols a..b kept, flattened row-major.
inline std::vector<double> reference_features(const std::vector<double>& img, std::size_t k,
                                              std::size_t a, std::size_t b) {
    // Transform columns first (vertical frequency u), then rows (horizontal v).
    std::vector<long double> colT(k * k);
    for (std::size_t x = 0; x < k; ++x) {
        std::vector<long double> col(k);
        for (std::size_t y = 0; y < k; ++y) col[y] = img[y * k + x];
        for (std::size_t u = 0; u < k; ++u) colT[u * k + x] = dct_coeff(col, u);
    }
    std::vector<double> out;
    for (std::size_t u = a; u <= b; ++u) {
        std::vector<long double> row(colT.begin() + static_cast<std::ptrdiff_t>(u * k),
                                     colT.begin() + static_cast<std::ptrdiff_t>((u + 1) * k));
        for (std::size_t v = a; v <= b; ++v) out.push_back(static_cast<double>(dct_coeff(row, v)));
    }
    return out;
}

// Popcount of a XOR b by testing every bit.
inline int naive_hamming(const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b,
                         std::size_t bits) {
    int d = 0;
    for (std::size_t i = 0; i < bits; ++i) {
        const bool x = (a[i / 64] >> (i % 64)) & 1U;
        const bool y = (b[i / 64] >> (i % 64)) & 1U;
        d += x != y ? 1 : 0;
    }
    return d;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

inline double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace testkit
