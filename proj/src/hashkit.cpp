#include "hashbreak/hashkit.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>
#include <string>

#include "hashbreak/errors.hpp"

namespace hashbreak::hashkit {
namespace {

// Sparse 1-D resampling weights: out[i] = sum_j w[i][j] * in[first[i] + j].
struct AxisWeights {
    std::vector<std::size_t> first;
    std::vector<std::vector<double>> w;
};

AxisWeights bilinear_weights(std::size_t in, std::size_t out) {
    AxisWeights aw;
    aw.first.resize(out);
    aw.w.resize(out);
    const double scale = static_cast<double>(in) / static_cast<double>(out);
    for (std::size_t i = 0; i < out; ++i) {
        double src = (static_cast<double>(i) + 0.5) * scale - 0.5;
        src = std::clamp(src, 0.0, static_cast<double>(in - 1));
        const auto lo = static_cast<std::size_t>(std::floor(src));
        const double frac = src - static_cast<double>(lo);
        aw.first[i] = lo;
        if (lo + 1 < in && frac > 0.0) {
            aw.w[i] = {1.0 - frac, frac};
        } else {
            aw.w[i] = {1.0};
        }
    }
    return aw;
}

// Exact box integration of the source over each output cell.
AxisWeights area_weights(std::size_t in, std::size_t out) {
    AxisWeights aw;
    aw.first.resize(out);
    aw.w.resize(out);
    const double scale = static_cast<double>(in) / static_cast<double>(out);
    for (std::size_t i = 0; i < out; ++i) {
        const double lo = static_cast<double>(i) * scale;
        const double hi = std::min(static_cast<double>(i + 1) * scale, static_cast<double>(in));
        const auto j0 = static_cast<std::size_t>(std::floor(lo));
        const auto j1 = std::min(in, static_cast<std::size_t>(std::ceil(hi)));
        aw.first[i] = j0;
        std::vector<double> w;
        for (std::size_t j = j0; j < j1; ++j) {
            const double overlap =
                std::min(hi, static_cast<double>(j + 1)) - std::max(lo, static_cast<double>(j));
            w.push_back(std::max(0.0, overlap) / (hi - lo));
        }
        aw.w[i] = std::move(w);
    }
    return aw;
}

// Weights depend only on (mode, in, out); the attack loop resizes the same
// shapes thousands of times.
const AxisWeights& cached_weights(ResizeMode mode, std::size_t in, std::size_t out) {
    thread_local std::map<std::tuple<int, std::size_t, std::size_t>, AxisWeights> cache;
    const auto key = std::make_tuple(static_cast<int>(mode), in, out);
    auto it = cache.find(key);
    if (it == cache.end()) {
        it = cache.emplace(key, mode == ResizeMode::Area ? area_weights(in, out)
                                                         : bilinear_weights(in, out)).first;
    }
    return it->second;
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

} // namespace

Image grayscale(const Image& img) {
    if (img.channels() == 1) return img;
    const auto d = img.data();
    std::vector<double> out(img.width() * img.height());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = clamp01(0.299 * d[3 * i] + 0.587 * d[3 * i + 1] + 0.114 * d[3 * i + 2]);
    }
    return Image(img.width(), img.height(), 1, std::move(out));
}

std::vector<double> resample(std::span<const double> src, std::size_t in_w, std::size_t in_h,
                             std::size_t ch, std::size_t width, std::size_t height,
                             ResizeMode mode) {
    if (width == 0 || height == 0) throw InvalidRange("resize target must be at least 1x1");
    if (in_w == 0 || in_h == 0 || src.size() != in_w * in_h * ch) {
        throw ShapeMismatch("resample source does not match its shape");
    }
    if (width == in_w && height == in_h) return {src.begin(), src.end()};
    if (mode == ResizeMode::Auto) {
        const bool area = in_w >= 2 * width && in_h >= 2 * height;
        mode = area ? ResizeMode::Area : ResizeMode::Bilinear;
    }
    const AxisWeights& wx = cached_weights(mode, in_w, width);
    const AxisWeights& wy = cached_weights(mode, in_h, height);

    // Horizontal pass: in_h x width.
    std::vector<double> tmp(in_h * width * ch, 0.0);
    for (std::size_t y = 0; y < in_h; ++y) {
        for (std::size_t x = 0; x < width; ++x) {
            for (std::size_t c = 0; c < ch; ++c) {
                double acc = 0.0;
                for (std::size_t j = 0; j < wx.w[x].size(); ++j) {
                    acc += wx.w[x][j] * src[(y * in_w + wx.first[x] + j) * ch + c];
                }
                tmp[(y * width + x) * ch + c] = acc;
            }
        }
    }
    std::vector<double> out(height * width * ch, 0.0);
    for (std::size_t y = 0; y < height; ++y) {
        for (std::size_t x = 0; x < width; ++x) {
            for (std::size_t c = 0; c < ch; ++c) {
                double acc = 0.0;
                for (std::size_t j = 0; j < wy.w[y].size(); ++j) {
                    acc += wy.w[y][j] * tmp[((wy.first[y] + j) * width + x) * ch + c];
                }
                out[(y * width + x) * ch + c] = acc;
            }
        }
    }
    return out;
}

Image resize(const Image& img, std::size_t width, std::size_t height, ResizeMode mode) {
    if (img.empty()) throw InvalidImage("cannot resize an empty image");
    if (width == img.width() && height == img.height()) return img;
    auto out = resample(img.data(), img.width(), img.height(), img.channels(), width, height, mode);
    for (double& v : out) v = clamp01(v);
    return Image(width, height, img.channels(), std::move(out));
}

Image box_blur(const Image& img, std::size_t kernel) {
    if (kernel == 0 || kernel % 2 == 0) {
        throw EvenKernel("box blur kernel must be odd, got " + std::to_string(kernel));
    }
    if (kernel == 1) return img;
    const std::size_t w = img.width(), h = img.height(), ch = img.channels();
    const std::size_t r = kernel / 2;
    const auto src = img.data();
    const double inv = 1.0 / static_cast<double>(kernel);

    // Each pass copies one line into an edge-padded buffer and slides a
    // running window sum along it.
    std::vector<double> line;
    auto blur_line = [&](auto&& load, std::size_t len, auto&& store) {
        line.resize(len + 2 * r);
        for (std::size_t i = 0; i < r; ++i) line[i] = load(0);
        for (std::size_t i = 0; i < len; ++i) line[r + i] = load(i);
        for (std::size_t i = 0; i < r; ++i) line[r + len + i] = load(len - 1);
        double acc = 0.0;
        for (std::size_t d = 0; d < kernel; ++d) acc += line[d];
        store(0, acc * inv);
        for (std::size_t i = 1; i < len; ++i) {
            acc += line[i + kernel - 1] - line[i - 1];
            store(i, acc * inv);
        }
    };

    std::vector<double> tmp(src.size());
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t c = 0; c < ch; ++c) {
            blur_line([&](std::size_t x) { return src[(y * w + x) * ch + c]; }, w,
                      [&](std::size_t x, double v) { tmp[(y * w + x) * ch + c] = v; });
        }
    }
    std::vector<double> out(src.size());
    for (std::size_t x = 0; x < w; ++x) {
        for (std::size_t c = 0; c < ch; ++c) {
            blur_line([&](std::size_t y) { return tmp[(y * w + x) * ch + c]; }, h,
                      [&](std::size_t y, double v) { out[(y * w + x) * ch + c] = clamp01(v); });
        }
    }
    return Image(w, h, ch, std::move(out));
}

AlgorithmParams params_for(HashAlgorithm algo) noexcept {
    switch (algo) {
    case HashAlgorithm::AHash: return {8, 8, 0, 0, 0};
    case HashAlgorithm::DHash: return {9, 8, 0, 0, 0};
    case HashAlgorithm::PHash:
    case HashAlgorithm::PHashContinuous: return {32, 32, 7, 1, 8};
    case HashAlgorithm::PdqLite: return {64, 64, 0, 1, 16};
    }
    return {8, 8, 0, 0, 0};
}

const dctlab::DctMap& dct_map_for(HashAlgorithm algo) {
    static const dctlab::DctMap phash_map(32, 1, 8);
    static const dctlab::DctMap pdq_map(64, 1, 16);
    switch (algo) {
    case HashAlgorithm::PHash:
    case HashAlgorithm::PHashContinuous: return phash_map;
    case HashAlgorithm::PdqLite: return pdq_map;
    default: throw AlgorithmMismatch(std::string(algorithm_name(algo)) + " has no DCT step");
    }
}

std::vector<double> dct_features(const Image& img, const dctlab::DctMap& map) {
    if (img.channels() != 1 || img.width() != map.k() || img.height() != map.k()) {
        throw ShapeMismatch("DCT features need a single-channel " + std::to_string(map.k()) + "x" +
                            std::to_string(map.k()) + " image");
    }
    return map.apply(img.data());
}

double median(std::vector<double> values) {
    if (values.empty()) throw EmptyInput("median of an empty set");
    const std::size_t n = values.size();
    const auto mid = values.begin() + static_cast<std::ptrdiff_t>(n / 2);
    std::nth_element(values.begin(), mid, values.end());
    const double upper = *mid;
    if (n % 2 == 1) return upper;
    const double lower = *std::max_element(values.begin(), mid);
    return 0.5 * (lower + upper);
}

namespace {

BitVec threshold_bits(const std::vector<double>& values, double cut) {
    BitVec bits(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) bits.set(i, values[i] > cut);
    return bits;
}

} // namespace

Hash hash(const Image& img, HashAlgorithm algo) {
    const AlgorithmParams p = params_for(algo);
    Image g = grayscale(img);
    switch (algo) {
    case HashAlgorithm::AHash: {
        const Image small = resize(g, p.resize_width, p.resize_height);
        std::vector<double> px(small.data().begin(), small.data().end());
        double mean = 0.0;
        for (double v : px) mean += v;
        mean /= static_cast<double>(px.size());
        return Hash(algo, threshold_bits(px, mean));
    }
    case HashAlgorithm::DHash: {
        const Image small = resize(g, p.resize_width, p.resize_height);
        BitVec bits(64);
        for (std::size_t r = 0; r < 8; ++r) {
            for (std::size_t c = 0; c < 8; ++c) {
                bits.set(r * 8 + c, small.at(c + 1, r) - small.at(c, r) > 0.0);
            }
        }
        return Hash(algo, std::move(bits));
    }
    case HashAlgorithm::PHash:
    case HashAlgorithm::PHashContinuous: {
        const Image blurred = box_blur(g, p.blur_kernel);
        const Image small = resize(blurred, p.resize_width, p.resize_height);
        auto features = dct_features(small, dct_map_for(algo));
        if (algo == HashAlgorithm::PHashContinuous) return Hash(algo, std::move(features));
        const double cut = median(features);
        return Hash(algo, threshold_bits(features, cut));
    }
    case HashAlgorithm::PdqLite: {
        const Image small = resize(g, p.resize_width, p.resize_height);
        const auto features = dct_features(small, dct_map_for(algo));
        return Hash(algo, threshold_bits(features, median(features)));
    }
    }
    throw AlgorithmMismatch("unknown hash algorithm");
}

} // namespace hashbreak::hashkit
