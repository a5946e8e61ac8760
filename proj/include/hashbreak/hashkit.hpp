#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hashbreak/dctlab.hpp"
#include "hashbreak/hash.hpp"
#include "hashbreak/image.hpp"

namespace hashbreak::hashkit {

// BT.601 luma. Single-channel input is returned unchanged.
Image grayscale(const Image& img);

enum class ResizeMode { Auto, Bilinear, Area };

// Separable resize. Auto picks Area when every output pixel covers at least
// 2x2 input pixels and Bilinear (half-pixel centres, clamped edges) otherwise.
Image resize(const Image& img, std::size_t width, std::size_t height,
             ResizeMode mode = ResizeMode::Auto);

// Same resampling on a raw interleaved buffer (values unconstrained, no clamping).
std::vector<double> resample(std::span<const double> src, std::size_t in_w, std::size_t in_h,
                             std::size_t channels, std::size_t width, std::size_t height,
                             ResizeMode mode = ResizeMode::Auto);

// Mean filter with clamp-to-edge borders. Throws EvenKernel for even or zero size.
Image box_blur(const Image& img, std::size_t kernel);

// Per-algorithm pipeline constants.
struct AlgorithmParams {
    std::size_t resize_width;
    std::size_t resize_height;
    std::size_t blur_kernel;   // 0 = no blur
    std::size_t dct_a;         // 0-based kept range, only for DCT algorithms
    std::size_t dct_b;
};

AlgorithmParams params_for(HashAlgorithm algo) noexcept;

// Cached, shared DCT map for pHash (32, 1, 8) or PDQ-lite (64, 1, 16).
const dctlab::DctMap& dct_map_for(HashAlgorithm algo);

// (M X M^T)[a..b, a..b] flattened row-major, for a single-channel k x k image.
// Throws ShapeMismatch on a non-square, multi-channel or wrong-size input.
std::vector<double> dct_features(const Image& img, const dctlab::DctMap& map);

// Median of an even or odd count; mean of the two middle order statistics
// for even counts.
double median(std::vector<double> values);

Hash hash(const Image& img, HashAlgorithm algo);

} // namespace hashbreak::hashkit
