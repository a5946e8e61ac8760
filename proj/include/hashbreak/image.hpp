#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace hashbreak {

// Real-valued image in [0,1], row-major with interleaved channels (RGB order
// for 3-channel images). Immutable once constructed.
class Image {
public:
    Image() = default;

    // Throws InvalidImage if a value is non-finite or outside [0,1], or if
    // the data length does not match width*height*channels.
    Image(std::size_t width, std::size_t height, std::size_t channels, std::vector<double> data);

    static Image filled(std::size_t width, std::size_t height, std::size_t channels, double value);

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }
    std::size_t channels() const noexcept { return channels_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double at(std::size_t x, std::size_t y, std::size_t c = 0) const noexcept {
        return data_[(y * width_ + x) * channels_ + c];
    }

    std::span<const double> data() const noexcept { return data_; }

    bool same_shape(const Image& other) const noexcept {
        return width_ == other.width_ && height_ == other.height_ && channels_ == other.channels_;
    }

    friend bool operator==(const Image&, const Image&) = default;

private:
    std::size_t width_ = 0;
    std::size_t height_ = 0;
    std::size_t channels_ = 0;
    std::vector<double> data_;
};

// Additive perturbation delta for a given image X, with X + delta in [0,1]^n.
// Only clip_perturbation() and compose-style helpers produce valid instances.
class Perturbation {
public:
    Perturbation() = default;

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }
    std::size_t channels() const noexcept { return channels_; }
    std::size_t size() const noexcept { return data_.size(); }

    std::span<const double> data() const noexcept { return data_; }

    static Perturbation zeros_like(const Image& x);

    friend bool operator==(const Perturbation&, const Perturbation&) = default;

private:
    friend Perturbation clip_perturbation(const Image& x, std::span<const double> raw);

    std::size_t width_ = 0;
    std::size_t height_ = 0;
    std::size_t channels_ = 0;
    std::vector<double> data_;
};

enum class Norm { L1, L2, Linf };

// Standard p-norm. Linf is max |v_i|.
double lp_norm(std::span<const double> v, Norm p);

// (1/n sum |v_i|^p)^(1/p), i.e. lp_norm(v, p) / n^(1/p). Throws EmptyInput.
double lp_per_pixel(std::span<const double> v, Norm p);

// n^(1/p); 1 for Linf.
double norm_scale(std::size_t n, Norm p);

// Returns min(max(X + raw, 0), 1) - X. Throws ShapeMismatch when sizes differ.
Perturbation clip_perturbation(const Image& x, std::span<const double> raw);

// X + delta, clamped to [0,1] against rounding.
Image apply_perturbation(const Image& x, const Perturbation& delta);

// Elementwise clamp(base + delta, 0, 1) for raw buffers of equal length.
Image compose(const Image& base, std::span<const double> delta);

// True iff every base_i + delta_i lies in [0,1].
bool within_bounds(std::span<const double> base, std::span<const double> delta) noexcept;

} // namespace hashbreak
