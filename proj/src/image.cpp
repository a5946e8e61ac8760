#include "hashbreak/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hashbreak/errors.hpp"

namespace hashbreak {

Image::Image(std::size_t width, std::size_t height, std::size_t channels, std::vector<double> data)
    : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
    if (channels_ != 1 && channels_ != 3) {
        throw InvalidImage("image must have 1 or 3 channels, got " + std::to_string(channels_));
    }
    if (data_.size() != width_ * height_ * channels_) {
        throw InvalidImage("image data length " + std::to_string(data_.size()) +
                           " does not match " + std::to_string(width_) + "x" +
                           std::to_string(height_) + "x" + std::to_string(channels_));
    }
    for (double v : data_) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw InvalidImage("image value outside [0,1]: " + std::to_string(v));
        }
    }
}

Image Image::filled(std::size_t width, std::size_t height, std::size_t channels, double value) {
    return Image(width, height, channels, std::vector<double>(width * height * channels, value));
}

Perturbation Perturbation::zeros_like(const Image& x) {
    Perturbation d;
    d.width_ = x.width();
    d.height_ = x.height();
    d.channels_ = x.channels();
    d.data_.assign(x.size(), 0.0);
    return d;
}

double lp_norm(std::span<const double> v, Norm p) {
    switch (p) {
    case Norm::L1: {
        double s = 0.0;
        for (double x : v) s += std::abs(x);
        return s;
    }
    case Norm::L2: {
        double s = 0.0;
        for (double x : v) s += x * x;
        return std::sqrt(s);
    }
    case Norm::Linf: {
        double m = 0.0;
        for (double x : v) m = std::max(m, std::abs(x));
        return m;
    }
    }
    return 0.0;
}

double norm_scale(std::size_t n, Norm p) {
    switch (p) {
    case Norm::L1: return static_cast<double>(n);
    case Norm::L2: return std::sqrt(static_cast<double>(n));
    case Norm::Linf: return 1.0;
    }
    return 1.0;
}

double lp_per_pixel(std::span<const double> v, Norm p) {
    if (v.empty()) throw EmptyInput("lp_per_pixel of an empty vector");
    return lp_norm(v, p) / norm_scale(v.size(), p);
}

// Elements already inside the box are kept bit-exact so the operation is
// idempotent and leaves valid perturbations untouched.
Perturbation clip_perturbation(const Image& x, std::span<const double> raw) {
    if (raw.size() != x.size()) {
        throw ShapeMismatch("perturbation length " + std::to_string(raw.size()) +
                            " does not match image size " + std::to_string(x.size()));
    }
    Perturbation d;
    d.width_ = x.width();
    d.height_ = x.height();
    d.channels_ = x.channels();
    d.data_.resize(raw.size());
    const auto xs = x.data();
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const double v = xs[i] + raw[i];
        if (v >= 0.0 && v <= 1.0) {
            d.data_[i] = raw[i];
        } else if (v > 1.0) {
            d.data_[i] = 1.0 - xs[i];
        } else {
            // also catches NaN
            d.data_[i] = -xs[i];
        }
    }
    return d;
}

Image compose(const Image& base, std::span<const double> delta) {
    if (delta.size() != base.size()) {
        throw ShapeMismatch("perturbation length does not match image size");
    }
    std::vector<double> out(base.size());
    const auto xs = base.data();
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = std::clamp(xs[i] + delta[i], 0.0, 1.0);
    }
    return Image(base.width(), base.height(), base.channels(), std::move(out));
}

Image apply_perturbation(const Image& x, const Perturbation& delta) {
    return compose(x, delta.data());
}

bool within_bounds(std::span<const double> base, std::span<const double> delta) noexcept {
    if (base.size() != delta.size()) return false;
    for (std::size_t i = 0; i < base.size(); ++i) {
        const double v = base[i] + delta[i];
        if (!(v >= 0.0 && v <= 1.0)) return false;
    }
    return true;
}

} // namespace hashbreak
