#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "hashbreak/image.hpp"

namespace hashbreak {

enum class ImageFormat { Png, Pgm, Ppm };

// Loads an 8-bit PNG or binary PNM (P5/P6, maxval 255). Byte u maps to u/255.
// Throws IoError, UnsupportedFormat or DecodeError.
Image load_image(const std::filesystem::path& path);

// Writes an 8-bit file, rounding each value to the nearest of 256 levels.
// The format follows the extension (.png, .pgm, .ppm, .pnm); PGM requires a
// single-channel image and PPM a three-channel one.
void save_image(const Image& img, const std::filesystem::path& path);

// Encodes to an in-memory 8-bit PNG (grayscale or RGB).
std::vector<std::uint8_t> encode_png(const Image& img);
Image decode_png(const std::vector<std::uint8_t>& bytes);

std::vector<std::uint8_t> quantize_8bit(const Image& img);

} // namespace hashbreak
