#include "hashbreak/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <memory>
#include <string>

#include "hashbreak/errors.hpp"

namespace hashbreak {
namespace {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("read failed: " + path.string());
    return bytes;
}

// Temp file plus rename, so a reader never sees a half-written image.
void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot create " + tmp.string());
        out.write(reinterpret_cast<const char*>(bytes.data()),
                  static_cast<std::streamsize>(bytes.size()));
        if (!out) throw IoError("write failed: " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot move " + tmp.string() + " into place: " + ec.message());
}

Image from_bytes(std::size_t w, std::size_t h, std::size_t ch, const std::uint8_t* px) {
    std::vector<double> data(w * h * ch);
    for (std::size_t i = 0; i < data.size(); ++i) data[i] = px[i] / 255.0;
    return Image(w, h, ch, std::move(data));
}

// ---- PNM -----------------------------------------------------------------

Image decode_pnm(const std::vector<std::uint8_t>& bytes) {
    std::size_t pos = 2;
    const bool color = bytes[1] == '6';
    auto next_token = [&]() -> long {
        for (;;) {
            while (pos < bytes.size() && std::isspace(bytes[pos])) ++pos;
            if (pos < bytes.size() && bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
                continue;
            }
            break;
        }
        if (pos >= bytes.size() || !std::isdigit(bytes[pos])) {
            throw DecodeError("malformed PNM header");
        }
        long v = 0;
        while (pos < bytes.size() && std::isdigit(bytes[pos])) {
            v = v * 10 + (bytes[pos] - '0');
            if (v > (1L << 24)) throw DecodeError("PNM header value too large");
            ++pos;
        }
        return v;
    };
    const long w = next_token();
    const long h = next_token();
    const long maxval = next_token();
    if (maxval != 255) throw UnsupportedFormat("only PNM maxval 255 is supported");
    if (w <= 0 || h <= 0) throw DecodeError("PNM with empty dimensions");
    if (pos >= bytes.size() || !std::isspace(bytes[pos])) throw DecodeError("malformed PNM header");
    ++pos;
    const std::size_t ch = color ? 3 : 1;
    const std::size_t need = static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * ch;
    if (bytes.size() - pos < need) throw DecodeError("truncated PNM pixel data");
    return from_bytes(static_cast<std::size_t>(w), static_cast<std::size_t>(h), ch,
                      bytes.data() + pos);
}

std::vector<std::uint8_t> encode_pnm(const Image& img) {
    const std::string header = std::string(img.channels() == 3 ? "P6" : "P5") + "\n" +
                               std::to_string(img.width()) + " " +
                               std::to_string(img.height()) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    const auto px = quantize_8bit(img);
    out.insert(out.end(), px.begin(), px.end());
    return out;
}

// ---- PNG -----------------------------------------------------------------

struct PngReadCursor {
    const std::vector<std::uint8_t>* bytes;
    std::size_t pos;
};

void png_read_from_memory(png_structp png, png_bytep out, png_size_t count) {
    auto* cur = static_cast<PngReadCursor*>(png_get_io_ptr(png));
    if (cur->bytes->size() - cur->pos < count) png_error(png, "truncated PNG stream");
    std::memcpy(out, cur->bytes->data() + cur->pos, count);
    cur->pos += count;
}

void png_write_to_memory(png_structp png, png_bytep data, png_size_t count) {
    auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
    out->insert(out->end(), data, data + count);
}

void png_flush_noop(png_structp) {}

[[noreturn]] void png_throw(png_structp png, png_const_charp msg) {
    auto* err = static_cast<std::string*>(png_get_error_ptr(png));
    *err = msg;
    png_longjmp(png, 1);
}

void png_warn_silent(png_structp, png_const_charp) {}

bool has_suffix(const std::filesystem::path& path, std::string_view ext) {
    std::string e = path.extension().string();
    std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return std::tolower(c); });
    return e == ext;
}

// State written between setjmp and a possible longjmp lives on the heap and
// is filled by a separate frame, so the jump cannot clobber it.
struct PngState {
    std::vector<std::uint8_t> pixels;
    std::vector<png_bytep> rows;
    png_uint_32 w = 0, h = 0;
    int channels = 0;
    int unsupported = 0; // 1 = 16-bit, 2 = alpha
};

[[gnu::noinline]] void read_png_body(png_structp png, png_infop info, PngReadCursor* cursor,
                                     PngState* st) {
    png_set_read_fn(png, cursor, png_read_from_memory);
    png_read_info(png, info);
    st->w = png_get_image_width(png, info);
    st->h = png_get_image_height(png, info);
    const int depth = png_get_bit_depth(png, info);
    const int color = png_get_color_type(png, info);
    if (depth == 16) {
        st->unsupported = 1;
    } else if ((color & PNG_COLOR_MASK_ALPHA) || png_get_valid(png, info, PNG_INFO_tRNS)) {
        st->unsupported = 2;
    } else {
        if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
        if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
        png_set_interlace_handling(png);
        png_read_update_info(png, info);
        st->channels = png_get_channels(png, info);
        const std::size_t stride = png_get_rowbytes(png, info);
        st->pixels.resize(stride * st->h);
        st->rows.resize(st->h);
        for (png_uint_32 y = 0; y < st->h; ++y) st->rows[y] = st->pixels.data() + y * stride;
        png_read_image(png, st->rows.data());
        png_read_end(png, nullptr);
    }
}

} // namespace

std::vector<std::uint8_t> quantize_8bit(const Image& img) {
    std::vector<std::uint8_t> out(img.size());
    const auto d = img.data();
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = static_cast<std::uint8_t>(std::lround(d[i] * 255.0));
    }
    return out;
}

Image decode_png(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
        throw DecodeError("not a PNG stream");
    }
    std::string err;
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &err, png_throw, png_warn_silent);
    if (!png) throw DecodeError("libpng init failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw DecodeError("libpng init failed");
    }

    PngReadCursor cursor{&bytes, 0};
    auto state = std::make_unique<PngState>();
    PngState* const st = state.get();

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw DecodeError("PNG decode failed: " + err);
    }
    read_png_body(png, info, &cursor, st);
    png_destroy_read_struct(&png, &info, nullptr);

    if (st->unsupported == 1) throw UnsupportedFormat("16-bit PNG is not supported");
    if (st->unsupported == 2) throw UnsupportedFormat("PNG with alpha channel is not supported");
    if (st->channels != 1 && st->channels != 3) throw UnsupportedFormat("unexpected PNG channel count");
    return from_bytes(st->w, st->h, static_cast<std::size_t>(st->channels), st->pixels.data());
}

struct PngWriteState {
    std::vector<std::uint8_t> px;
    std::vector<png_const_bytep> rows;
    std::vector<std::uint8_t> out;
};

[[gnu::noinline]] void write_png_body(png_structp png, png_infop info, const Image& img,
                                      PngWriteState* st) {
    st->px = quantize_8bit(img);
    st->rows.resize(img.height());
    const std::size_t stride = img.width() * img.channels();
    for (std::size_t y = 0; y < img.height(); ++y) st->rows[y] = st->px.data() + y * stride;
    png_set_write_fn(png, &st->out, png_write_to_memory, png_flush_noop);
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width()),
                 static_cast<png_uint_32>(img.height()), 8,
                 img.channels() == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_rows(png, const_cast<png_bytepp>(st->rows.data()), static_cast<png_uint_32>(st->rows.size()));
    png_write_end(png, info);
}

std::vector<std::uint8_t> encode_png(const Image& img) {
    if (img.empty()) throw InvalidImage("cannot encode an empty image");
    std::string err;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &err, png_throw, png_warn_silent);
    if (!png) throw IoError("libpng init failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw IoError("libpng init failed");
    }
    auto state = std::make_unique<PngWriteState>();
    PngWriteState* const st = state.get();

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("PNG encode failed: " + err);
    }
    write_png_body(png, info, img, st);
    png_destroy_write_struct(&png, &info);
    return std::move(st->out);
}

Image load_image(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    if (bytes.size() >= 8 && png_sig_cmp(bytes.data(), 0, 8) == 0) return decode_png(bytes);
    if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '6')) {
        return decode_pnm(bytes);
    }
    throw UnsupportedFormat("unrecognized image format: " + path.string());
}

void save_image(const Image& img, const std::filesystem::path& path) {
    if (has_suffix(path, ".png")) {
        write_file(path, encode_png(img));
    } else if (has_suffix(path, ".pgm") || has_suffix(path, ".ppm") || has_suffix(path, ".pnm")) {
        if (has_suffix(path, ".pgm") && img.channels() != 1) {
            throw UnsupportedFormat("PGM output needs a single-channel image");
        }
        if (has_suffix(path, ".ppm") && img.channels() != 3) {
            throw UnsupportedFormat("PPM output needs a three-channel image");
        }
        write_file(path, encode_pnm(img));
    } else {
        throw UnsupportedFormat("unsupported output extension: " + path.string());
    }
}

} // namespace hashbreak
