#pragma once

// PNG reading and writing through libpng's simplified API.

#include <png.h>

#include <array>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "promptpore/errors.hpp"
#include "promptpore/image.hpp"

namespace promptpore {

namespace detail {

struct PngImage {
    png_image image{};
    PngImage()
    {
        image.version = PNG_IMAGE_VERSION;
    }
    ~PngImage() { png_image_free(&image); }
    PngImage(const PngImage&) = delete;
    PngImage& operator=(const PngImage&) = delete;
};

inline bool has_png_signature(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    std::array<unsigned char, 8> sig{};
    in.read(reinterpret_cast<char*>(sig.data()), sig.size());
    return in.gcount() == 8 && png_sig_cmp(sig.data(), 0, 8) == 0;
}

inline void write_png(const std::filesystem::path& path, int width, int height, png_uint_32 format,
                      const std::uint8_t* pixels)
{
    PngImage png;
    png.image.width = static_cast<png_uint_32>(width);
    png.image.height = static_cast<png_uint_32>(height);
    png.image.format = format;
    if (!png_image_write_to_file(&png.image, path.string().c_str(), 0, pixels, 0, nullptr))
        throw IoError("cannot write PNG '" + path.string() + "': " + png.image.message);
}

}  // namespace detail

/// Load an 8-bit grayscale or RGB(A) PNG as gray. Color pixels become the
/// channel mean rounded half up; alpha is ignored.
inline GrayImage load_gray(const std::filesystem::path& path)
{
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec)) throw IoError("cannot read image '" + path.string() + "'");
    detail::PngImage png;
    if (!png_image_begin_read_from_file(&png.image, path.string().c_str())) {
        if (!detail::has_png_signature(path))
            throw FormatError("'" + path.string() + "' is not a PNG file");
        throw IoError("cannot read PNG '" + path.string() + "': " + png.image.message);
    }
    const png_uint_32 src = png.image.format;
    if (src & PNG_FORMAT_FLAG_LINEAR)
        throw FormatError("'" + path.string() + "' has 16-bit samples; only 8-bit images are supported");
    if (src & PNG_FORMAT_FLAG_COLORMAP)
        throw FormatError("'" + path.string() + "' is palette-indexed; only gray or RGB images are supported");

    const bool color = (src & PNG_FORMAT_FLAG_COLOR) != 0;
    const bool alpha = (src & PNG_FORMAT_FLAG_ALPHA) != 0;
    png.image.format = color ? (alpha ? PNG_FORMAT_RGBA : PNG_FORMAT_RGB) : (alpha ? PNG_FORMAT_GA : PNG_FORMAT_GRAY);
    const int width = static_cast<int>(png.image.width);
    const int height = static_cast<int>(png.image.height);
    std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(png.image));
    if (!png_image_finish_read(&png.image, nullptr, buffer.data(), 0, nullptr))
        throw IoError("cannot decode PNG '" + path.string() + "': " + png.image.message);

    const std::size_t channels = PNG_IMAGE_PIXEL_CHANNELS(png.image.format);
    std::vector<std::uint8_t> gray(static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
    for (std::size_t i = 0; i < gray.size(); ++i) {
        const std::uint8_t* px = &buffer[i * channels];
        if (color) {
            const unsigned sum = unsigned{px[0]} + px[1] + px[2];
            // Exact thirds are never halfway, so (sum + 1) / 3 is round-half-up.
            gray[i] = static_cast<std::uint8_t>((sum + 1) / 3);
        } else {
            gray[i] = px[0];
        }
    }
    return GrayImage(width, height, std::move(gray));
}

inline void save_gray(const GrayImage& img, const std::filesystem::path& path)
{
    detail::write_png(path, img.width(), img.height(), PNG_FORMAT_GRAY, img.data().data());
}

/// Masks are stored as gray PNGs with 255 = foreground.
inline void save_mask(const BinaryMask& mask, const std::filesystem::path& path)
{
    std::vector<std::uint8_t> px(mask.size());
    for (std::size_t i = 0; i < px.size(); ++i) px[i] = mask.data()[i] ? 255 : 0;
    detail::write_png(path, mask.width(), mask.height(), PNG_FORMAT_GRAY, px.data());
}

/// Any nonzero pixel is foreground.
inline BinaryMask load_mask(const std::filesystem::path& path)
{
    const GrayImage g = load_gray(path);
    return BinaryMask(g.width(), g.height(), std::vector<std::uint8_t>(g.data().begin(), g.data().end()));
}

/// Interleaved 8-bit RGB, used for model-frame images.
inline void save_rgb(int width, int height, const std::vector<std::uint8_t>& rgb, const std::filesystem::path& path)
{
    if (rgb.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3)
        throw ArgumentError("RGB buffer size does not match dimensions");
    detail::write_png(path, width, height, PNG_FORMAT_RGB, rgb.data());
}

}  // namespace promptpore
