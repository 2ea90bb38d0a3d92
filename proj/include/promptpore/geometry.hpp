#pragma once

// Conversion between the original image frame and the square model frame:
// the longest side is scaled to kModelSide and the remainder is zero-padded
// on the right/bottom, so the mapping is a pure scale about the origin.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "promptpore/errors.hpp"
#include "promptpore/image.hpp"
#include "promptpore/prompt_set.hpp"

namespace promptpore {

inline constexpr int kModelSide = 1024;

struct ModelInput {
    std::vector<std::uint8_t> pixels;  // interleaved RGB, side * side * 3
    int side = kModelSide;
    double scale = 1.0;  // model pixels per source pixel
    int source_width = 0;
    int source_height = 0;
    int content_width = 0;
    int content_height = 0;
    int pad_x = 0;  // zero columns on the right
    int pad_y = 0;  // zero rows at the bottom

    std::uint8_t channel(int x, int y, int c) const
    {
        return pixels[(static_cast<std::size_t>(y) * static_cast<std::size_t>(side) + static_cast<std::size_t>(x)) * 3 +
                      static_cast<std::size_t>(c)];
    }

    PointF to_model(PointF p) const noexcept { return {p.x * scale, p.y * scale}; }
    PointF to_source(PointF p) const noexcept { return {p.x / scale, p.y / scale}; }

    /// Nearest source pixel of a model-frame coordinate, clamped into the image.
    Point to_source_pixel(PointF p) const noexcept
    {
        const auto s = to_source(p);
        return {std::clamp(static_cast<int>(std::lround(s.x)), 0, source_width - 1),
                std::clamp(static_cast<int>(std::lround(s.y)), 0, source_height - 1)};
    }
};

inline ModelInput to_model_input(const GrayImage& img, int side = kModelSide)
{
    if (img.width() < 1 || img.height() < 1) throw ArgumentError("image must be non-empty");
    if (side < 1) throw ArgumentError("model side must be positive");
    ModelInput in;
    in.side = side;
    in.source_width = img.width();
    in.source_height = img.height();
    in.scale = static_cast<double>(side) / static_cast<double>(std::max(img.width(), img.height()));
    in.content_width = std::clamp(static_cast<int>(std::lround(img.width() * in.scale)), 1, side);
    in.content_height = std::clamp(static_cast<int>(std::lround(img.height() * in.scale)), 1, side);
    in.pad_x = side - in.content_width;
    in.pad_y = side - in.content_height;
    in.pixels.assign(static_cast<std::size_t>(side) * static_cast<std::size_t>(side) * 3, 0);

    const int w = img.width();
    const int h = img.height();
    for (int Y = 0; Y < in.content_height; ++Y) {
        const double sy = std::clamp((Y + 0.5) / in.scale - 0.5, 0.0, static_cast<double>(h - 1));
        const int y0 = static_cast<int>(sy);
        const int y1 = std::min(y0 + 1, h - 1);
        const double fy = sy - y0;
        for (int X = 0; X < in.content_width; ++X) {
            const double sx = std::clamp((X + 0.5) / in.scale - 0.5, 0.0, static_cast<double>(w - 1));
            const int x0 = static_cast<int>(sx);
            const int x1 = std::min(x0 + 1, w - 1);
            const double fx = sx - x0;
            const double top = img(x0, y0) * (1.0 - fx) + img(x1, y0) * fx;
            const double bottom = img(x0, y1) * (1.0 - fx) + img(x1, y1) * fx;
            const auto v = static_cast<std::uint8_t>(std::clamp(std::lround(top * (1.0 - fy) + bottom * fy), 0L, 255L));
            auto* px = &in.pixels[(static_cast<std::size_t>(Y) * static_cast<std::size_t>(side) +
                                   static_cast<std::size_t>(X)) * 3];
            px[0] = px[1] = px[2] = v;
        }
    }
    return in;
}

/// Map prompts into the model frame. Every point must lie inside the source image.
inline ModelPromptSet transform_coords(const PromptSet& prompts, const ModelInput& input)
{
    ModelPromptSet out;
    out.labels = prompts.labels;
    out.source = prompts.source;
    out.seed = prompts.seed;
    out.points.reserve(prompts.points.size());
    for (const auto& p : prompts.points) {
        if (p.x < 0 || p.y < 0 || p.x >= input.source_width || p.y >= input.source_height)
            throw ArgumentError("prompt (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
                                ") lies outside the " + std::to_string(input.source_width) + "x" +
                                std::to_string(input.source_height) + " image");
        out.points.push_back(input.to_model({static_cast<double>(p.x), static_cast<double>(p.y)}));
    }
    return out;
}

/// Nearest-neighbor resample of a model-frame mask back to source resolution.
inline BinaryMask mask_to_source(const BinaryMask& model_mask, const ModelInput& input)
{
    if (!model_mask.same_shape(input.side, input.side))
        throw ArgumentError("model-frame mask must be " + std::to_string(input.side) + "x" +
                            std::to_string(input.side));
    BinaryMask out(input.source_width, input.source_height);
    for (int y = 0; y < input.source_height; ++y) {
        const int my = std::min(static_cast<int>((y + 0.5) * input.scale), input.content_height - 1);
        for (int x = 0; x < input.source_width; ++x) {
            const int mx = std::min(static_cast<int>((x + 0.5) * input.scale), input.content_width - 1);
            out.set(x, y, model_mask(mx, my));
        }
    }
    return out;
}

}  // namespace promptpore
