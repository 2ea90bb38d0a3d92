#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "promptpore/errors.hpp"

namespace promptpore {

struct Point {
    int x = 0;
    int y = 0;
    friend bool operator==(const Point&, const Point&) = default;
    friend auto operator<=>(const Point&, const Point&) = default;
};

struct PointF {
    double x = 0.0;
    double y = 0.0;
    friend bool operator==(const PointF&, const PointF&) = default;
};

/// Row-major single-channel 8-bit raster. `Tag` keeps images and masks
/// apart at the type level even though both store bytes.
template <typename Tag>
class Raster {
public:
    using value_type = std::uint8_t;

    Raster() = default;

    Raster(int width, int height, value_type fill = 0)
        : width_(width), height_(height)
    {
        if (width <= 0 || height <= 0)
            throw ArgumentError("raster dimensions must be positive, got " + std::to_string(width) + "x" +
                                std::to_string(height));
        data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), Tag::normalize(fill));
    }

    Raster(int width, int height, std::vector<value_type> data)
        : width_(width), height_(height), data_(std::move(data))
    {
        if (width <= 0 || height <= 0)
            throw ArgumentError("raster dimensions must be positive, got " + std::to_string(width) + "x" +
                                std::to_string(height));
        if (data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
            throw ArgumentError("raster data length " + std::to_string(data_.size()) + " does not match " +
                                std::to_string(width) + "x" + std::to_string(height));
        for (auto& v : data_) v = Tag::normalize(v);
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    bool contains(int x, int y) const noexcept { return x >= 0 && y >= 0 && x < width_ && y < height_; }
    bool contains(Point p) const noexcept { return contains(p.x, p.y); }

    value_type operator()(int x, int y) const noexcept { return data_[index(x, y)]; }
    value_type at(Point p) const noexcept { return data_[index(p.x, p.y)]; }
    void set(int x, int y, value_type v) noexcept { data_[index(x, y)] = Tag::normalize(v); }

    std::span<const value_type> data() const noexcept { return data_; }

    bool same_shape(int w, int h) const noexcept { return w == width_ && h == height_; }
    template <typename Other>
    bool same_shape(const Raster<Other>& o) const noexcept
    {
        return o.width() == width_ && o.height() == height_;
    }

    friend bool operator==(const Raster&, const Raster&) = default;

private:
    std::size_t index(int x, int y) const noexcept
    {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<value_type> data_;
};

struct GrayTag {
    static constexpr std::uint8_t normalize(std::uint8_t v) noexcept { return v; }
};

/// Values are 0 (background) or 1 (foreground); any nonzero input is stored as 1.
struct MaskTag {
    static constexpr std::uint8_t normalize(std::uint8_t v) noexcept { return v ? 1 : 0; }
};

using GrayImage = Raster<GrayTag>;
using BinaryMask = Raster<MaskTag>;

inline std::size_t foreground_count(const BinaryMask& mask)
{
    return static_cast<std::size_t>(std::count(mask.data().begin(), mask.data().end(), std::uint8_t{1}));
}

inline std::vector<Point> foreground_points(const BinaryMask& mask)
{
    std::vector<Point> out;
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x)
            if (mask(x, y)) out.push_back({x, y});
    return out;
}

/// k x k median with edge replication. k must be odd and positive.
inline GrayImage median_filter(const GrayImage& img, int k)
{
    if (k < 1 || k % 2 == 0) throw ArgumentError("median window must be odd and positive, got " + std::to_string(k));
    if (k == 1) return img;
    const int r = k / 2;
    const int w = img.width();
    const int h = img.height();
    std::vector<std::uint8_t> out(img.size());
    std::vector<std::uint8_t> window(static_cast<std::size_t>(k) * static_cast<std::size_t>(k));
    const auto mid = window.begin() + static_cast<std::ptrdiff_t>(window.size() / 2);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            std::size_t n = 0;
            for (int dy = -r; dy <= r; ++dy) {
                const int yy = std::clamp(y + dy, 0, h - 1);
                for (int dx = -r; dx <= r; ++dx) window[n++] = img(std::clamp(x + dx, 0, w - 1), yy);
            }
            std::nth_element(window.begin(), mid, window.end());
            out[static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x)] = *mid;
        }
    }
    return GrayImage(w, h, std::move(out));
}

}  // namespace promptpore
