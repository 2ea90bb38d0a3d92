#pragma once

#include <string>
#include <vector>

#include "promptpore/errors.hpp"
#include "promptpore/image.hpp"

namespace promptpore {

struct ComponentLabels {
    std::vector<int> labels;  // row-major; -1 = background, otherwise component id
    int count = 0;
    int width = 0;

    int at(int x, int y) const { return labels[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)]; }
};

/// Connected foreground components under 4- or 8-connectivity, numbered in
/// raster order of their first pixel.
inline ComponentLabels label_components(const BinaryMask& mask, int connectivity = 8)
{
    if (connectivity != 4 && connectivity != 8)
        throw ArgumentError("connectivity must be 4 or 8, got " + std::to_string(connectivity));
    const int w = mask.width();
    const int h = mask.height();
    ComponentLabels out;
    out.width = w;
    out.labels.assign(mask.size(), -1);
    std::vector<Point> stack;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (!mask(x, y) || out.at(x, y) >= 0) continue;
            const int id = out.count++;
            stack.push_back({x, y});
            out.labels[static_cast<std::size_t>(y) * w + x] = id;
            while (!stack.empty()) {
                const Point p = stack.back();
                stack.pop_back();
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        if ((dx == 0 && dy == 0) || (connectivity == 4 && dx != 0 && dy != 0)) continue;
                        const int nx = p.x + dx;
                        const int ny = p.y + dy;
                        if (!mask.contains(nx, ny) || !mask(nx, ny)) continue;
                        auto& l = out.labels[static_cast<std::size_t>(ny) * w + nx];
                        if (l >= 0) continue;
                        l = id;
                        stack.push_back({nx, ny});
                    }
            }
        }
    return out;
}

}  // namespace promptpore
