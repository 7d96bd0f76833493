#ifndef HYPERBOX_RENDER_HPP
#define HYPERBOX_RENDER_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "hyperbox/boxchain.hpp"

namespace hyperbox {

struct GrayImage {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::vector<std::uint8_t> pixels;  // row-major, top row = largest imaginary part

    std::uint8_t at(std::uint32_t x, std::uint32_t y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

inline constexpr std::uint8_t kBackground = 255;
inline constexpr std::uint8_t kPlainFill = 0;
inline constexpr std::uint8_t kMidGray = 128;
inline constexpr std::uint32_t kDefaultMaxPixels = 2048;

// Raster of the union of boxes. With handicaps, each box is shaded by
// log(phi) on a ramp from 0 (smallest handicap, darkest) to 254; without,
// every box gets a uniform fill. Resolution follows the finest box depth,
// capped at max_pixels per side.
inline GrayImage render(const std::vector<BoxId>& boxes, const std::vector<double>* phi,
                        std::uint32_t max_pixels = kDefaultMaxPixels) {
    GrayImage img;
    std::uint32_t finest = 0;
    for (const auto& b : boxes) finest = std::max(finest, b.depth);
    const std::uint64_t native = std::uint64_t{1} << finest;
    const auto res = static_cast<std::uint32_t>(std::min<std::uint64_t>(native, std::max(1u, max_pixels)));
    img.width = img.height = boxes.empty() ? 1 : res;
    img.pixels.assign(static_cast<std::size_t>(img.width) * img.height, kBackground);
    if (boxes.empty()) return img;

    double lo = 0.0, hi = 0.0;
    if (phi) {
        lo = std::log(*std::min_element(phi->begin(), phi->end()));
        hi = std::log(*std::max_element(phi->begin(), phi->end()));
    }
    for (std::size_t v = 0; v < boxes.size(); ++v) {
        std::uint8_t shade = kPlainFill;
        if (phi) {
            if (hi > lo) {
                const double t = (std::log((*phi)[v]) - lo) / (hi - lo);
                shade = static_cast<std::uint8_t>(std::lround(std::clamp(t, 0.0, 1.0) * 254.0));
            } else {
                shade = kMidGray;
            }
        }
        const auto& b = boxes[v];
        const std::uint64_t cells = std::uint64_t{1} << b.depth;
        // Pixel span of the box; boxes smaller than a pixel still paint one.
        auto span = [&](std::uint32_t k) {
            const auto p0 = static_cast<std::uint32_t>(k * std::uint64_t{res} / cells);
            auto p1 = static_cast<std::uint32_t>((k + 1) * std::uint64_t{res} / cells);
            return std::pair(p0, std::max(p1, p0 + 1));
        };
        const auto [x0, x1] = span(b.i);
        const auto [y0, y1] = span(b.j);
        for (std::uint32_t y = y0; y < y1 && y < res; ++y) {
            const std::uint32_t row = res - 1 - y;
            for (std::uint32_t x = x0; x < x1 && x < res; ++x) img.pixels[static_cast<std::size_t>(row) * res + x] = shade;
        }
    }
    return img;
}

// Binary portable graymap (P5).
inline void write_pgm(std::ostream& os, const GrayImage& img) {
    os << "P5\n" << img.width << ' ' << img.height << "\n255\n";
    os.write(reinterpret_cast<const char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
}

} // namespace hyperbox

#endif
