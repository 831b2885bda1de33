#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace stripesim {

/// 8-bit RGB raster, row-major, interleaved channels, no alpha.
struct ImageBuffer {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;  // width * height * 3

    static ImageBuffer filled(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b);

    bool empty() const { return width <= 0 || height <= 0; }
    std::size_t pixel_count() const { return std::size_t(width) * std::size_t(height); }

    std::uint8_t* at(int x, int y) {
        return pixels.data() + 3 * (std::size_t(y) * width + x);
    }
    const std::uint8_t* at(int x, int y) const {
        return pixels.data() + 3 * (std::size_t(y) * width + x);
    }

    bool operator==(const ImageBuffer&) const = default;
};

/// Binary foreground mask. 0 = background, everything else = foreground.
struct MaskBuffer {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;  // width * height

    bool foreground(int x, int y) const {
        return data[std::size_t(y) * width + x] != 0;
    }
};

/// Rec.601 luma from 8-bit channels, in [0, 255].
inline double luminance(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    return 0.299 * r + 0.587 * g + 0.114 * b;
}

double mean_luminance(const ImageBuffer& img);

ImageBuffer transpose(const ImageBuffer& img);

ImageBuffer load_png(const std::string& path);
void save_png(const ImageBuffer& img, const std::string& path);

MaskBuffer load_mask_png(const std::string& path);
void save_mask_png(const MaskBuffer& mask, const std::string& path);

}  // namespace stripesim
