#include "stripesim/image.hpp"

#include <png.h>

#include <cstdio>
#include <memory>
#include <stdexcept>

namespace stripesim {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void fail(const std::string& what, const std::string& path) {
    throw std::runtime_error(what + ": " + path);
}

}  // namespace

ImageBuffer ImageBuffer::filled(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    if (w <= 0 || h <= 0) throw std::invalid_argument("ImageBuffer::filled: non-positive size");
    ImageBuffer img;
    img.width = w;
    img.height = h;
    img.pixels.resize(std::size_t(w) * h * 3);
    for (std::size_t i = 0; i < img.pixels.size(); i += 3) {
        img.pixels[i] = r;
        img.pixels[i + 1] = g;
        img.pixels[i + 2] = b;
    }
    return img;
}

double mean_luminance(const ImageBuffer& img) {
    if (img.empty()) throw std::invalid_argument("mean_luminance: empty image");
    double sum = 0.0;
    for (std::size_t i = 0; i < img.pixels.size(); i += 3) {
        sum += luminance(img.pixels[i], img.pixels[i + 1], img.pixels[i + 2]);
    }
    return sum / double(img.pixel_count());
}

ImageBuffer transpose(const ImageBuffer& img) {
    ImageBuffer out;
    out.width = img.height;
    out.height = img.width;
    out.pixels.resize(img.pixels.size());
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const std::uint8_t* src = img.at(x, y);
            std::uint8_t* dst = out.at(y, x);
            dst[0] = src[0];
            dst[1] = src[1];
            dst[2] = src[2];
        }
    }
    return out;
}

ImageBuffer load_png(const std::string& path) {
    FilePtr file(std::fopen(path.c_str(), "rb"));
    if (!file) fail("cannot open PNG", path);

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw std::runtime_error("png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw std::runtime_error("png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail("failed reading PNG", path);
    }

    png_init_io(png, file.get());
    png_read_info(png, info);

    // Normalize every input to 8-bit RGB.
    png_set_palette_to_rgb(png);
    png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (png_get_bit_depth(png, info) == 16) png_set_strip_16(png);
    png_set_strip_alpha(png);
    png_set_gray_to_rgb(png);
    png_read_update_info(png, info);

    ImageBuffer img;
    img.width = int(png_get_image_width(png, info));
    img.height = int(png_get_image_height(png, info));
    img.pixels.resize(std::size_t(img.width) * img.height * 3);

    std::vector<png_bytep> rows(img.height);
    for (int y = 0; y < img.height; ++y) rows[y] = img.pixels.data() + std::size_t(y) * img.width * 3;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

void save_png(const ImageBuffer& img, const std::string& path) {
    if (img.empty()) throw std::invalid_argument("save_png: empty image");
    FilePtr file(std::fopen(path.c_str(), "wb"));
    if (!file) fail("cannot create PNG", path);

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw std::runtime_error("png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw std::runtime_error("png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        fail("failed writing PNG", path);
    }

    png_init_io(png, file.get());
    png_set_IHDR(png, info, png_uint_32(img.width), png_uint_32(img.height), 8,
                 PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::vector<png_bytep> rows(img.height);
    for (int y = 0; y < img.height; ++y) {
        rows[y] = const_cast<png_bytep>(img.pixels.data() + std::size_t(y) * img.width * 3);
    }
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

MaskBuffer load_mask_png(const std::string& path) {
    ImageBuffer rgb = load_png(path);
    MaskBuffer mask;
    mask.width = rgb.width;
    mask.height = rgb.height;
    mask.data.resize(rgb.pixel_count());
    for (std::size_t i = 0; i < mask.data.size(); ++i) {
        double lum = luminance(rgb.pixels[3 * i], rgb.pixels[3 * i + 1], rgb.pixels[3 * i + 2]);
        mask.data[i] = lum > 127.0 ? 255 : 0;
    }
    return mask;
}

void save_mask_png(const MaskBuffer& mask, const std::string& path) {
    ImageBuffer rgb;
    rgb.width = mask.width;
    rgb.height = mask.height;
    rgb.pixels.resize(mask.data.size() * 3);
    for (std::size_t i = 0; i < mask.data.size(); ++i) {
        std::uint8_t v = mask.data[i] ? 255 : 0;
        rgb.pixels[3 * i] = v;
        rgb.pixels[3 * i + 1] = v;
        rgb.pixels[3 * i + 2] = v;
    }
    save_png(rgb, path);
}

}  // namespace stripesim
