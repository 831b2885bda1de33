#include "stripesim/trigger.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stripesim {

namespace {

std::uint8_t quantize(double v) {
    double clamped = std::clamp(v, 0.0, 255.0);
    return std::uint8_t(std::lround(clamped));  // round half away from zero
}

}  // namespace

ImageBuffer inject_trigger(const ImageBuffer& img, const TriggerSpec& spec) {
    if (img.empty()) throw std::invalid_argument("inject_trigger: empty image");
    if (spec.mask && (spec.mask->width != img.width || spec.mask->height != img.height)) {
        throw std::invalid_argument("inject_trigger: mask dimensions do not match image");
    }

    const bool column_wise = spec.sensor.orientation == Orientation::ColumnWise;
    SensorConfig sensor = spec.sensor;
    sensor.num_scanlines = column_wise ? img.width : img.height;
    StripeField field = render_stripe_field(spec.waveform, sensor, spec.global_phase_s);

    // Pass 1: gain per pixel, accumulating masked-region luminance sums.
    std::vector<double> scaled(img.pixels.size());
    double lum_in = 0.0;
    double lum_scaled = 0.0;
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            std::size_t idx = 3 * (std::size_t(y) * img.width + x);
            if (spec.mask && !spec.mask->foreground(x, y)) continue;
            int scanline = column_wise ? x : y;
            double r = img.pixels[idx] * field.gain(scanline, 0);
            double g = img.pixels[idx + 1] * field.gain(scanline, 1);
            double b = img.pixels[idx + 2] * field.gain(scanline, 2);
            scaled[idx] = r;
            scaled[idx + 1] = g;
            scaled[idx + 2] = b;
            lum_in += luminance(img.pixels[idx], img.pixels[idx + 1], img.pixels[idx + 2]);
            lum_scaled += 0.299 * r + 0.587 * g + 0.114 * b;
        }
    }

    // Image-level auto ISO: restore the region's mean luminance. A black
    // (degenerate) result stays black.
    double rescale = lum_scaled > 0.0 ? lum_in / lum_scaled : 1.0;

    ImageBuffer out = img;
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            if (spec.mask && !spec.mask->foreground(x, y)) continue;
            std::size_t idx = 3 * (std::size_t(y) * img.width + x);
            out.pixels[idx] = quantize(scaled[idx] * rescale);
            out.pixels[idx + 1] = quantize(scaled[idx + 1] * rescale);
            out.pixels[idx + 2] = quantize(scaled[idx + 2] * rescale);
        }
    }
    return out;
}

std::vector<double> attempt_phases(int n, double period_red_s) {
    if (n < 1) throw std::invalid_argument("attempt_phases: need at least one attempt");
    if (!(period_red_s > 0.0)) throw std::invalid_argument("attempt_phases: period must be positive");
    std::vector<double> phases(n);
    for (int k = 0; k < n; ++k) phases[k] = double(k) * period_red_s / double(n);
    return phases;
}

ImageBuffer scale_face(const ImageBuffer& img, double factor) {
    if (img.empty()) throw std::invalid_argument("scale_face: empty image");
    if (!(factor >= 0.8 && factor <= 1.2)) {
        throw std::invalid_argument("scale_face: factor must be in [0.8, 1.2]");
    }
    if (factor == 1.0) return img;

    ImageBuffer out = img;
    double cx = (img.width - 1) / 2.0;
    double cy = (img.height - 1) / 2.0;
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            // Inverse map about the center; clamp-to-edge beyond the borders.
            double sx = cx + (x - cx) / factor;
            double sy = cy + (y - cy) / factor;
            sx = std::clamp(sx, 0.0, double(img.width - 1));
            sy = std::clamp(sy, 0.0, double(img.height - 1));
            int x0 = int(sx);
            int y0 = int(sy);
            int x1 = std::min(x0 + 1, img.width - 1);
            int y1 = std::min(y0 + 1, img.height - 1);
            double fx = sx - x0;
            double fy = sy - y0;
            const std::uint8_t* p00 = img.at(x0, y0);
            const std::uint8_t* p10 = img.at(x1, y0);
            const std::uint8_t* p01 = img.at(x0, y1);
            const std::uint8_t* p11 = img.at(x1, y1);
            std::uint8_t* dst = out.at(x, y);
            for (int c = 0; c < 3; ++c) {
                double top = p00[c] * (1.0 - fx) + p10[c] * fx;
                double bottom = p01[c] * (1.0 - fx) + p11[c] * fx;
                dst[c] = quantize(top * (1.0 - fy) + bottom * fy);
            }
        }
    }
    return out;
}

}  // namespace stripesim
