#pragma once

#include "stripesim/image.hpp"
#include "stripesim/sensor.hpp"

#include <optional>
#include <vector>

namespace stripesim {

/// Everything needed to stamp a stripe pattern onto an image. The scanline
/// count of the rendered field is taken from the image dimension along the
/// scanline axis, not from sensor.num_scanlines. When a mask is present,
/// only foreground pixels are touched.
struct TriggerSpec {
    LedWaveform waveform;
    SensorConfig sensor;
    double global_phase_s = 0.0;
    std::optional<MaskBuffer> mask;
};

/// Multiplies each pixel by its scanline gain, rescales so the mean
/// luminance of the (masked) region matches the input, then clamps and
/// quantizes (round half away from zero). Deterministic, fixed-order
/// arithmetic.
ImageBuffer inject_trigger(const ImageBuffer& img, const TriggerSpec& spec);

/// n phases evenly spaced over one channel-R period: k * period / n.
std::vector<double> attempt_phases(int n, double period_red_s);

/// Bilinear rescale about the image center, cropped/padded back to the
/// original dimensions with clamp-to-edge sampling. factor must be in
/// [0.8, 1.2]; factor 1 is the identity.
ImageBuffer scale_face(const ImageBuffer& img, double factor);

}  // namespace stripesim
