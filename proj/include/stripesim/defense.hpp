#pragma once

#include "stripesim/harness.hpp"
#include "stripesim/image.hpp"
#include "stripesim/sensor.hpp"

#include <optional>
#include <string>
#include <vector>

namespace stripesim {

/// Dominant periodic component of the per-scanline mean luminance.
/// peak_energy_db is the dominant non-DC bin's energy relative to the total
/// non-DC energy, floored at kSpectrumFloorDb when there is nothing above
/// numerical noise.
struct StripeSpectrum {
    Orientation orientation = Orientation::ColumnWise;
    double dominant_freq_cycles_per_scanline = 0.0;
    double peak_energy_db = 0.0;
};

inline constexpr double kSpectrumFloorDb = -300.0;

/// Per-bin energies (k = 0..N/2) of the mean-luminance profile along the
/// scanline axis. Shared by detection, destriping and the tests that
/// measure stripe suppression.
std::vector<double> scanline_profile_spectrum(const ImageBuffer& img, Orientation orientation);

StripeSpectrum detect_stripes(const ImageBuffer& img, Orientation orientation);

// Destriping knobs: non-DC bins of the per-channel scanline-mean profile
// are notched when their energy exceeds kDestripeMedianFactor times the
// median non-DC bin energy, they reconstruct to at least
// kDestripeMinAmplitude gray levels peak (sub-quantization components are
// left alone), and they lie at or above kDestripeMinCycles cycles per
// image (slower variation is indistinguishable from scene illumination).
inline constexpr double kDestripeMedianFactor = 5.0;
inline constexpr double kDestripeMinAmplitude = 0.5;
inline constexpr int kDestripeMinCycles = 3;

/// Subtracts the notched periodic profile from every scanline, per channel,
/// then clamps and quantizes. Deterministic; a constant image passes
/// through unchanged.
ImageBuffer destripe(const ImageBuffer& img, Orientation orientation);

struct DefenseReport {
    std::optional<double> victim_success_before;
    std::optional<double> victim_success_after;
    std::optional<double> attack_success_before;
    std::optional<double> attack_success_after;
};

/// Runs the verification protocol on raw injected images and on destriped
/// injected images, reporting both arms.
DefenseReport evaluate_defense(const PairSet& pairs, const LedWaveform& omega,
                               const OracleBinding& oracle, const SensorConfig& sensor,
                               int attempts = 3);

std::string defense_csv_string(const DefenseReport& report);
void write_defense_csv(const DefenseReport& report, const std::string& path);
std::string defense_table_string(const DefenseReport& report);

}  // namespace stripesim
