#pragma once

#include "stripesim/waveform.hpp"

#include <string>
#include <vector>

namespace stripesim {

enum class Orientation { ColumnWise, RowWise };

const char* orientation_name(Orientation o);
Orientation orientation_from_name(const std::string& name);

/// Rolling-shutter capture parameters. Scanline i starts integrating at
/// global_phase + i * scanline_interval and integrates for exposure_s.
struct SensorConfig {
    double exposure_s = 1.0 / 200.0;
    double scanline_interval_s = 1.0 / 75000.0;
    int num_scanlines = 256;
    Orientation orientation = Orientation::ColumnWise;

    void validate() const;  // throws std::invalid_argument
};

/// Per-scanline RGB gain vector. After auto-ISO normalization all gains are
/// in [0, 1] with the maximum equal to 1; a degenerate (never-lit) capture
/// is all zeros. Under ColumnWise orientation scanline index means image
/// column, under RowWise it means image row.
struct StripeField {
    int num_scanlines = 0;
    Orientation orientation = Orientation::ColumnWise;
    std::vector<double> gains;  // num_scanlines * 3, scanline-major

    double gain(int scanline, int channel) const {
        return gains[std::size_t(scanline) * 3 + channel];
    }
    double& gain(int scanline, int channel) {
        return gains[std::size_t(scanline) * 3 + channel];
    }
};

/// Simulates one rolling-shutter capture under the waveform and normalizes
/// it. The all-zero field (LED never on, no ambient) is returned as-is and
/// renders black.
StripeField render_stripe_field(const LedWaveform& w, const SensorConfig& sensor,
                                double global_phase_s);

/// Scales the field so the maximum entry across all scanlines and channels
/// is exactly 1. Throws std::domain_error on an all-zero field.
StripeField normalize_auto_iso(const StripeField& raw);

std::string field_csv_string(const StripeField& field);
void write_field_csv(const StripeField& field, const std::string& path);

}  // namespace stripesim
