#pragma once

namespace stripesim {

struct SensorConfig;

/// One color channel of an ON-OFF keyed LED. The light is at
/// peak_intensity + ambient_intensity during the ON fraction of each
/// period and at ambient_intensity otherwise. Intensities are unitless
/// linear light values; only ratios survive auto-ISO normalization.
struct ChannelWaveform {
    double frequency_hz = 100.0;
    double duty_cycle = 0.5;       // ON fraction of one period
    double phase_s = 0.0;          // offset of the ON edge, reduced mod period
    double peak_intensity = 100.0;
    double ambient_intensity = 0.0;

    double period_s() const { return 1.0 / frequency_hz; }
    double on_duration_s() const { return duty_cycle * period_s(); }

    void validate() const;  // throws std::invalid_argument
};

enum class WaveformKind { Monochromatic, Color };

/// Three-channel LED drive. Monochromatic waveforms share frequency, duty
/// cycle and phase across channels; color waveforms share the duty cycle
/// (so the time-averaged, human-perceived color is steady) and use channel
/// R as the phase reference.
struct LedWaveform {
    ChannelWaveform red;
    ChannelWaveform green;
    ChannelWaveform blue;
    WaveformKind kind = WaveformKind::Monochromatic;

    const ChannelWaveform& channel(int idx) const;
    double max_period_s() const;

    void validate() const;
};

LedWaveform make_monochromatic(double frequency_hz, double duty_cycle,
                               double peak_intensity = 100.0,
                               double ambient_intensity = 0.0);

/// Phase shifts are given as fractions of the red channel period.
LedWaveform make_color(double f_red_hz, double f_green_hz, double f_blue_hz,
                       double duty_cycle, double phase_rg_fraction,
                       double phase_rb_fraction, double peak_intensity = 100.0,
                       double ambient_intensity = 0.0);

/// Sets each channel's ambient intensity to ratio * its peak intensity.
LedWaveform with_ambient_ratio(LedWaveform w, double ratio);

/// Instantaneous illumination intensity at time t. Periodic with the
/// channel period; the boundary point (t - phase) mod period == 0 is OFF
/// except for duty cycle 1, which is always ON.
double intensity_at(const ChannelWaveform& ch, double t_s);

/// Closed-form integral of intensity_at over [t_start, t_start + t_exposure]:
/// whole cycles plus the fractional boundary segments.
double integrate(const ChannelWaveform& ch, double t_start_s, double t_exposure_s);

struct StripeWidths {
    double bright_px = 0.0;
    double dark_px = 0.0;
};

/// Widths of the fully-bright and fully-dark exposure plateaus in scanlines,
/// from the exposure window / flicker period geometry.
StripeWidths predicted_stripe_widths(const ChannelWaveform& ch, const SensorConfig& sensor);

struct Rgb {
    double r = 0.0;
    double g = 0.0;
    double b = 0.0;
};

/// Per-channel time-average of illumination over the window: what a human
/// observer integrates to a steady color. Requires window >= 100 * the
/// slowest channel period.
Rgb perceived_color(const LedWaveform& w, double window_s);

}  // namespace stripesim
