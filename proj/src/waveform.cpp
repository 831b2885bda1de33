#include "stripesim/waveform.hpp"

#include "stripesim/sensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stripesim {

void ChannelWaveform::validate() const {
    if (!(frequency_hz > 0.0) || !std::isfinite(frequency_hz)) {
        throw std::invalid_argument("ChannelWaveform: frequency must be positive");
    }
    if (!(duty_cycle >= 0.0 && duty_cycle <= 1.0)) {
        throw std::invalid_argument("ChannelWaveform: duty cycle must be in [0,1]");
    }
    if (!std::isfinite(phase_s)) {
        throw std::invalid_argument("ChannelWaveform: phase must be finite");
    }
    if (!(peak_intensity >= 0.0) || !(ambient_intensity >= 0.0)) {
        throw std::invalid_argument("ChannelWaveform: intensities must be nonnegative");
    }
}

const ChannelWaveform& LedWaveform::channel(int idx) const {
    switch (idx) {
        case 0: return red;
        case 1: return green;
        default: return blue;
    }
}

double LedWaveform::max_period_s() const {
    return std::max({red.period_s(), green.period_s(), blue.period_s()});
}

void LedWaveform::validate() const {
    red.validate();
    green.validate();
    blue.validate();
    if (kind == WaveformKind::Monochromatic) {
        if (red.frequency_hz != green.frequency_hz || red.frequency_hz != blue.frequency_hz ||
            red.duty_cycle != green.duty_cycle || red.duty_cycle != blue.duty_cycle ||
            red.phase_s != green.phase_s || red.phase_s != blue.phase_s) {
            throw std::invalid_argument(
                "LedWaveform: monochromatic channels must share frequency, duty cycle and phase");
        }
    } else {
        if (red.duty_cycle != green.duty_cycle || red.duty_cycle != blue.duty_cycle) {
            throw std::invalid_argument("LedWaveform: color channels must share the duty cycle");
        }
        if (red.phase_s != 0.0) {
            throw std::invalid_argument("LedWaveform: channel R is the phase reference (phase 0)");
        }
    }
}

LedWaveform make_monochromatic(double frequency_hz, double duty_cycle, double peak_intensity,
                               double ambient_intensity) {
    ChannelWaveform ch{frequency_hz, duty_cycle, 0.0, peak_intensity, ambient_intensity};
    LedWaveform w{ch, ch, ch, WaveformKind::Monochromatic};
    w.validate();
    return w;
}

LedWaveform make_color(double f_red_hz, double f_green_hz, double f_blue_hz, double duty_cycle,
                       double phase_rg_fraction, double phase_rb_fraction, double peak_intensity,
                       double ambient_intensity) {
    double t_red = 1.0 / f_red_hz;
    LedWaveform w{
        ChannelWaveform{f_red_hz, duty_cycle, 0.0, peak_intensity, ambient_intensity},
        ChannelWaveform{f_green_hz, duty_cycle, phase_rg_fraction * t_red, peak_intensity,
                        ambient_intensity},
        ChannelWaveform{f_blue_hz, duty_cycle, phase_rb_fraction * t_red, peak_intensity,
                        ambient_intensity},
        WaveformKind::Color,
    };
    w.validate();
    return w;
}

LedWaveform with_ambient_ratio(LedWaveform w, double ratio) {
    if (!(ratio >= 0.0)) throw std::invalid_argument("with_ambient_ratio: ratio must be >= 0");
    w.red.ambient_intensity = ratio * w.red.peak_intensity;
    w.green.ambient_intensity = ratio * w.green.peak_intensity;
    w.blue.ambient_intensity = ratio * w.blue.peak_intensity;
    return w;
}

double intensity_at(const ChannelWaveform& ch, double t_s) {
    if (ch.duty_cycle >= 1.0) return ch.peak_intensity + ch.ambient_intensity;
    if (ch.duty_cycle <= 0.0) return ch.ambient_intensity;
    double period = ch.period_s();
    double u = std::fmod(t_s - ch.phase_s, period);
    if (u < 0.0) u += period;
    // ON on (0, t_on]; the boundary u == 0 is OFF.
    bool on = u > 0.0 && u <= ch.on_duration_s();
    return on ? ch.peak_intensity + ch.ambient_intensity : ch.ambient_intensity;
}

namespace {

// Measure of ON time in [0, x) for the unit-phase square wave: full cycles
// plus the leading fraction, valid for negative x through floor().
double on_time_before(double x, double period, double t_on) {
    double k = std::floor(x / period);
    double frac = x - k * period;
    if (frac < 0.0) frac = 0.0;  // guard fmod-style rounding
    if (frac > period) frac = period;
    return k * t_on + std::min(frac, t_on);
}

}  // namespace

double integrate(const ChannelWaveform& ch, double t_start_s, double t_exposure_s) {
    if (!(t_exposure_s > 0.0)) {
        throw std::invalid_argument("integrate: exposure must be positive");
    }
    if (ch.duty_cycle >= 1.0) return (ch.peak_intensity + ch.ambient_intensity) * t_exposure_s;
    if (ch.duty_cycle <= 0.0) return ch.ambient_intensity * t_exposure_s;

    double period = ch.period_s();
    double t_on = ch.on_duration_s();
    double a = t_start_s - ch.phase_s;
    double on_time = on_time_before(a + t_exposure_s, period, t_on) - on_time_before(a, period, t_on);
    on_time = std::clamp(on_time, 0.0, t_exposure_s);
    return ch.peak_intensity * on_time + ch.ambient_intensity * t_exposure_s;
}

StripeWidths predicted_stripe_widths(const ChannelWaveform& ch, const SensorConfig& sensor) {
    if (!(sensor.scanline_interval_s > 0.0)) {
        throw std::invalid_argument("predicted_stripe_widths: scanline interval must be positive");
    }
    double period = ch.period_s();
    double t_on = ch.on_duration_s();
    double r = std::fmod(sensor.exposure_s, period);
    StripeWidths w;
    w.bright_px = std::abs(r - t_on) / sensor.scanline_interval_s;
    w.dark_px = std::abs(r - (period - t_on)) / sensor.scanline_interval_s;
    return w;
}

Rgb perceived_color(const LedWaveform& w, double window_s) {
    double min_window = 100.0 * w.max_period_s();
    if (!(window_s >= min_window)) {
        throw std::invalid_argument(
            "perceived_color: window shorter than 100 flicker periods is not a valid "
            "perception window");
    }
    Rgb c;
    c.r = integrate(w.red, 0.0, window_s) / window_s;
    c.g = integrate(w.green, 0.0, window_s) / window_s;
    c.b = integrate(w.blue, 0.0, window_s) / window_s;
    return c;
}

}  // namespace stripesim
