#include "stripesim/sensor.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace stripesim {

const char* orientation_name(Orientation o) {
    return o == Orientation::ColumnWise ? "column" : "row";
}

Orientation orientation_from_name(const std::string& name) {
    if (name == "column" || name == "column-wise" || name == "col") return Orientation::ColumnWise;
    if (name == "row" || name == "row-wise") return Orientation::RowWise;
    throw std::invalid_argument("unknown orientation: " + name);
}

void SensorConfig::validate() const {
    if (!(exposure_s > 0.0)) throw std::invalid_argument("SensorConfig: exposure must be positive");
    if (!(scanline_interval_s > 0.0)) {
        throw std::invalid_argument("SensorConfig: scanline interval must be positive");
    }
    if (num_scanlines < 1) throw std::invalid_argument("SensorConfig: need at least one scanline");
}

StripeField render_stripe_field(const LedWaveform& w, const SensorConfig& sensor,
                                double global_phase_s) {
    sensor.validate();
    w.validate();

    StripeField raw;
    raw.num_scanlines = sensor.num_scanlines;
    raw.orientation = sensor.orientation;
    raw.gains.resize(std::size_t(sensor.num_scanlines) * 3);

    double max_value = 0.0;
    for (int i = 0; i < sensor.num_scanlines; ++i) {
        double t_i = global_phase_s + double(i) * sensor.scanline_interval_s;
        for (int c = 0; c < 3; ++c) {
            double v = integrate(w.channel(c), t_i, sensor.exposure_s);
            raw.gain(i, c) = v;
            if (v > max_value) max_value = v;
        }
    }
    if (max_value == 0.0) return raw;  // degenerate illumination renders black
    return normalize_auto_iso(raw);
}

StripeField normalize_auto_iso(const StripeField& raw) {
    double max_value = 0.0;
    for (double v : raw.gains) {
        if (v < 0.0) throw std::domain_error("normalize_auto_iso: negative exposure value");
        if (v > max_value) max_value = v;
    }
    if (max_value == 0.0) {
        throw std::domain_error("normalize_auto_iso: degenerate all-zero illumination");
    }
    StripeField out = raw;
    for (double& v : out.gains) v /= max_value;
    return out;
}

std::string field_csv_string(const StripeField& field) {
    std::string out = "scanline,r,g,b\n";
    char line[128];
    for (int i = 0; i < field.num_scanlines; ++i) {
        std::snprintf(line, sizeof line, "%d,%.10g,%.10g,%.10g\n", i, field.gain(i, 0),
                      field.gain(i, 1), field.gain(i, 2));
        out += line;
    }
    return out;
}

void write_field_csv(const StripeField& field, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write field CSV: " + path);
    out << field_csv_string(field);
}

}  // namespace stripesim
