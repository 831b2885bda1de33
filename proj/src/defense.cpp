#include "stripesim/defense.hpp"

#include "stripesim/dft.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace stripesim {

namespace {

int scanline_count(const ImageBuffer& img, Orientation orientation) {
    return orientation == Orientation::ColumnWise ? img.width : img.height;
}

// Mean profile along the scanline axis for one channel (or -1 = luminance).
std::vector<double> scanline_profile(const ImageBuffer& img, Orientation orientation, int channel) {
    int n = scanline_count(img, orientation);
    int depth = orientation == Orientation::ColumnWise ? img.height : img.width;
    std::vector<double> profile(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double sum = 0.0;
        for (int j = 0; j < depth; ++j) {
            int x = orientation == Orientation::ColumnWise ? i : j;
            int y = orientation == Orientation::ColumnWise ? j : i;
            const std::uint8_t* p = img.at(x, y);
            sum += channel < 0 ? luminance(p[0], p[1], p[2]) : double(p[channel]);
        }
        profile[i] = sum / double(depth);
    }
    return profile;
}

std::uint8_t quantize(double v) { return std::uint8_t(std::lround(std::clamp(v, 0.0, 255.0))); }

}  // namespace

std::vector<double> scanline_profile_spectrum(const ImageBuffer& img, Orientation orientation) {
    if (scanline_count(img, orientation) < 16) {
        throw std::invalid_argument("scanline_profile_spectrum: scanline axis shorter than 16");
    }
    Spectrum s = real_dft(scanline_profile(img, orientation, -1));
    std::vector<double> energies(s.num_bins());
    for (int k = 0; k < s.num_bins(); ++k) energies[k] = s.bin_energy(k);
    return energies;
}

StripeSpectrum detect_stripes(const ImageBuffer& img, Orientation orientation) {
    std::vector<double> energies = scanline_profile_spectrum(img, orientation);
    int n = scanline_count(img, orientation);

    StripeSpectrum result;
    result.orientation = orientation;

    double total = 0.0;
    int best = 1;
    for (int k = 1; k < int(energies.size()); ++k) {
        total += energies[k];
        if (energies[k] > energies[best]) best = k;
    }
    result.dominant_freq_cycles_per_scanline = double(best) / double(n);

    // Noise floor: quantized images cannot carry meaningfully less profile
    // energy than this.
    double floor_energy = 1e-9 * double(n);
    if (total <= floor_energy || energies[best] <= 0.0) {
        result.peak_energy_db = kSpectrumFloorDb;
    } else {
        result.peak_energy_db = 10.0 * std::log10(energies[best] / total);
    }
    return result;
}

ImageBuffer destripe(const ImageBuffer& img, Orientation orientation) {
    if (img.empty()) throw std::invalid_argument("destripe: empty image");
    int n = scanline_count(img, orientation);
    if (n < 2 * kDestripeMinCycles + 2) return img;  // nothing periodic to isolate

    ImageBuffer out = img;
    int depth = orientation == Orientation::ColumnWise ? img.height : img.width;

    for (int c = 0; c < 3; ++c) {
        std::vector<double> profile = scanline_profile(img, orientation, c);
        Spectrum spec = real_dft(profile);

        std::vector<double> non_dc;
        non_dc.reserve(spec.num_bins() - 1);
        for (int k = 1; k < spec.num_bins(); ++k) non_dc.push_back(spec.bin_energy(k));
        std::vector<double> sorted = non_dc;
        std::sort(sorted.begin(), sorted.end());
        double median = sorted[sorted.size() / 2];

        std::vector<int> notch;
        for (int k = kDestripeMinCycles; k < spec.num_bins(); ++k) {
            if (spec.bin_energy(k) <= kDestripeMedianFactor * median) continue;
            // Skip components too weak to survive 8-bit quantization.
            double amplitude =
                2.0 * std::sqrt(spec.re[k] * spec.re[k] + spec.im[k] * spec.im[k]) / double(spec.n);
            if (amplitude < kDestripeMinAmplitude) continue;
            notch.push_back(k);
        }
        if (notch.empty()) continue;

        std::vector<double> stripe = reconstruct_bins(spec, notch);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < depth; ++j) {
                int x = orientation == Orientation::ColumnWise ? i : j;
                int y = orientation == Orientation::ColumnWise ? j : i;
                std::uint8_t* p = out.at(x, y);
                p[c] = quantize(double(img.at(x, y)[c]) - stripe[i]);
            }
        }
    }
    return out;
}

DefenseReport evaluate_defense(const PairSet& pairs, const LedWaveform& omega,
                               const OracleBinding& oracle, const SensorConfig& sensor,
                               int attempts) {
    RunConfig cfg;
    cfg.sensor = sensor;
    cfg.waveform = omega;
    cfg.oracle = oracle;
    cfg.pairs = pairs;
    cfg.attempts = attempts;

    Orientation orientation = sensor.orientation;
    EvalReport before = run_protocol(cfg);
    EvalReport after =
        run_protocol(cfg, [orientation](const ImageBuffer& img) { return destripe(img, orientation); });

    DefenseReport report;
    report.victim_success_before = before.victim_success_rate;
    report.victim_success_after = after.victim_success_rate;
    report.attack_success_before = before.attack_success_rate;
    report.attack_success_after = after.attack_success_rate;
    return report;
}

namespace {

std::string rate_cell(const std::optional<double>& rate) {
    if (!rate) return "";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", *rate);
    return buf;
}

}  // namespace

std::string defense_csv_string(const DefenseReport& report) {
    std::string out = "metric,before,after\n";
    out += "victim_success_rate," + rate_cell(report.victim_success_before) + "," +
           rate_cell(report.victim_success_after) + "\n";
    out += "attack_success_rate," + rate_cell(report.attack_success_before) + "," +
           rate_cell(report.attack_success_after) + "\n";
    return out;
}

void write_defense_csv(const DefenseReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write defense CSV: " + path);
    out << defense_csv_string(report);
}

std::string defense_table_string(const DefenseReport& report) {
    auto cell = [](const std::optional<double>& r) {
        if (!r) return std::string("   n/a");
        char buf[32];
        std::snprintf(buf, sizeof buf, "%6.4f", *r);
        return std::string(buf);
    };
    std::string out;
    out += "                      before    after\n";
    out += "victim success rate   " + cell(report.victim_success_before) + "   " +
           cell(report.victim_success_after) + "\n";
    out += "attack success rate   " + cell(report.attack_success_before) + "   " +
           cell(report.attack_success_after) + "\n";
    return out;
}

}  // namespace stripesim
