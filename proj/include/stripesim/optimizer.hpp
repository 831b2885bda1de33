#pragma once

#include "stripesim/cma.hpp"
#include "stripesim/image.hpp"
#include "stripesim/oracle.hpp"
#include "stripesim/sensor.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace stripesim {

/// Mono2: (frequency_hz, duty_cycle) shared by all channels.
/// Color6: (f_red, f_green, f_blue, duty_cycle, phase_rg, phase_rb) with the
/// phases as fractions of the red channel period in [0, 1).
enum class ParamKind { Mono2, Color6 };

struct ParamVector {
    ParamKind kind = ParamKind::Mono2;
    std::vector<double> values;

    int dim() const { return kind == ParamKind::Mono2 ? 2 : 6; }
};

LedWaveform to_waveform(const ParamVector& p, double peak_intensity = 100.0,
                        double ambient_intensity = 0.0);

/// Search-space feasibility (frequencies at or above the flicker threshold,
/// duty cycle and phase fractions in range). Fitness itself accepts any
/// positive frequencies so sub-threshold baselines can be scored.
bool is_feasible(const ParamVector& p, double min_frequency_hz);

inline constexpr double kDefaultMinFrequencyHz = 100.0;
inline constexpr double kMaxFrequencyHz = 1000.0;

struct FitnessConfig {
    std::vector<std::pair<ImageBuffer, ImageBuffer>> pairs;  // (victim, attacker), different identities
    OracleBinding oracle;
    SensorConfig sensor;
    int attempts = 3;
    double victim_phase_s = 0.0;
};

/// Number of pairs for which both injected images pass the quality check and
/// the injected pair verifies on at least one of `attempts` attacker-side
/// channel-R phase offsets. The same waveform is stamped on both sides.
int fitness(const ParamVector& omega, const FitnessConfig& cfg);

/// fitness plus a tie-break in [0, 0.5): the mean verify score mapped
/// through (s+1)/4. Never reorders distinct integer fitness values.
double fitness_with_tiebreak(const ParamVector& omega, const FitnessConfig& cfg);

struct SearchResult {
    ParamVector best;
    double best_objective = 0.0;
    int best_fitness = 0;
    std::vector<cma::HistoryEntry> history;
    cma::State state;
};

/// CMA-ES over the waveform parameters, maximizing fitness_with_tiebreak.
/// Frequencies are searched in log space over [min_frequency, 1000 Hz].
SearchResult search_waveform(ParamKind kind, const FitnessConfig& cfg, int budget,
                             std::uint64_t seed,
                             double min_frequency_hz = kDefaultMinFrequencyHz,
                             cma::State* resume = nullptr);

/// Published optimized presets.
ParamVector default_optimized_params(ParamKind kind);

/// Fixed 32-point (frequency, duty-cycle) grid used as the no-optimizer
/// baseline: {50, 60, 110, 220, 330, 470, 700, 1000} Hz x
/// {0.15, 0.35, 0.55, 0.75}. Mono2 only.
std::vector<ParamVector> baseline_grid();

}  // namespace stripesim
