#pragma once

#include "stripesim/image.hpp"
#include "stripesim/oracle.hpp"
#include "stripesim/pairs.hpp"
#include "stripesim/sensor.hpp"
#include "stripesim/trigger.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace stripesim {

struct PerPairOutcome {
    enum class Kind { Genuine, Impostor };
    Kind kind = Kind::Genuine;
    std::string path_a;
    std::string path_b;
    bool accepted = false;
    int accepted_attempt = -1;          // impostor pairs: first verifying attempt
    std::optional<double> first_score;  // score at the first attempt, when available
    int quality_passed = 0;
    int quality_total = 0;
};

/// The evaluation metrics of one protocol run. Rates are arithmetic means
/// of the per-pair indicators; a rate with no supporting pairs is absent
/// rather than zero.
struct EvalReport {
    double face_detection_rate = 0.0;
    std::optional<double> victim_success_rate;
    std::optional<double> attack_success_rate;
    std::string non_victim_note =
        "not applicable: verification uses a deployed model, no retraining";
    std::vector<PerPairOutcome> per_pair;
    std::optional<double> impostor_score_mean;    // first-attempt scores
    std::optional<double> impostor_score_stddev;
};

struct RunConfig {
    SensorConfig sensor;
    LedWaveform waveform;
    OracleBinding oracle;
    PairSet pairs;
    int attempts = 3;
    double victim_phase_s = 0.0;
    double attacker_phase_offset_s = 0.0;  // added to every attempt phase
    double face_scale = 1.0;               // applied to both images before injection
    std::uint64_t seed = 0;
    int workers = 1;
    std::string out_dir;
};

/// Optional post-injection image transform (the destriping defense hooks in
/// here). Identity when empty.
using ImageTransform = std::function<ImageBuffer(const ImageBuffer&)>;

/// Victim side: (injected victim, clean second) over genuine pairs.
/// Attack side: (injected victim, injected attacker) over impostor pairs,
/// accepted if any of `attempts` attacker phases verifies. Face detection
/// counts the quality check over every injected image including all
/// attempts.
EvalReport run_protocol(const RunConfig& cfg, const ImageTransform& transform = {});

enum class SweepAxis {
    Frequency,
    DutyCycle,
    IntensityRatio,
    FaceScale,
    PhaseDifference,
    PhaseShiftGrid,
    Orientation,
};

const char* sweep_axis_name(SweepAxis axis);
SweepAxis sweep_axis_from_name(const std::string& name);

/// One sweep value: a single number for most axes, (phase_rg, phase_rb) for
/// PhaseShiftGrid, 0 = column / 1 = row for Orientation. PhaseDifference
/// values are fractions of the channel-R period.
struct SweepValue {
    std::vector<double> v;
};

struct SweepPoint {
    SweepValue value;
    EvalReport report;
};

struct SweepResult {
    SweepAxis axis = SweepAxis::Frequency;
    std::vector<SweepPoint> points;
};

/// One run_protocol per value with only that parameter varied. Points run
/// concurrently up to cfg.workers when the oracle binding permits
/// (surrogate only); results are assembled in value order.
SweepResult run_sweep(const RunConfig& cfg, SweepAxis axis, const std::vector<SweepValue>& values);

/// Default sweep values where the protocol defines them (e.g. Frequency:
/// 50, 60, 110, 220, 330 Hz).
std::vector<SweepValue> default_sweep_values(SweepAxis axis);

void write_report_csv(const EvalReport& report, const std::string& path);
void write_per_pair_csv(const EvalReport& report, const std::string& path);
void write_sweep_csv(const SweepResult& sweep, const std::string& path);
std::string report_csv_string(const EvalReport& report);
std::string sweep_csv_string(const SweepResult& sweep);

/// Calibrates the binding threshold on the clean impostor pairs of the set
/// when it has not been fixed yet (NaN threshold).
void ensure_threshold(RunConfig& cfg);

}  // namespace stripesim
