#include "stripesim/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <map>
#include <stdexcept>

namespace stripesim {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string fmt_opt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

class ImageCache {
public:
    explicit ImageCache(double scale) : scale_(scale) {}

    const ImageBuffer& get(const std::string& path) {
        auto it = cache_.find(path);
        if (it != cache_.end()) return it->second;
        ImageBuffer img = load_png(path);
        if (scale_ != 1.0) img = scale_face(img, scale_);
        return cache_.emplace(path, std::move(img)).first->second;
    }

private:
    double scale_;
    std::map<std::string, ImageBuffer> cache_;
};

// Fractions of the red period, recoverable under frequency changes.
struct PhaseFractions {
    double green = 0.0;
    double blue = 0.0;
};

PhaseFractions phase_fractions(const LedWaveform& w) {
    double f_red = w.red.frequency_hz;
    return {w.green.phase_s * f_red, w.blue.phase_s * f_red};
}

LedWaveform with_all_frequencies(const LedWaveform& w, double frequency_hz) {
    PhaseFractions frac = phase_fractions(w);
    LedWaveform out = w;
    double t_red = 1.0 / frequency_hz;
    out.red.frequency_hz = frequency_hz;
    out.green.frequency_hz = frequency_hz;
    out.blue.frequency_hz = frequency_hz;
    out.green.phase_s = frac.green * t_red;
    out.blue.phase_s = frac.blue * t_red;
    return out;
}

LedWaveform with_duty_cycle(LedWaveform w, double duty) {
    w.red.duty_cycle = duty;
    w.green.duty_cycle = duty;
    w.blue.duty_cycle = duty;
    return w;
}

}  // namespace

EvalReport run_protocol(const RunConfig& cfg, const ImageTransform& transform) {
    cfg.sensor.validate();
    cfg.waveform.validate();
    if (cfg.attempts < 1) throw std::invalid_argument("run_protocol: attempts must be >= 1");
    if (cfg.pairs.genuine.empty() && cfg.pairs.impostor.empty()) {
        throw std::invalid_argument("run_protocol: empty pair set");
    }
    if (std::isnan(cfg.oracle.threshold)) {
        throw std::logic_error("run_protocol: oracle threshold not calibrated (ensure_threshold)");
    }

    ImageCache images(cfg.face_scale);
    std::vector<double> phases = attempt_phases(cfg.attempts, cfg.waveform.red.period_s());

    auto inject_at = [&](const ImageBuffer& img, double phase_s) {
        TriggerSpec spec{cfg.waveform, cfg.sensor, phase_s, std::nullopt};
        ImageBuffer out = inject_trigger(img, spec);
        return transform ? transform(out) : out;
    };

    EvalReport report;
    long quality_passed_total = 0;
    long quality_total = 0;

    for (const PairSet::Pair& pair : cfg.pairs.genuine) {
        PerPairOutcome outcome;
        outcome.kind = PerPairOutcome::Kind::Genuine;
        outcome.path_a = pair.a;
        outcome.path_b = pair.b;

        ImageBuffer injected = inject_at(images.get(pair.a), cfg.victim_phase_s);
        outcome.quality_total = 1;
        outcome.quality_passed = quality_check(injected, cfg.oracle).passes ? 1 : 0;

        VerifyDecision d = verify(injected, images.get(pair.b), cfg.oracle);
        outcome.accepted = d.accepted;
        outcome.first_score = d.score;

        quality_passed_total += outcome.quality_passed;
        quality_total += outcome.quality_total;
        report.per_pair.push_back(std::move(outcome));
    }

    double impostor_score_sum = 0.0;
    double impostor_score_sq = 0.0;
    long impostor_score_count = 0;

    for (const PairSet::Pair& pair : cfg.pairs.impostor) {
        PerPairOutcome outcome;
        outcome.kind = PerPairOutcome::Kind::Impostor;
        outcome.path_a = pair.a;
        outcome.path_b = pair.b;

        ImageBuffer victim_injected = inject_at(images.get(pair.a), cfg.victim_phase_s);
        outcome.quality_total = 1;
        outcome.quality_passed = quality_check(victim_injected, cfg.oracle).passes ? 1 : 0;

        const ImageBuffer& attacker = images.get(pair.b);
        for (std::size_t k = 0; k < phases.size(); ++k) {
            double phase = cfg.victim_phase_s + cfg.attacker_phase_offset_s + phases[k];
            ImageBuffer attacker_injected = inject_at(attacker, phase);
            outcome.quality_total += 1;
            bool quality_ok = quality_check(attacker_injected, cfg.oracle).passes;
            if (quality_ok) outcome.quality_passed += 1;

            VerifyDecision d = verify(victim_injected, attacker_injected, cfg.oracle);
            if (k == 0 && d.score) {
                outcome.first_score = d.score;
                impostor_score_sum += *d.score;
                impostor_score_sq += *d.score * *d.score;
                ++impostor_score_count;
            }
            if (!outcome.accepted && quality_ok && d.accepted) {
                outcome.accepted = true;
                outcome.accepted_attempt = int(k);
            }
        }

        quality_passed_total += outcome.quality_passed;
        quality_total += outcome.quality_total;
        report.per_pair.push_back(std::move(outcome));
    }

    report.face_detection_rate =
        quality_total > 0 ? double(quality_passed_total) / double(quality_total) : 0.0;

    if (!cfg.pairs.genuine.empty()) {
        long accepted = 0;
        for (const PerPairOutcome& o : report.per_pair) {
            if (o.kind == PerPairOutcome::Kind::Genuine && o.accepted) ++accepted;
        }
        report.victim_success_rate = double(accepted) / double(cfg.pairs.genuine.size());
    }
    if (!cfg.pairs.impostor.empty()) {
        long accepted = 0;
        for (const PerPairOutcome& o : report.per_pair) {
            if (o.kind == PerPairOutcome::Kind::Impostor && o.accepted) ++accepted;
        }
        report.attack_success_rate = double(accepted) / double(cfg.pairs.impostor.size());
    }
    if (impostor_score_count > 0) {
        double mean = impostor_score_sum / double(impostor_score_count);
        double var = std::max(impostor_score_sq / double(impostor_score_count) - mean * mean, 0.0);
        report.impostor_score_mean = mean;
        report.impostor_score_stddev = std::sqrt(var);
    }
    return report;
}

const char* sweep_axis_name(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::Frequency: return "frequency";
        case SweepAxis::DutyCycle: return "duty_cycle";
        case SweepAxis::IntensityRatio: return "intensity_ratio";
        case SweepAxis::FaceScale: return "face_scale";
        case SweepAxis::PhaseDifference: return "phase_difference";
        case SweepAxis::PhaseShiftGrid: return "phase_shift_grid";
        case SweepAxis::Orientation: return "orientation";
    }
    return "unknown";
}

SweepAxis sweep_axis_from_name(const std::string& name) {
    if (name == "frequency") return SweepAxis::Frequency;
    if (name == "duty_cycle" || name == "duty") return SweepAxis::DutyCycle;
    if (name == "intensity_ratio" || name == "ratio") return SweepAxis::IntensityRatio;
    if (name == "face_scale" || name == "scale") return SweepAxis::FaceScale;
    if (name == "phase_difference" || name == "phase") return SweepAxis::PhaseDifference;
    if (name == "phase_shift_grid" || name == "grid") return SweepAxis::PhaseShiftGrid;
    if (name == "orientation") return SweepAxis::Orientation;
    throw std::invalid_argument("unknown sweep axis: " + name);
}

std::vector<SweepValue> default_sweep_values(SweepAxis axis) {
    auto singles = [](std::initializer_list<double> values) {
        std::vector<SweepValue> out;
        for (double v : values) out.push_back(SweepValue{{v}});
        return out;
    };
    switch (axis) {
        case SweepAxis::Frequency: return singles({50, 60, 110, 220, 330});
        case SweepAxis::DutyCycle:
            return singles({0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95});
        case SweepAxis::IntensityRatio: return singles({0, 0.2, 0.4, 0.6, 0.8, 1.0, 1.2, 1.4});
        case SweepAxis::FaceScale: return singles({0.8, 0.9, 1.0, 1.1, 1.2});
        case SweepAxis::PhaseDifference:
            return singles({0, 0.125, 0.25, 0.375, 0.5, 0.625, 0.75, 0.875});
        case SweepAxis::PhaseShiftGrid: {
            std::vector<SweepValue> out;
            const double steps[] = {0.0, 0.2, 0.4, 0.6, 0.8};
            for (double a : steps) {
                for (double b : steps) out.push_back(SweepValue{{a, b}});
            }
            return out;
        }
        case SweepAxis::Orientation: return singles({0, 1});
    }
    return {};
}

namespace {

RunConfig apply_sweep_value(const RunConfig& base, SweepAxis axis, const SweepValue& value) {
    auto expect_size = [&](std::size_t n) {
        if (value.v.size() != n) {
            throw std::invalid_argument(std::string("sweep value arity mismatch for axis ") +
                                        sweep_axis_name(axis));
        }
    };

    RunConfig cfg = base;
    switch (axis) {
        case SweepAxis::Frequency:
            expect_size(1);
            cfg.waveform = with_all_frequencies(base.waveform, value.v[0]);
            break;
        case SweepAxis::DutyCycle:
            expect_size(1);
            if (!(value.v[0] >= 0.0 && value.v[0] <= 1.0)) {
                throw std::invalid_argument("duty cycle sweep value outside [0,1]");
            }
            cfg.waveform = with_duty_cycle(base.waveform, value.v[0]);
            break;
        case SweepAxis::IntensityRatio:
            expect_size(1);
            if (!(value.v[0] >= 0.0 && value.v[0] <= 1.4)) {
                throw std::invalid_argument("intensity ratio sweep value outside [0,1.4]");
            }
            cfg.waveform = with_ambient_ratio(base.waveform, value.v[0]);
            break;
        case SweepAxis::FaceScale:
            expect_size(1);
            cfg.face_scale = value.v[0];
            break;
        case SweepAxis::PhaseDifference:
            expect_size(1);
            // Offset as a fraction of the channel-R period; a pure
            // phase-alignment measurement, so a single attempt.
            cfg.attacker_phase_offset_s = value.v[0] * base.waveform.red.period_s();
            cfg.attempts = 1;
            break;
        case SweepAxis::PhaseShiftGrid: {
            expect_size(2);
            if (base.waveform.kind != WaveformKind::Color) {
                throw std::invalid_argument("phase shift grid requires a color waveform");
            }
            double t_red = base.waveform.red.period_s();
            cfg.waveform.green.phase_s = value.v[0] * t_red;
            cfg.waveform.blue.phase_s = value.v[1] * t_red;
            break;
        }
        case SweepAxis::Orientation:
            expect_size(1);
            cfg.sensor.orientation =
                value.v[0] == 0.0 ? Orientation::ColumnWise : Orientation::RowWise;
            break;
    }
    return cfg;
}

}  // namespace

SweepResult run_sweep(const RunConfig& cfg, SweepAxis axis, const std::vector<SweepValue>& values) {
    if (values.empty()) throw std::invalid_argument("run_sweep: empty value list");

    SweepResult result;
    result.axis = axis;
    result.points.resize(values.size());

    // External bindings hold one serialized child process, so sweep points
    // only fan out for the surrogate.
    int workers = cfg.oracle.kind == OracleKind::Surrogate ? std::max(1, cfg.workers) : 1;

    if (workers == 1) {
        for (std::size_t i = 0; i < values.size(); ++i) {
            result.points[i].value = values[i];
            result.points[i].report = run_protocol(apply_sweep_value(cfg, axis, values[i]));
        }
        return result;
    }

    // Batches of `workers` async points, assembled in value order.
    std::vector<std::future<EvalReport>> futures(values.size());
    for (std::size_t next = 0; next < values.size(); ) {
        std::size_t end = std::min(next + std::size_t(workers), values.size());
        for (std::size_t i = next; i < end; ++i) {
            futures[i] = std::async(std::launch::async, [&, i] {
                return run_protocol(apply_sweep_value(cfg, axis, values[i]));
            });
        }
        for (std::size_t i = next; i < end; ++i) {
            result.points[i].value = values[i];
            result.points[i].report = futures[i].get();
        }
        next = end;
    }
    return result;
}

std::string report_csv_string(const EvalReport& report) {
    std::string out = "metric,value\n";
    out += "face_detection_rate," + fmt(report.face_detection_rate) + "\n";
    out += "victim_success_rate," + fmt_opt(report.victim_success_rate) + "\n";
    out += "attack_success_rate," + fmt_opt(report.attack_success_rate) + "\n";
    out += "impostor_score_mean," + fmt_opt(report.impostor_score_mean) + "\n";
    out += "impostor_score_stddev," + fmt_opt(report.impostor_score_stddev) + "\n";
    out += "non_victim_test_accuracy," + report.non_victim_note + "\n";
    return out;
}

void write_report_csv(const EvalReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write report CSV: " + path);
    out << report_csv_string(report);
}

void write_per_pair_csv(const EvalReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write per-pair CSV: " + path);
    out << "index,kind,path_a,path_b,accepted,accepted_attempt,first_score,quality_passed,"
           "quality_total\n";
    for (std::size_t i = 0; i < report.per_pair.size(); ++i) {
        const PerPairOutcome& o = report.per_pair[i];
        out << i << ',' << (o.kind == PerPairOutcome::Kind::Genuine ? "genuine" : "impostor") << ','
            << o.path_a << ',' << o.path_b << ',' << (o.accepted ? 1 : 0) << ','
            << o.accepted_attempt << ',' << fmt_opt(o.first_score) << ',' << o.quality_passed << ','
            << o.quality_total << '\n';
    }
}

std::string sweep_csv_string(const SweepResult& sweep) {
    std::string out =
        "axis,value,value2,face_detection_rate,victim_success_rate,attack_success_rate,"
        "impostor_score_mean,impostor_score_stddev\n";
    for (const SweepPoint& p : sweep.points) {
        const EvalReport& r = p.report;
        out += std::string(sweep_axis_name(sweep.axis)) + "," + fmt(p.value.v[0]) + "," +
               (p.value.v.size() > 1 ? fmt(p.value.v[1]) : std::string()) + "," +
               fmt(r.face_detection_rate) + "," + fmt_opt(r.victim_success_rate) + "," +
               fmt_opt(r.attack_success_rate) + "," + fmt_opt(r.impostor_score_mean) + "," +
               fmt_opt(r.impostor_score_stddev) + "\n";
    }
    return out;
}

void write_sweep_csv(const SweepResult& sweep, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write sweep CSV: " + path);
    out << sweep_csv_string(sweep);
}

void ensure_threshold(RunConfig& cfg) {
    if (!std::isnan(cfg.oracle.threshold)) return;
    if (cfg.pairs.impostor.empty()) {
        throw std::invalid_argument("ensure_threshold: no impostor pairs to calibrate on");
    }
    std::vector<std::pair<ImageBuffer, ImageBuffer>> pairs;
    pairs.reserve(cfg.pairs.impostor.size());
    for (const PairSet::Pair& p : cfg.pairs.impostor) {
        pairs.emplace_back(load_png(p.a), load_png(p.b));
    }
    cfg.oracle.threshold = calibrate_threshold(pairs, cfg.oracle.far_target, cfg.oracle);
}

}  // namespace stripesim
