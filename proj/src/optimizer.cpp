#include "stripesim/optimizer.hpp"

#include "stripesim/trigger.hpp"

#include <cmath>
#include <stdexcept>

namespace stripesim {

LedWaveform to_waveform(const ParamVector& p, double peak_intensity, double ambient_intensity) {
    if (p.values.size() != std::size_t(p.dim())) {
        throw std::invalid_argument("to_waveform: wrong parameter count for kind");
    }
    if (p.kind == ParamKind::Mono2) {
        return make_monochromatic(p.values[0], p.values[1], peak_intensity, ambient_intensity);
    }
    double phase_rg = p.values[4] - std::floor(p.values[4]);
    double phase_rb = p.values[5] - std::floor(p.values[5]);
    return make_color(p.values[0], p.values[1], p.values[2], p.values[3], phase_rg, phase_rb,
                      peak_intensity, ambient_intensity);
}

bool is_feasible(const ParamVector& p, double min_frequency_hz) {
    if (p.values.size() != std::size_t(p.dim())) return false;
    if (p.kind == ParamKind::Mono2) {
        return p.values[0] >= min_frequency_hz && p.values[1] >= 0.0 && p.values[1] <= 1.0;
    }
    return p.values[0] >= min_frequency_hz && p.values[1] >= min_frequency_hz &&
           p.values[2] >= min_frequency_hz && p.values[3] >= 0.0 && p.values[3] <= 1.0 &&
           p.values[4] >= 0.0 && p.values[4] < 1.0 && p.values[5] >= 0.0 && p.values[5] < 1.0;
}

namespace {

struct PairEvaluation {
    int score = 0;
    double score_sum = 0.0;  // first-attempt verify scores where available
    int score_count = 0;
};

PairEvaluation evaluate_pairs(const ParamVector& omega, const FitnessConfig& cfg) {
    if (cfg.pairs.empty()) throw std::invalid_argument("fitness: empty pair list");
    if (cfg.attempts < 1) throw std::invalid_argument("fitness: attempts must be >= 1");

    LedWaveform waveform = to_waveform(omega);
    std::vector<double> phases = attempt_phases(cfg.attempts, waveform.red.period_s());

    PairEvaluation ev;
    for (const auto& [victim, attacker] : cfg.pairs) {
        TriggerSpec victim_spec{waveform, cfg.sensor, cfg.victim_phase_s, std::nullopt};
        ImageBuffer victim_injected = inject_trigger(victim, victim_spec);
        if (!quality_check(victim_injected, cfg.oracle).passes) continue;

        bool success = false;
        for (std::size_t k = 0; k < phases.size(); ++k) {
            TriggerSpec attacker_spec{waveform, cfg.sensor, cfg.victim_phase_s + phases[k],
                                      std::nullopt};
            ImageBuffer attacker_injected = inject_trigger(attacker, attacker_spec);
            if (!quality_check(attacker_injected, cfg.oracle).passes) continue;
            VerifyDecision d = verify(victim_injected, attacker_injected, cfg.oracle);
            if (k == 0 && d.score) {
                ev.score_sum += *d.score;
                ++ev.score_count;
            }
            if (d.accepted) {
                success = true;
                break;
            }
        }
        if (success) ++ev.score;
    }
    return ev;
}

double log_space(double lo, double hi, double t) { return lo * std::pow(hi / lo, t); }

}  // namespace

int fitness(const ParamVector& omega, const FitnessConfig& cfg) {
    return evaluate_pairs(omega, cfg).score;
}

double fitness_with_tiebreak(const ParamVector& omega, const FitnessConfig& cfg) {
    PairEvaluation ev = evaluate_pairs(omega, cfg);
    double tiebreak = 0.0;
    if (ev.score_count > 0) {
        double mean = ev.score_sum / double(ev.score_count);  // cosine in [-1, 1]
        tiebreak = (mean + 1.0) / 4.0;                        // [0, 0.5]
    }
    return double(ev.score) + tiebreak;
}

SearchResult search_waveform(ParamKind kind, const FitnessConfig& cfg, int budget,
                             std::uint64_t seed, double min_frequency_hz, cma::State* resume) {
    int dim = kind == ParamKind::Mono2 ? 2 : 6;

    // Normalized search coordinates: frequencies in log space over
    // [min_frequency, 1000 Hz], duty cycle and phase fractions in [0, 1].
    cma::Options opts;
    opts.lower.assign(dim, 0.0);
    opts.upper.assign(dim, 1.0);
    opts.max_evaluations = budget;
    opts.seed = seed;

    auto decode = [=](const std::vector<double>& x) {
        ParamVector p;
        p.kind = kind;
        if (kind == ParamKind::Mono2) {
            p.values = {log_space(min_frequency_hz, kMaxFrequencyHz, x[0]), x[1]};
        } else {
            double phase_rg = x[4] >= 1.0 ? 0.0 : x[4];
            double phase_rb = x[5] >= 1.0 ? 0.0 : x[5];
            p.values = {log_space(min_frequency_hz, kMaxFrequencyHz, x[0]),
                        log_space(min_frequency_hz, kMaxFrequencyHz, x[1]),
                        log_space(min_frequency_hz, kMaxFrequencyHz, x[2]),
                        x[3],
                        phase_rg,
                        phase_rb};
        }
        return p;
    };

    cma::Objective objective = [&](const std::vector<double>& x) {
        return fitness_with_tiebreak(decode(x), cfg);
    };

    cma::Result r;
    if (resume) {
        r = cma::maximize(objective, opts, *resume);
    } else {
        r = cma::maximize(objective, opts);
    }

    SearchResult out;
    out.best = decode(r.best_x);
    out.best_objective = r.best_value;
    out.best_fitness = fitness(out.best, cfg);
    out.history = std::move(r.history);
    out.state = std::move(r.final_state);
    return out;
}

ParamVector default_optimized_params(ParamKind kind) {
    ParamVector p;
    p.kind = kind;
    if (kind == ParamKind::Mono2) {
        p.values = {344.89, 0.3865};
    } else {
        p.values = {445.95, 232.30, 219.90, 0.2136, 0.2257, 0.7353};
    }
    return p;
}

std::vector<ParamVector> baseline_grid() {
    const double freqs[] = {50.0, 60.0, 110.0, 220.0, 330.0, 470.0, 700.0, 1000.0};
    const double duties[] = {0.15, 0.35, 0.55, 0.75};
    std::vector<ParamVector> grid;
    grid.reserve(32);
    for (double f : freqs) {
        for (double d : duties) {
            grid.push_back(ParamVector{ParamKind::Mono2, {f, d}});
        }
    }
    return grid;
}

}  // namespace stripesim
