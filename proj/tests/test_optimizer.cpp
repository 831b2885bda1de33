#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "stripesim/cma.hpp"
#include "stripesim/fixtures.hpp"
#include "stripesim/optimizer.hpp"
#include "stripesim/trigger.hpp"

#include "test_util.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace stripesim;

namespace {

FitnessConfig fixture_fitness_config(int pairs, double threshold, int attempts = 3) {
    FitnessConfig cfg;
    cfg.attempts = attempts;
    cfg.oracle.threshold = threshold;
    for (int i = 0; i < pairs; ++i) {
        cfg.pairs.emplace_back(render_fixture_face(50, i, 0),
                               render_fixture_face(50, (i + 1) % (pairs + 1), 1));
    }
    return cfg;
}

// Attempts a Cholesky factorization of (m - shift*I); success means every
// eigenvalue exceeds shift.
bool spd_above(const std::vector<double>& m, int dim, double shift) {
    std::vector<double> a = m;
    for (int i = 0; i < dim; ++i) a[std::size_t(i) * dim + i] -= shift;
    std::vector<double> chol(std::size_t(dim) * dim, 0.0);
    for (int i = 0; i < dim; ++i) {
        for (int j = 0; j <= i; ++j) {
            double sum = a[std::size_t(i) * dim + j];
            for (int k = 0; k < j; ++k) {
                sum -= chol[std::size_t(i) * dim + k] * chol[std::size_t(j) * dim + k];
            }
            if (i == j) {
                if (sum <= 0.0) return false;
                chol[std::size_t(i) * dim + i] = std::sqrt(sum);
            } else {
                chol[std::size_t(i) * dim + j] = sum / chol[std::size_t(j) * dim + j];
            }
        }
    }
    return true;
}

}  // namespace

TEST_CASE("published presets") {
    ParamVector mono = default_optimized_params(ParamKind::Mono2);
    CHECK(mono.values == std::vector<double>{344.89, 0.3865});
    ParamVector color = default_optimized_params(ParamKind::Color6);
    CHECK(color.values == std::vector<double>{445.95, 232.30, 219.90, 0.2136, 0.2257, 0.7353});
    CHECK(is_feasible(mono, 100.0));
    CHECK(is_feasible(color, 100.0));

    LedWaveform w = to_waveform(color);
    CHECK(w.kind == WaveformKind::Color);
    CHECK(w.green.phase_s == doctest::Approx(0.2257 / 445.95));
    CHECK(w.blue.phase_s == doctest::Approx(0.7353 / 445.95));
}

TEST_CASE("baseline grid is the documented 32-point (f, tau) lattice") {
    std::vector<ParamVector> grid = baseline_grid();
    REQUIRE(grid.size() == 32);
    CHECK(grid.front().values == std::vector<double>{50.0, 0.15});
    CHECK(grid.back().values == std::vector<double>{1000.0, 0.75});
    // Sub-threshold AC frequencies are present: fitness accepts them even
    // though the optimizer itself never samples below the flicker bound.
    CHECK_FALSE(is_feasible(grid.front(), 100.0));
}

TEST_CASE("fitness: always-reject and always-accept oracles bracket the score") {
    FitnessConfig reject = fixture_fitness_config(4, 2.0);
    ParamVector preset = default_optimized_params(ParamKind::Mono2);
    CHECK(fitness(preset, reject) == 0);

    FitnessConfig accept = fixture_fitness_config(4, -2.0);
    CHECK(fitness(preset, accept) == 4);  // quality passes on all preset-striped fixtures
}

TEST_CASE("fitness equals the brute-force pair/phase enumeration") {
    // Mid-range threshold so some pairs pass and some fail.
    FitnessConfig cfg = fixture_fitness_config(4, 0.0);
    std::vector<double> clean_scores;
    for (const auto& [a, b] : cfg.pairs) clean_scores.push_back(surrogate_score(a, b));
    cfg.oracle.threshold = calibrate_threshold(clean_scores, 0.25);

    ParamVector omega = default_optimized_params(ParamKind::Mono2);
    LedWaveform w = to_waveform(omega);
    SensorConfig sensor = cfg.sensor;

    int expected = 0;
    for (const auto& [victim, attacker] : cfg.pairs) {
        TriggerSpec vs{w, sensor, 0.0, std::nullopt};
        ImageBuffer vi = inject_trigger(victim, vs);
        if (!quality_check(vi).passes) continue;
        bool ok = false;
        for (double phase : attempt_phases(cfg.attempts, w.red.period_s())) {
            TriggerSpec as{w, sensor, phase, std::nullopt};
            ImageBuffer ai = inject_trigger(attacker, as);
            if (!quality_check(ai).passes) continue;
            if (surrogate_score(vi, ai) >= cfg.oracle.threshold) {
                ok = true;
                break;
            }
        }
        if (ok) ++expected;
    }
    CHECK(fitness(omega, cfg) == expected);
}

TEST_CASE("fitness is invariant under pair permutation and monotone in attempts") {
    FitnessConfig cfg = fixture_fitness_config(5, 0.0);
    std::vector<double> clean_scores;
    for (const auto& [a, b] : cfg.pairs) clean_scores.push_back(surrogate_score(a, b));
    cfg.oracle.threshold = calibrate_threshold(clean_scores, 0.4);

    ParamVector omega = default_optimized_params(ParamKind::Mono2);
    int base = fitness(omega, cfg);

    FitnessConfig shuffled = cfg;
    std::rotate(shuffled.pairs.begin(), shuffled.pairs.begin() + 2, shuffled.pairs.end());
    std::swap(shuffled.pairs[0], shuffled.pairs[1]);
    CHECK(fitness(omega, shuffled) == base);

    FitnessConfig single = cfg;
    single.attempts = 1;
    CHECK(fitness(omega, single) <= base);

    double with_tiebreak = fitness_with_tiebreak(omega, cfg);
    CHECK(with_tiebreak >= base);
    CHECK(with_tiebreak < base + 0.5);
}

TEST_CASE("cma: 6-D sphere reaches the optimum within budget") {
    cma::Options opts;
    opts.lower.assign(6, -1.0);
    opts.upper.assign(6, 3.0);
    opts.max_evaluations = 5000;
    opts.seed = 17;

    auto sphere = [](const std::vector<double>& x) {
        double s = 0.0;
        for (double v : x) s += v * v;
        return -s;
    };
    cma::Result r = cma::maximize(sphere, opts);
    CHECK(r.best_value > -1e-6);
    CHECK(r.evaluations <= 5000);
}

TEST_CASE("cma: all candidates stay inside the box") {
    cma::Options opts;
    opts.lower = {0.0, 0.0};
    opts.upper = {1.0, 1.0};
    opts.max_evaluations = 2000;
    opts.seed = 3;
    opts.initial_step = 0.8;  // large step forces plenty of reflections

    long evaluated = 0;
    auto objective = [&](const std::vector<double>& x) {
        ++evaluated;
        REQUIRE(x[0] >= 0.0);
        REQUIRE(x[0] <= 1.0);
        REQUIRE(x[1] >= 0.0);
        REQUIRE(x[1] <= 1.0);
        return -(x[0] - 0.9) * (x[0] - 0.9) - x[1];
    };
    cma::maximize(objective, opts);
    CHECK(evaluated >= 1998);
}

TEST_CASE("cma: same seed, same history; different seed diverges") {
    cma::Options opts;
    opts.lower.assign(3, -2.0);
    opts.upper.assign(3, 2.0);
    opts.max_evaluations = 600;
    opts.seed = 11;

    auto rastriginish = [](const std::vector<double>& x) {
        double s = 0.0;
        for (double v : x) s += v * v - std::cos(3.0 * v);
        return -s;
    };
    cma::Result a = cma::maximize(rastriginish, opts);
    cma::Result b = cma::maximize(rastriginish, opts);
    REQUIRE(a.history.size() == b.history.size());
    for (std::size_t i = 0; i < a.history.size(); ++i) {
        REQUIRE(a.history[i].best_value == b.history[i].best_value);
        REQUIRE(a.history[i].evaluations == b.history[i].evaluations);
    }
    CHECK(a.best_x == b.best_x);

    opts.seed = 12;
    cma::Result c = cma::maximize(rastriginish, opts);
    CHECK(c.best_x != a.best_x);
}

TEST_CASE("cma: covariance stays symmetric positive-definite over 500 generations") {
    cma::Options opts;
    opts.lower.assign(4, -5.0);
    opts.upper.assign(4, 5.0);
    opts.population_size = 8;
    opts.max_evaluations = 500 * 8;
    opts.seed = 29;

    auto smooth = [](const std::vector<double>& x) {
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - 0.3 * double(i)) * (x[i] - 0.3 * double(i));
        return -s;
    };
    cma::Result r = cma::maximize(smooth, opts);
    const cma::State& s = r.final_state;
    CHECK(s.generation == 500);
    for (int i = 0; i < s.dim; ++i) {
        for (int j = 0; j < s.dim; ++j) {
            REQUIRE(std::abs(s.cov[i * s.dim + j] - s.cov[j * s.dim + i]) <= 1e-12);
        }
    }
    CHECK(spd_above(s.cov, s.dim, 1e-14));
}

TEST_CASE("cma: checkpoint resume reproduces the one-shot run") {
    cma::Options opts;
    opts.lower.assign(2, -1.0);
    opts.upper.assign(2, 1.0);
    opts.max_evaluations = 600;
    opts.seed = 5;

    auto bowl = [](const std::vector<double>& x) {
        return -(x[0] - 0.2) * (x[0] - 0.2) - (x[1] + 0.4) * (x[1] + 0.4);
    };

    cma::Result whole = cma::maximize(bowl, opts);

    test_util::TempDir tmp("cma");
    cma::Options first_half = opts;
    first_half.max_evaluations = 300;
    cma::State state = cma::init_state(opts);
    cma::maximize(bowl, first_half, state);
    cma::save_checkpoint(state, tmp.file("ckpt.json"));

    cma::State resumed = cma::load_checkpoint(tmp.file("ckpt.json"));
    cma::Result second = cma::maximize(bowl, opts, resumed);

    CHECK(second.best_x == whole.best_x);
    CHECK(second.best_value == whole.best_value);
    CHECK(second.evaluations == whole.evaluations);
}

TEST_CASE("search_waveform returns a feasible best candidate and full history") {
    FitnessConfig cfg = fixture_fitness_config(3, 0.0);
    std::vector<double> clean_scores;
    for (const auto& [a, b] : cfg.pairs) clean_scores.push_back(surrogate_score(a, b));
    cfg.oracle.threshold = calibrate_threshold(clean_scores, 0.34);
    cfg.attempts = 1;

    SearchResult r = search_waveform(ParamKind::Mono2, cfg, 60, 9);
    CHECK(is_feasible(r.best, kDefaultMinFrequencyHz));
    CHECK(r.best.values[0] <= kMaxFrequencyHz + 1e-9);
    CHECK(r.best_fitness >= 0);
    CHECK(r.best_fitness <= 3);
    CHECK(int(r.history.size()) == 60 / r.state.population_size);
    CHECK(r.state.evaluations == long(r.history.size()) * r.state.population_size);
}
