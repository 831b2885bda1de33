#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace stripesim::cma {

/// Box-constrained maximization. Candidates are sampled in normalized
/// [0,1]^d coordinates (initial mean at the box center, initial step 0.3 of
/// each box width), reflected back into the box, and a quadratic penalty on
/// the pre-repair violation distance is subtracted from the objective.
struct Options {
    std::vector<double> lower;
    std::vector<double> upper;
    int max_evaluations = 5000;
    std::uint64_t seed = 0;
    int population_size = 0;      // 0 = 4 + floor(3 ln d)
    double initial_step = 0.3;    // in normalized coordinates
    double penalty_weight = 1e3;  // quadratic penalty coefficient
};

/// Full strategy state, checkpointable. Covariance is kept symmetric and
/// its eigenvalues floored at 1e-14 of the largest.
struct State {
    int dim = 0;
    int population_size = 0;
    int mu = 0;
    std::vector<double> weights;
    double mu_eff = 0.0;
    double c_sigma = 0.0, d_sigma = 0.0, c_c = 0.0, c1 = 0.0, c_mu = 0.0;
    double chi_n = 0.0;

    std::vector<double> mean;        // normalized coordinates
    double sigma = 0.3;
    std::vector<double> cov;         // dim*dim, row-major
    std::vector<double> path_sigma;  // dim
    std::vector<double> path_c;      // dim
    int generation = 0;
    long evaluations = 0;
    std::uint64_t seed = 0;
    std::string rng_state;           // serialized engine

    std::vector<double> best_x;      // original coordinates
    double best_value = 0.0;
    bool has_best = false;
};

struct HistoryEntry {
    int generation = 0;
    long evaluations = 0;
    double best_value = 0.0;  // best penalized objective so far
};

struct Result {
    std::vector<double> best_x;    // original coordinates, inside the box
    double best_value = 0.0;       // objective at best_x (without penalty)
    long evaluations = 0;
    std::vector<HistoryEntry> history;
    State final_state;
};

using Objective = std::function<double(const std::vector<double>&)>;

State init_state(const Options& opts);

/// Runs until the evaluation budget is exhausted, mutating the state (so a
/// checkpointed state can be resumed). The objective sees repaired,
/// in-box candidates in original coordinates.
Result maximize(const Objective& objective, const Options& opts, State& state);

/// One-shot convenience.
Result maximize(const Objective& objective, const Options& opts);

void save_checkpoint(const State& state, const std::string& path);
State load_checkpoint(const std::string& path);

void write_history_csv(const std::vector<HistoryEntry>& history, const std::string& path);

}  // namespace stripesim::cma
