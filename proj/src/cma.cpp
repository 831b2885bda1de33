#include "stripesim/cma.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace stripesim::cma {

namespace {

// Each normal deviate uses its own Box-Muller pair so draws stay
// deterministic across checkpoints regardless of library internals.
class NormalSource {
public:
    explicit NormalSource(std::mt19937_64& engine) : engine_(engine) {}

    double operator()() {
        double u1 = (double(engine_() >> 11) + 1.0) * 0x1p-53;
        double u2 = double(engine_() >> 11) * 0x1p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::mt19937_64& engine_;
};

using Matrix = std::vector<double>;  // row-major dim x dim

double& mat_at(Matrix& m, int dim, int r, int c) { return m[std::size_t(r) * dim + c]; }

// Cyclic Jacobi eigendecomposition of a symmetric matrix. Columns of
// eigenvectors are orthonormal; values unsorted. Plenty for dim <= 8.
void jacobi_eigen(const Matrix& a_in, int dim, std::vector<double>& values, Matrix& vectors) {
    Matrix a = a_in;
    vectors.assign(std::size_t(dim) * dim, 0.0);
    for (int i = 0; i < dim; ++i) mat_at(vectors, dim, i, i) = 1.0;

    for (int sweep = 0; sweep < 128; ++sweep) {
        double off = 0.0;
        double diag = 0.0;
        for (int r = 0; r < dim; ++r) {
            diag += std::abs(mat_at(a, dim, r, r));
            for (int c = r + 1; c < dim; ++c) off += std::abs(mat_at(a, dim, r, c));
        }
        if (off <= 1e-15 * std::max(diag, 1e-300)) break;

        for (int p = 0; p < dim - 1; ++p) {
            for (int q = p + 1; q < dim; ++q) {
                double apq = mat_at(a, dim, p, q);
                if (apq == 0.0) continue;
                double app = mat_at(a, dim, p, p);
                double aqq = mat_at(a, dim, q, q);
                double theta = (aqq - app) / (2.0 * apq);
                double t = (theta >= 0.0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                for (int k = 0; k < dim; ++k) {
                    double akp = mat_at(a, dim, k, p);
                    double akq = mat_at(a, dim, k, q);
                    mat_at(a, dim, k, p) = c * akp - s * akq;
                    mat_at(a, dim, k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < dim; ++k) {
                    double apk = mat_at(a, dim, p, k);
                    double aqk = mat_at(a, dim, q, k);
                    mat_at(a, dim, p, k) = c * apk - s * aqk;
                    mat_at(a, dim, q, k) = s * apk + c * aqk;
                }
                for (int k = 0; k < dim; ++k) {
                    double vkp = mat_at(vectors, dim, k, p);
                    double vkq = mat_at(vectors, dim, k, q);
                    mat_at(vectors, dim, k, p) = c * vkp - s * vkq;
                    mat_at(vectors, dim, k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    values.resize(dim);
    for (int i = 0; i < dim; ++i) values[i] = mat_at(a, dim, i, i);
}

// Reflect into [0,1]: triangle wave with period 2.
double reflect_unit(double t) {
    t = std::fmod(t, 2.0);
    if (t < 0.0) t += 2.0;
    return t > 1.0 ? 2.0 - t : t;
}

std::string serialize_engine(const std::mt19937_64& engine) {
    std::ostringstream out;
    out << engine;
    return out.str();
}

void deserialize_engine(std::mt19937_64& engine, const std::string& text) {
    std::istringstream in(text);
    in >> engine;
    if (!in) throw std::runtime_error("cma: corrupt RNG state in checkpoint");
}

}  // namespace

State init_state(const Options& opts) {
    int dim = int(opts.lower.size());
    if (dim < 1 || opts.upper.size() != std::size_t(dim)) {
        throw std::invalid_argument("cma: bounds must be non-empty and of equal size");
    }
    for (int i = 0; i < dim; ++i) {
        if (!(opts.lower[i] < opts.upper[i])) {
            throw std::invalid_argument("cma: lower bound must be below upper bound");
        }
    }

    State s;
    s.dim = dim;
    s.population_size =
        opts.population_size > 0 ? opts.population_size : 4 + int(std::floor(3.0 * std::log(dim)));
    if (s.population_size < 4) s.population_size = 4;
    s.mu = s.population_size / 2;

    s.weights.resize(s.mu);
    double wsum = 0.0;
    for (int i = 0; i < s.mu; ++i) {
        s.weights[i] = std::log(s.mu + 0.5) - std::log(double(i + 1));
        wsum += s.weights[i];
    }
    double wsq = 0.0;
    for (double& w : s.weights) {
        w /= wsum;
        wsq += w * w;
    }
    s.mu_eff = 1.0 / wsq;

    double d = dim;
    s.c_sigma = (s.mu_eff + 2.0) / (d + s.mu_eff + 5.0);
    s.d_sigma = 1.0 + 2.0 * std::max(0.0, std::sqrt((s.mu_eff - 1.0) / (d + 1.0)) - 1.0) + s.c_sigma;
    s.c_c = (4.0 + s.mu_eff / d) / (d + 4.0 + 2.0 * s.mu_eff / d);
    s.c1 = 2.0 / ((d + 1.3) * (d + 1.3) + s.mu_eff);
    s.c_mu = std::min(1.0 - s.c1, 2.0 * (s.mu_eff - 2.0 + 1.0 / s.mu_eff) /
                                      ((d + 2.0) * (d + 2.0) + s.mu_eff));
    s.chi_n = std::sqrt(d) * (1.0 - 1.0 / (4.0 * d) + 1.0 / (21.0 * d * d));

    s.mean.assign(dim, 0.5);
    s.sigma = opts.initial_step;
    s.cov.assign(std::size_t(dim) * dim, 0.0);
    for (int i = 0; i < dim; ++i) mat_at(s.cov, dim, i, i) = 1.0;
    s.path_sigma.assign(dim, 0.0);
    s.path_c.assign(dim, 0.0);
    s.generation = 0;
    s.evaluations = 0;
    s.seed = opts.seed;

    std::mt19937_64 engine(opts.seed);
    s.rng_state = serialize_engine(engine);
    return s;
}

Result maximize(const Objective& objective, const Options& opts, State& s) {
    int dim = s.dim;
    int lambda = s.population_size;
    if (opts.max_evaluations < lambda) {
        throw std::invalid_argument("cma: budget below one full generation");
    }

    std::mt19937_64 engine;
    deserialize_engine(engine, s.rng_state);
    NormalSource normal(engine);

    std::vector<double> span(dim);
    for (int i = 0; i < dim; ++i) span[i] = opts.upper[i] - opts.lower[i];

    Result result;
    result.history.reserve(std::size_t(opts.max_evaluations / lambda) + 1);

    std::vector<double> eigenvalues;
    Matrix basis;
    std::vector<std::vector<double>> sampled(lambda), repaired(lambda);
    std::vector<double> penalized(lambda), raw_value(lambda);
    std::vector<int> order(lambda);

    while (s.evaluations + lambda <= opts.max_evaluations) {
        // Decompose C = B diag(vals) B^T, flooring eigenvalues.
        jacobi_eigen(s.cov, dim, eigenvalues, basis);
        double max_eig = *std::max_element(eigenvalues.begin(), eigenvalues.end());
        double floor_eig = std::max(1e-12, 1e-12 * max_eig);
        bool floored = false;
        for (double& v : eigenvalues) {
            if (v < floor_eig) {
                v = floor_eig;
                floored = true;
            }
        }
        if (floored) {
            for (int r = 0; r < dim; ++r) {
                for (int c = r; c < dim; ++c) {
                    double sum = 0.0;
                    for (int k = 0; k < dim; ++k) {
                        sum += mat_at(basis, dim, r, k) * eigenvalues[k] * mat_at(basis, dim, c, k);
                    }
                    mat_at(s.cov, dim, r, c) = sum;
                    mat_at(s.cov, dim, c, r) = sum;
                }
            }
        }
        std::vector<double> sqrt_eig(dim);
        for (int i = 0; i < dim; ++i) sqrt_eig[i] = std::sqrt(eigenvalues[i]);

        for (int k = 0; k < lambda; ++k) {
            std::vector<double> z(dim);
            for (int i = 0; i < dim; ++i) z[i] = normal();
            std::vector<double> x(dim);
            for (int r = 0; r < dim; ++r) {
                double y = 0.0;
                for (int c = 0; c < dim; ++c) y += mat_at(basis, dim, r, c) * sqrt_eig[c] * z[c];
                x[r] = s.mean[r] + s.sigma * y;
            }

            std::vector<double> rep(dim);
            double violation_sq = 0.0;
            for (int i = 0; i < dim; ++i) {
                rep[i] = reflect_unit(x[i]);
                double v = x[i] - rep[i];
                violation_sq += v * v;
            }

            std::vector<double> original(dim);
            for (int i = 0; i < dim; ++i) original[i] = opts.lower[i] + rep[i] * span[i];

            double f = objective(original);
            ++s.evaluations;
            sampled[k] = std::move(x);
            repaired[k] = std::move(rep);
            raw_value[k] = f;
            penalized[k] = f - opts.penalty_weight * violation_sq;

            if (!s.has_best || f > s.best_value) {
                s.has_best = true;
                s.best_value = f;
                s.best_x = original;
            }
        }

        for (int i = 0; i < lambda; ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return penalized[a] > penalized[b]; });

        // Mean and search-path updates use the repaired coordinates.
        std::vector<double> old_mean = s.mean;
        std::fill(s.mean.begin(), s.mean.end(), 0.0);
        for (int i = 0; i < s.mu; ++i) {
            const std::vector<double>& xi = repaired[order[i]];
            for (int r = 0; r < dim; ++r) s.mean[r] += s.weights[i] * xi[r];
        }

        std::vector<double> y_w(dim);
        for (int r = 0; r < dim; ++r) y_w[r] = (s.mean[r] - old_mean[r]) / s.sigma;

        // C^{-1/2} y_w via the eigenbasis.
        std::vector<double> c_inv_sqrt_yw(dim, 0.0);
        for (int r = 0; r < dim; ++r) {
            double sum = 0.0;
            for (int k = 0; k < dim; ++k) {
                double proj = 0.0;
                for (int j = 0; j < dim; ++j) proj += mat_at(basis, dim, j, k) * y_w[j];
                sum += mat_at(basis, dim, r, k) * proj / sqrt_eig[k];
            }
            c_inv_sqrt_yw[r] = sum;
        }

        double cs = s.c_sigma;
        double norm_ps_sq = 0.0;
        for (int r = 0; r < dim; ++r) {
            s.path_sigma[r] = (1.0 - cs) * s.path_sigma[r] +
                              std::sqrt(cs * (2.0 - cs) * s.mu_eff) * c_inv_sqrt_yw[r];
            norm_ps_sq += s.path_sigma[r] * s.path_sigma[r];
        }
        double norm_ps = std::sqrt(norm_ps_sq);

        double expected = std::sqrt(1.0 - std::pow(1.0 - cs, 2.0 * (s.generation + 1)));
        bool h_sigma = norm_ps / expected / s.chi_n < 1.4 + 2.0 / (dim + 1.0);

        double cc = s.c_c;
        for (int r = 0; r < dim; ++r) {
            s.path_c[r] = (1.0 - cc) * s.path_c[r] +
                          (h_sigma ? std::sqrt(cc * (2.0 - cc) * s.mu_eff) * y_w[r] : 0.0);
        }

        double c1_eff = s.c1;
        double delta_h = (1.0 - (h_sigma ? 1.0 : 0.0)) * cc * (2.0 - cc);
        for (int r = 0; r < dim; ++r) {
            for (int c = r; c < dim; ++c) {
                double value = (1.0 - c1_eff - s.c_mu) * mat_at(s.cov, dim, r, c) +
                               c1_eff * (s.path_c[r] * s.path_c[c] +
                                         delta_h * mat_at(s.cov, dim, r, c));
                for (int i = 0; i < s.mu; ++i) {
                    const std::vector<double>& xi = repaired[order[i]];
                    double yr = (xi[r] - old_mean[r]) / s.sigma;
                    double yc = (xi[c] - old_mean[c]) / s.sigma;
                    value += s.c_mu * s.weights[i] * yr * yc;
                }
                mat_at(s.cov, dim, r, c) = value;
                mat_at(s.cov, dim, c, r) = value;
            }
        }

        s.sigma *= std::exp((cs / s.d_sigma) * (norm_ps / s.chi_n - 1.0));
        s.sigma = std::clamp(s.sigma, 1e-300, 1e6);

        ++s.generation;
        result.history.push_back({s.generation, s.evaluations, s.best_value});
    }

    s.rng_state = serialize_engine(engine);

    result.best_x = s.best_x;
    result.best_value = s.best_value;
    result.evaluations = s.evaluations;
    result.final_state = s;
    return result;
}

Result maximize(const Objective& objective, const Options& opts) {
    State state = init_state(opts);
    return maximize(objective, opts, state);
}

namespace {

constexpr int kCheckpointVersion = 1;

}  // namespace

void save_checkpoint(const State& s, const std::string& path) {
    nlohmann::json j;
    j["version"] = kCheckpointVersion;
    j["dim"] = s.dim;
    j["population_size"] = s.population_size;
    j["mu"] = s.mu;
    j["weights"] = s.weights;
    j["mu_eff"] = s.mu_eff;
    j["c_sigma"] = s.c_sigma;
    j["d_sigma"] = s.d_sigma;
    j["c_c"] = s.c_c;
    j["c1"] = s.c1;
    j["c_mu"] = s.c_mu;
    j["chi_n"] = s.chi_n;
    j["mean"] = s.mean;
    j["sigma"] = s.sigma;
    j["cov"] = s.cov;
    j["path_sigma"] = s.path_sigma;
    j["path_c"] = s.path_c;
    j["generation"] = s.generation;
    j["evaluations"] = s.evaluations;
    j["seed"] = s.seed;
    j["rng_state"] = s.rng_state;
    j["best_x"] = s.best_x;
    j["best_value"] = s.best_value;
    j["has_best"] = s.has_best;

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
    out << j.dump(2) << "\n";
}

State load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read checkpoint: " + path);
    nlohmann::json j;
    in >> j;
    if (j.value("version", 0) != kCheckpointVersion) {
        throw std::runtime_error("unsupported checkpoint version in " + path);
    }
    State s;
    s.dim = j.at("dim").get<int>();
    s.population_size = j.at("population_size").get<int>();
    s.mu = j.at("mu").get<int>();
    s.weights = j.at("weights").get<std::vector<double>>();
    s.mu_eff = j.at("mu_eff").get<double>();
    s.c_sigma = j.at("c_sigma").get<double>();
    s.d_sigma = j.at("d_sigma").get<double>();
    s.c_c = j.at("c_c").get<double>();
    s.c1 = j.at("c1").get<double>();
    s.c_mu = j.at("c_mu").get<double>();
    s.chi_n = j.at("chi_n").get<double>();
    s.mean = j.at("mean").get<std::vector<double>>();
    s.sigma = j.at("sigma").get<double>();
    s.cov = j.at("cov").get<std::vector<double>>();
    s.path_sigma = j.at("path_sigma").get<std::vector<double>>();
    s.path_c = j.at("path_c").get<std::vector<double>>();
    s.generation = j.at("generation").get<int>();
    s.evaluations = j.at("evaluations").get<long>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.rng_state = j.at("rng_state").get<std::string>();
    s.best_x = j.at("best_x").get<std::vector<double>>();
    s.best_value = j.at("best_value").get<double>();
    s.has_best = j.at("has_best").get<bool>();
    return s;
}

void write_history_csv(const std::vector<HistoryEntry>& history, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write history CSV: " + path);
    out << "generation,evaluations,best_score\n";
    char line[96];
    for (const HistoryEntry& h : history) {
        std::snprintf(line, sizeof line, "%d,%ld,%.10g\n", h.generation, h.evaluations,
                      h.best_value);
        out << line;
    }
}

}  // namespace stripesim::cma
