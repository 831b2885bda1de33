// stripesim command line: stripe-field simulation, fixture generation,
// oracle calibration, waveform optimization, the attack/evaluation
// protocol, parameter sweeps, the destriping defense, and CSV/SVG reports.

#include "stripesim/defense.hpp"
#include "stripesim/external_oracle.hpp"
#include "stripesim/fixtures.hpp"
#include "stripesim/harness.hpp"
#include "stripesim/optimizer.hpp"
#include "stripesim/report.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace stripesim;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

json load_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    json j;
    in >> j;
    return j;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

// Options shared across subcommands, overridable by --config.
struct CommonOpts {
    std::string config_path;
    std::string out_dir = "out";
    std::string pairs_dir;
    std::string oracle_spec = "surrogate";
    std::string preset;
    std::string params_path;     // best.json from `optimize`
    std::string threshold_file;  // threshold.json from `calibrate`
    double threshold = kNaN;
    double far_target = 0.001;
    double oracle_timeout_s = 30.0;
    int attempts = 3;
    int workers = 1;
    std::uint64_t seed = 0;
    double ambient_ratio = 0.0;
    double face_scale = 1.0;
    int limit_genuine = 0;
    int limit_impostor = 0;
    std::string orientation = "column";
    double exposure_s = 1.0 / 200.0;
    double scanline_interval_s = 1.0 / 75000.0;
    int num_scanlines = 256;
    json config;  // raw config file, when given
};

void add_common_flags(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--config", o.config_path, "JSON config file (flags override it)");
    cmd->add_option("--out", o.out_dir, "output directory");
    cmd->add_option("--seed", o.seed, "RNG seed");
    cmd->add_option("--oracle", o.oracle_spec, "surrogate | external:<command>");
    cmd->add_option("--attempts", o.attempts, "attack attempts (channel-R phases)");
    cmd->add_option("--workers", o.workers, "concurrent sweep points (surrogate only)");
    cmd->add_option("--pairs", o.pairs_dir, "pair-set directory (one subdirectory per identity)");
    cmd->add_option("--preset", o.preset, "paper-mono | paper-color");
    cmd->add_option("--params", o.params_path, "waveform parameters JSON (from `optimize`)");
    cmd->add_option("--threshold", o.threshold, "verification threshold");
    cmd->add_option("--threshold-file", o.threshold_file, "threshold JSON (from `calibrate`)");
    cmd->add_option("--far", o.far_target, "false-accept-rate target for calibration");
    cmd->add_option("--oracle-timeout", o.oracle_timeout_s, "external oracle timeout (s)");
    cmd->add_option("--ambient-ratio", o.ambient_ratio, "ambient/LED intensity ratio");
    cmd->add_option("--face-scale", o.face_scale, "face scale factor in [0.8, 1.2]");
    cmd->add_option("--limit-genuine", o.limit_genuine, "cap genuine pairs (0 = all)");
    cmd->add_option("--limit-impostor", o.limit_impostor, "cap impostor pairs (0 = all)");
    cmd->add_option("--orientation", o.orientation, "column | row");
    cmd->add_option("--exposure", o.exposure_s, "sensor exposure time (s)");
    cmd->add_option("--scanline-interval", o.scanline_interval_s, "scanline interval (s)");
    cmd->add_option("--scanlines", o.num_scanlines, "scanline count for standalone rendering");
}

// Config-file values fill in anything the command line left at defaults.
void merge_config(CommonOpts& o, const CLI::App* cmd) {
    if (o.config_path.empty()) return;
    o.config = load_json(o.config_path);
    const json& c = o.config;

    auto unset = [&](const char* flag) { return cmd->count(flag) == 0; };
    if (c.contains("out") && unset("--out")) o.out_dir = c["out"].get<std::string>();
    if (c.contains("seed") && unset("--seed")) o.seed = c["seed"].get<std::uint64_t>();
    if (c.contains("attempts") && unset("--attempts")) o.attempts = c["attempts"].get<int>();
    if (c.contains("workers") && unset("--workers")) o.workers = c["workers"].get<int>();
    if (c.contains("pairs_dir") && unset("--pairs")) o.pairs_dir = c["pairs_dir"].get<std::string>();
    if (c.contains("preset") && unset("--preset")) o.preset = c["preset"].get<std::string>();
    if (c.contains("ambient_ratio") && unset("--ambient-ratio")) {
        o.ambient_ratio = c["ambient_ratio"].get<double>();
    }
    if (c.contains("face_scale") && unset("--face-scale")) o.face_scale = c["face_scale"].get<double>();
    if (c.contains("limit_genuine") && unset("--limit-genuine")) {
        o.limit_genuine = c["limit_genuine"].get<int>();
    }
    if (c.contains("limit_impostor") && unset("--limit-impostor")) {
        o.limit_impostor = c["limit_impostor"].get<int>();
    }
    if (c.contains("oracle")) {
        const json& j = c["oracle"];
        if (j.contains("spec") && unset("--oracle")) o.oracle_spec = j["spec"].get<std::string>();
        if (j.contains("threshold") && j["threshold"].is_number() && unset("--threshold")) {
            o.threshold = j["threshold"].get<double>();
        }
        if (j.contains("far_target") && unset("--far")) o.far_target = j["far_target"].get<double>();
        if (j.contains("timeout_s") && unset("--oracle-timeout")) {
            o.oracle_timeout_s = j["timeout_s"].get<double>();
        }
    }
    if (c.contains("sensor")) {
        const json& j = c["sensor"];
        if (j.contains("exposure_s") && unset("--exposure")) o.exposure_s = j["exposure_s"].get<double>();
        if (j.contains("scanline_interval_s") && unset("--scanline-interval")) {
            o.scanline_interval_s = j["scanline_interval_s"].get<double>();
        }
        if (j.contains("num_scanlines") && unset("--scanlines")) {
            o.num_scanlines = j["num_scanlines"].get<int>();
        }
        if (j.contains("orientation") && unset("--orientation")) {
            o.orientation = j["orientation"].get<std::string>();
        }
    }
}

SensorConfig make_sensor(const CommonOpts& o) {
    SensorConfig s;
    s.exposure_s = o.exposure_s;
    s.scanline_interval_s = o.scanline_interval_s;
    s.num_scanlines = o.num_scanlines;
    s.orientation = orientation_from_name(o.orientation);
    s.validate();
    return s;
}

ChannelWaveform channel_from_json(const json& j, double duty, double peak, double ambient,
                                  double t_red) {
    ChannelWaveform ch;
    ch.frequency_hz = j.at("frequency_hz").get<double>();
    ch.duty_cycle = duty;
    ch.peak_intensity = peak;
    ch.ambient_intensity = ambient;
    if (j.contains("phase_s")) {
        ch.phase_s = j["phase_s"].get<double>();
    } else if (j.contains("phase_fraction_of_red_period")) {
        ch.phase_s = j["phase_fraction_of_red_period"].get<double>() * t_red;
    }
    return ch;
}

LedWaveform waveform_from_json(const json& j) {
    double duty = j.at("duty_cycle").get<double>();
    double peak = j.value("peak_intensity", 100.0);
    double ambient = j.value("ambient_ratio", 0.0) * peak;
    std::string kind = j.value("kind", "mono");
    if (kind == "mono" || kind == "monochromatic") {
        return make_monochromatic(j.at("frequency_hz").get<double>(), duty, peak, ambient);
    }
    double t_red = 1.0 / j.at("red").at("frequency_hz").get<double>();
    LedWaveform w;
    w.kind = WaveformKind::Color;
    w.red = channel_from_json(j.at("red"), duty, peak, ambient, t_red);
    w.green = channel_from_json(j.at("green"), duty, peak, ambient, t_red);
    w.blue = channel_from_json(j.at("blue"), duty, peak, ambient, t_red);
    w.validate();
    return w;
}

ParamVector params_from_json(const json& j) {
    ParamVector p;
    std::string kind = j.at("kind").get<std::string>();
    p.kind = (kind == "mono" || kind == "mono2") ? ParamKind::Mono2 : ParamKind::Color6;
    p.values = j.at("values").get<std::vector<double>>();
    if (p.values.size() != std::size_t(p.dim())) {
        throw std::runtime_error("waveform parameter JSON has wrong value count");
    }
    return p;
}

// Exactly one of preset / params / explicit waveform config.
LedWaveform resolve_waveform(const CommonOpts& o) {
    int sources = int(!o.preset.empty()) + int(!o.params_path.empty()) +
                  int(o.config.contains("waveform"));
    if (sources == 0) {
        throw std::runtime_error("no waveform given: use --preset, --params, or config waveform");
    }
    if (sources > 1) {
        throw std::runtime_error("give exactly one of --preset, --params, config waveform");
    }
    LedWaveform w;
    if (!o.preset.empty()) {
        if (o.preset == "paper-mono") {
            w = to_waveform(default_optimized_params(ParamKind::Mono2));
        } else if (o.preset == "paper-color") {
            w = to_waveform(default_optimized_params(ParamKind::Color6));
        } else {
            throw std::runtime_error("unknown preset: " + o.preset);
        }
    } else if (!o.params_path.empty()) {
        w = to_waveform(params_from_json(load_json(o.params_path)));
    } else {
        w = waveform_from_json(o.config["waveform"]);
    }
    if (o.ambient_ratio > 0.0) w = with_ambient_ratio(w, o.ambient_ratio);
    return w;
}

struct OracleSetup {
    OracleBinding binding;
    std::unique_ptr<ExternalOracle> external;  // keeps the child alive
};

OracleSetup resolve_oracle(const CommonOpts& o) {
    OracleSetup setup;
    setup.binding.far_target = o.far_target;
    setup.binding.threshold = o.threshold;
    if (!o.threshold_file.empty() && std::isnan(setup.binding.threshold)) {
        setup.binding.threshold = load_json(o.threshold_file).at("threshold").get<double>();
    }
    if (o.oracle_spec == "surrogate") {
        setup.binding.kind = OracleKind::Surrogate;
    } else if (o.oracle_spec.rfind("external:", 0) == 0) {
        setup.binding.kind = OracleKind::External;
        setup.external =
            std::make_unique<ExternalOracle>(o.oracle_spec.substr(9), o.oracle_timeout_s);
        setup.binding.external = setup.external.get();
    } else {
        throw std::runtime_error("unknown oracle spec: " + o.oracle_spec);
    }
    return setup;
}

PairSet resolve_pairs(const CommonOpts& o) {
    if (o.pairs_dir.empty()) throw std::runtime_error("--pairs directory required");
    PairSet set = load_pairset_from_dir(o.pairs_dir);
    if (o.limit_genuine > 0 && int(set.genuine.size()) > o.limit_genuine) {
        set.genuine.resize(o.limit_genuine);
    }
    if (o.limit_impostor > 0 && int(set.impostor.size()) > o.limit_impostor) {
        set.impostor.resize(o.limit_impostor);
    }
    return set;
}

RunConfig make_run_config(const CommonOpts& o, const OracleSetup& oracle) {
    RunConfig cfg;
    cfg.sensor = make_sensor(o);
    cfg.waveform = resolve_waveform(o);
    cfg.oracle = oracle.binding;
    cfg.pairs = resolve_pairs(o);
    cfg.attempts = o.attempts;
    cfg.face_scale = o.face_scale;
    cfg.seed = o.seed;
    cfg.workers = o.workers;
    cfg.out_dir = o.out_dir;
    return cfg;
}

std::vector<SweepValue> parse_sweep_values(const std::string& text) {
    // "50,60,110" or grid pairs "0:0.2;0.4:0.6"
    std::vector<SweepValue> values;
    std::string token;
    std::istringstream in(text);
    char sep = text.find(';') != std::string::npos ? ';' : ',';
    while (std::getline(in, token, sep)) {
        if (token.empty()) continue;
        SweepValue v;
        std::istringstream pair_in(token);
        std::string part;
        while (std::getline(pair_in, part, ':')) v.v.push_back(std::strtod(part.c_str(), nullptr));
        values.push_back(std::move(v));
    }
    return values;
}

int cmd_simulate(CommonOpts& o, const std::string& image_path, const std::string& mask_path,
                 double phase) {
    fs::create_directories(o.out_dir);
    LedWaveform w = resolve_waveform(o);
    SensorConfig sensor = make_sensor(o);

    StripeField field = render_stripe_field(w, sensor, phase);
    std::string field_path = (fs::path(o.out_dir) / "field.csv").string();
    write_field_csv(field, field_path);
    std::printf("wrote %s (%d scanlines, %s-wise)\n", field_path.c_str(), field.num_scanlines,
                orientation_name(field.orientation));

    if (!image_path.empty()) {
        TriggerSpec spec{w, sensor, phase, std::nullopt};
        if (!mask_path.empty()) spec.mask = load_mask_png(mask_path);
        ImageBuffer out = inject_trigger(load_png(image_path), spec);
        std::string out_path = (fs::path(o.out_dir) / "injected.png").string();
        save_png(out, out_path);
        std::printf("wrote %s\n", out_path.c_str());
    }
    return 0;
}

int cmd_fixtures(CommonOpts& o, int count) {
    PairSet set = generate_fixture_set(o.seed, count, o.out_dir);
    std::string manifest = "kind,path_a,path_b\n";
    for (const auto& p : set.genuine) manifest += "genuine," + p.a + "," + p.b + "\n";
    for (const auto& p : set.impostor) manifest += "impostor," + p.a + "," + p.b + "\n";
    write_text((fs::path(o.out_dir) / "pairs.csv").string(), manifest);
    std::printf("wrote %d identities under %s (%zu genuine / %zu impostor pairs)\n", count,
                o.out_dir.c_str(), set.genuine.size(), set.impostor.size());
    return 0;
}

int cmd_calibrate(CommonOpts& o) {
    fs::create_directories(o.out_dir);
    OracleSetup oracle = resolve_oracle(o);
    PairSet set = resolve_pairs(o);
    if (set.impostor.empty()) throw std::runtime_error("calibrate: no impostor pairs");

    std::vector<std::pair<ImageBuffer, ImageBuffer>> pairs;
    pairs.reserve(set.impostor.size());
    for (const auto& p : set.impostor) pairs.emplace_back(load_png(p.a), load_png(p.b));
    double threshold = calibrate_threshold(pairs, o.far_target, oracle.binding);

    json j;
    j["threshold"] = threshold;
    j["far_target"] = o.far_target;
    j["impostor_pairs"] = set.impostor.size();
    j["pairs_dir"] = o.pairs_dir;
    std::string path = (fs::path(o.out_dir) / "threshold.json").string();
    write_text(path, j.dump(2) + "\n");
    std::printf("threshold %.17g at FAR %g over %zu impostor pairs -> %s\n", threshold,
                o.far_target, set.impostor.size(), path.c_str());
    return 0;
}

int cmd_optimize(CommonOpts& o, const std::string& kind_name, int budget, int pairs_limit,
                 const std::string& resume_path, double min_frequency) {
    fs::create_directories(o.out_dir);
    OracleSetup oracle = resolve_oracle(o);
    PairSet set = resolve_pairs(o);
    if (set.impostor.empty()) throw std::runtime_error("optimize: no impostor pairs");

    FitnessConfig fitness_cfg;
    fitness_cfg.sensor = make_sensor(o);
    fitness_cfg.attempts = o.attempts;
    int use = pairs_limit > 0 ? std::min<int>(pairs_limit, int(set.impostor.size()))
                              : int(set.impostor.size());
    fitness_cfg.pairs.reserve(use);
    for (int i = 0; i < use; ++i) {
        fitness_cfg.pairs.emplace_back(load_png(set.impostor[i].a), load_png(set.impostor[i].b));
    }

    fitness_cfg.oracle = oracle.binding;
    if (std::isnan(fitness_cfg.oracle.threshold)) {
        std::vector<std::pair<ImageBuffer, ImageBuffer>> clean;
        clean.reserve(set.impostor.size());
        for (const auto& p : set.impostor) clean.emplace_back(load_png(p.a), load_png(p.b));
        fitness_cfg.oracle.threshold =
            calibrate_threshold(clean, o.far_target, oracle.binding);
        std::printf("calibrated threshold %.17g at FAR %g\n", fitness_cfg.oracle.threshold,
                    o.far_target);
    }

    ParamKind kind = (kind_name == "color") ? ParamKind::Color6 : ParamKind::Mono2;
    std::unique_ptr<cma::State> resume;
    if (!resume_path.empty()) {
        resume = std::make_unique<cma::State>(cma::load_checkpoint(resume_path));
    }

    SearchResult result = search_waveform(kind, fitness_cfg, budget, o.seed, min_frequency,
                                          resume.get());

    json best;
    best["kind"] = kind == ParamKind::Mono2 ? "mono" : "color";
    best["values"] = result.best.values;
    best["fitness"] = result.best_fitness;
    best["objective"] = result.best_objective;
    best["pairs"] = use;
    best["budget"] = budget;
    best["seed"] = o.seed;
    write_text((fs::path(o.out_dir) / "best.json").string(), best.dump(2) + "\n");
    cma::write_history_csv(result.history, (fs::path(o.out_dir) / "history.csv").string());
    cma::save_checkpoint(result.state, (fs::path(o.out_dir) / "checkpoint.json").string());

    std::printf("best fitness %d/%d (objective %.6g) after %ld evaluations -> %s\n",
                result.best_fitness, use, result.best_objective, result.state.evaluations,
                (fs::path(o.out_dir) / "best.json").string().c_str());
    return 0;
}

int cmd_attack(CommonOpts& o) {
    fs::create_directories(o.out_dir);
    OracleSetup oracle = resolve_oracle(o);
    RunConfig cfg = make_run_config(o, oracle);
    ensure_threshold(cfg);

    EvalReport report = run_protocol(cfg);
    write_report_csv(report, (fs::path(o.out_dir) / "report.csv").string());
    write_per_pair_csv(report, (fs::path(o.out_dir) / "per_pair.csv").string());

    std::printf("face detection rate  %.4f\n", report.face_detection_rate);
    if (report.victim_success_rate) {
        std::printf("victim success rate  %.4f\n", *report.victim_success_rate);
    }
    if (report.attack_success_rate) {
        std::printf("attack success rate  %.4f\n", *report.attack_success_rate);
    }
    return 0;
}

int cmd_sweep(CommonOpts& o, const std::string& axis_name, const std::string& values_text) {
    fs::create_directories(o.out_dir);
    OracleSetup oracle = resolve_oracle(o);
    RunConfig cfg = make_run_config(o, oracle);
    ensure_threshold(cfg);

    SweepAxis axis = sweep_axis_from_name(axis_name);
    std::vector<SweepValue> values =
        values_text.empty() ? default_sweep_values(axis) : parse_sweep_values(values_text);
    SweepResult result = run_sweep(cfg, axis, values);

    std::string path = (fs::path(o.out_dir) / (std::string(sweep_axis_name(axis)) + "_sweep.csv"))
                           .string();
    write_sweep_csv(result, path);
    std::printf("wrote %s (%zu points)\n", path.c_str(), result.points.size());
    return 0;
}

int cmd_defend(CommonOpts& o) {
    fs::create_directories(o.out_dir);
    OracleSetup oracle = resolve_oracle(o);
    RunConfig cfg = make_run_config(o, oracle);
    ensure_threshold(cfg);

    DefenseReport report =
        evaluate_defense(cfg.pairs, cfg.waveform, cfg.oracle, cfg.sensor, cfg.attempts);
    write_defense_csv(report, (fs::path(o.out_dir) / "defense.csv").string());
    std::fputs(defense_table_string(report).c_str(), stdout);
    return 0;
}

int cmd_report(CommonOpts& o, const std::vector<std::string>& inputs) {
    if (inputs.empty()) throw std::runtime_error("report: no input CSVs");
    fs::create_directories(o.out_dir);

    std::vector<std::string> sweeps;
    for (const std::string& path : inputs) {
        CsvTable t = read_csv(path);
        if (!t.header.empty() && t.header[0] == "axis") sweeps.push_back(path);
    }
    if (!sweeps.empty()) {
        CsvTable merged = merge_csv_tables(sweeps);
        write_csv(merged, (fs::path(o.out_dir) / "merged.csv").string());
        for (const std::string& path : sweeps) {
            for (const std::string& svg : plot_sweep_csv(path, o.out_dir)) {
                std::printf("wrote %s\n", svg.c_str());
            }
        }
        std::printf("wrote %s\n", (fs::path(o.out_dir) / "merged.csv").string().c_str());
    } else {
        CsvTable merged = merge_csv_tables(inputs);
        write_csv(merged, (fs::path(o.out_dir) / "merged.csv").string());
        std::printf("wrote %s\n", (fs::path(o.out_dir) / "merged.csv").string().c_str());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"LED stripe-pattern trigger simulation and evaluation"};
    app.require_subcommand(1);

    CommonOpts o;

    auto* simulate = app.add_subcommand("simulate", "render a stripe field / inject into an image");
    std::string image_path, mask_path;
    double phase = 0.0;
    simulate->add_option("--image", image_path, "PNG to inject the trigger into");
    simulate->add_option("--mask", mask_path, "foreground mask PNG (0 = background)");
    simulate->add_option("--phase", phase, "global phase (s)");
    add_common_flags(simulate, o);

    auto* fixtures = app.add_subcommand("fixtures", "generate a procedural fixture pair set");
    int fixture_count = 50;
    fixtures->add_option("--count", fixture_count, "number of identities");
    add_common_flags(fixtures, o);

    auto* calibrate = app.add_subcommand("calibrate", "calibrate the verification threshold");
    add_common_flags(calibrate, o);

    auto* optimize = app.add_subcommand("optimize", "CMA-ES search over waveform parameters");
    std::string kind_name = "mono";
    int budget = 600;
    int pairs_limit = 32;
    std::string resume_path;
    double min_frequency = kDefaultMinFrequencyHz;
    optimize->add_option("--kind", kind_name, "mono | color");
    optimize->add_option("--budget", budget, "objective evaluation budget");
    optimize->add_option("--pairs-limit", pairs_limit, "impostor pairs used in the objective");
    optimize->add_option("--resume", resume_path, "resume from checkpoint JSON");
    optimize->add_option("--min-frequency", min_frequency, "flicker-threshold constraint (Hz)");
    add_common_flags(optimize, o);

    auto* attack = app.add_subcommand("attack", "run the verification attack protocol");
    add_common_flags(attack, o);

    auto* sweep = app.add_subcommand("sweep", "protocol sweeps over one parameter");
    std::string axis_name = "frequency";
    std::string values_text;
    sweep->add_option("--axis", axis_name,
                      "frequency | duty_cycle | intensity_ratio | face_scale | phase_difference | "
                      "phase_shift_grid | orientation");
    sweep->add_option("--values", values_text, "comma list, or a:b pairs separated by ;");
    add_common_flags(sweep, o);

    auto* defend = app.add_subcommand("defend", "evaluate the destriping defense");
    add_common_flags(defend, o);

    auto* report = app.add_subcommand("report", "merge CSVs and plot sweep curves");
    std::vector<std::string> report_inputs;
    report->add_option("--inputs", report_inputs, "CSV files")->expected(-1);
    add_common_flags(report, o);

    CLI11_PARSE(app, argc, argv);

    try {
        CLI::App* cmd = app.get_subcommands().front();
        merge_config(o, cmd);
        if (cmd == simulate) return cmd_simulate(o, image_path, mask_path, phase);
        if (cmd == fixtures) return cmd_fixtures(o, fixture_count);
        if (cmd == calibrate) return cmd_calibrate(o);
        if (cmd == optimize) {
            return cmd_optimize(o, kind_name, budget, pairs_limit, resume_path, min_frequency);
        }
        if (cmd == attack) return cmd_attack(o);
        if (cmd == sweep) return cmd_sweep(o, axis_name, values_text);
        if (cmd == defend) return cmd_defend(o);
        if (cmd == report) return cmd_report(o, report_inputs);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
