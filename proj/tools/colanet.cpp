// colanet - command-line front end for the CoLaNET simulator pipeline:
// dataset generation, encoder calibration, training, evaluation, the
// discrete-state oracle and hyperparameter search.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "colanet/dataset.hpp"
#include "colanet/ga.hpp"
#include "colanet/harness.hpp"
#include "colanet/oracle.hpp"
#include "colanet/topology.hpp"

namespace fs = std::filesystem;
using namespace colanet;

namespace {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

fs::path default_outdir() {
    if (const char* env = std::getenv("COLANET_OUT")) return env;
    return "out";
}

Hyperparameters parse_overrides(const std::vector<std::string>& pairs) {
    Hyperparameters hyper;
    for (const std::string& kv : pairs) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw std::runtime_error("override must be key=value: " + kv);
        const std::string key = kv.substr(0, eq);
        const double value = std::stod(kv.substr(eq + 1));
        if (key == "d_d") {
            hyper.d_d = value;
        } else if (key == "ratio_dh_dd") {
            hyper.ratio_dh_dd = value;
        } else if (key == "w_max") {
            hyper.w_max = value;
        } else if (key == "w_min") {
            hyper.w_min = value;
        } else if (key == "n_microcolumns") {
            hyper.n_microcolumns = static_cast<int>(value);
        } else if (key == "alpha") {
            hyper.alpha = value;
        } else {
            throw std::runtime_error("unknown hyperparameter '" + key + "'");
        }
    }
    return hyper;
}

nlohmann::json hyper_json(const Hyperparameters& hyper) {
    nlohmann::json j = nlohmann::json::object();
    j["d_d"] = hyper.d_d.value_or(kDefaultDD);
    j["ratio_dh_dd"] = hyper.ratio_dh_dd.value_or(kDefaultRatio);
    j["w_max"] = hyper.w_max.value_or(kDefaultWMax);
    j["w_min"] = hyper.w_min.value_or(kDefaultWMin);
    if (hyper.n_microcolumns) j["n_microcolumns"] = *hyper.n_microcolumns;
    if (hyper.alpha) j["alpha"] = *hyper.alpha;
    return j;
}

/// Restricts a stream to its training region and re-splits it so a held-out
/// validation slice of the training windows plays the test role. The real
/// test region never reaches the optimizer.
AssembledStream validation_slice(const AssembledStream& stream, double validation_fraction) {
    std::int64_t n_train = 0;
    for (const StreamWindow& w : stream.windows) n_train += w.train ? 1 : 0;
    const auto n_fit = static_cast<std::int64_t>(
        std::floor(static_cast<double>(n_train) * (1.0 - validation_fraction)));

    AssembledStream s;
    const std::int64_t ticks = n_train * kWindowTicks;
    s.learning_time = n_fit * kWindowTicks;
    s.spike_offsets.assign(stream.spike_offsets.begin(),
                           stream.spike_offsets.begin() + ticks + 1);
    s.spike_nodes.assign(stream.spike_nodes.begin(),
                         stream.spike_nodes.begin() + stream.spike_offsets[ticks]);
    s.label_active.assign(stream.label_active.begin(), stream.label_active.begin() + ticks);
    for (std::int64_t t = s.learning_time; t < ticks; ++t) {
        s.label_active[static_cast<std::size_t>(t)] = 0;
    }
    for (std::int64_t w = 0; w < n_train; ++w) {
        StreamWindow win = stream.windows[static_cast<std::size_t>(w)];
        win.train = w < n_fit;
        s.windows.push_back(win);
    }
    return s;
}

int run_gen_data(double seconds, std::uint64_t seed, const fs::path& outdir,
                 const std::string& encoder_path, std::int64_t calibration_ticks, int horizon,
                 bool relabel) {
    Calibration calib;
    if (!encoder_path.empty()) {
        calib = calibration_from_json(read_file(encoder_path));
    } else {
        std::cerr << "calibrating velocity bins on " << calibration_ticks << " ticks\n";
        calib = calibrate_velocity_bins(calibration_ticks, seed);
    }
    fs::create_directories(outdir);
    write_file(outdir / "encoder.json", calibration_to_json(calib));

    const auto ticks = static_cast<std::int64_t>(std::llround(seconds * 1000.0));
    std::cerr << "recording " << ticks << " ticks\n";
    RecordedRun run = record_run(ticks, seed, calib.encoder);

    ExtractOptions opts;
    opts.horizon_ticks = horizon;
    opts.relabel_intervals = relabel;
    std::vector<LabeledInterval> intervals = extract_fragments(run, opts);
    if (intervals.empty()) throw std::runtime_error("no labeled intervals extracted");

    AssembledStream stream = shuffle_and_interleave(intervals, seed);
    write_stream(stream, outdir);

    std::int64_t good = 0;
    for (const auto& iv : intervals) good += iv.label == Label::good ? 1 : 0;
    std::cout << "events: " << run.events.size() << "\n"
              << "intervals: " << intervals.size() << " (good " << good << ", bad "
              << intervals.size() - good << ")\n"
              << "learning_time: " << stream.learning_time << "\n"
              << "wrote " << (outdir / kInputFileName).string() << "\n";
    return 0;
}

int run_train(const fs::path& config_path, const fs::path& data_dir, std::uint64_t seed,
              const fs::path& outdir, const Hyperparameters& hyper, bool enforce,
              const std::string& spike_log_path) {
    NetworkConfig config = parse_config(read_file(config_path));
    AssembledStream stream = read_stream(data_dir);
    SimSession session = make_session(config, hyper, seed);

    TrainOptions options;
    options.enforce_choreography = enforce;
    std::ofstream spike_log;
    if (!spike_log_path.empty()) {
        spike_log.open(spike_log_path, std::ios::binary);
        options.spike_log = &spike_log;
    }
    TrainReport report = train(session, stream, options);

    fs::create_directories(outdir);
    {
        std::ofstream weights(outdir / "weights.csv", std::ios::binary);
        write_weight_dump(session, weights);
    }
    nlohmann::json state = nlohmann::json::parse(state_to_json(session, hyper));
    state["build_seed"] = seed;
    write_file(outdir / "state.json", state.dump(2) + "\n");

    nlohmann::json j;
    j["windows"] = report.choreography.windows;
    j["max_wta_spikes_per_window"] = report.choreography.max_wta_spikes_per_window;
    j["max_dopamine_acts_per_window"] = report.choreography.max_dopamine_acts_per_window;
    j["wta_violations"] = report.choreography.wta_violations;
    j["dopamine_violations"] = report.choreography.dopamine_violations;
    j["early_forcing_arrivals"] = report.choreography.early_forcing_arrivals;
    j["dopamine_acts"] = report.dopamine_acts;
    j["depression_acts"] = report.depression_acts;
    j["spikes_per_section"] = report.spikes_per_section;
    j["hyperparameters"] = hyper_json(hyper);
    write_file(outdir / "train_report.json", j.dump(2) + "\n");
    std::cout << j.dump(2) << "\n";
    return 0;
}

int run_eval(const fs::path& config_path, const fs::path& data_dir, const fs::path& state_path,
             const fs::path& outdir, std::uint64_t seed_override, bool has_seed) {
    NetworkConfig config = parse_config(read_file(config_path));
    AssembledStream stream = read_stream(data_dir);
    const std::string state_text = read_file(state_path);
    Hyperparameters hyper = state_hyperparameters(state_text);
    nlohmann::json state = nlohmann::json::parse(state_text);
    std::uint64_t seed = state.value("build_seed", std::uint64_t{0});
    if (has_seed) seed = seed_override;

    SimSession session = make_session(config, hyper, seed);
    load_state(session, state_text);
    std::vector<Prediction> predictions = infer(session, stream);
    RunReport report = evaluate(predictions);

    fs::create_directories(outdir);
    {
        std::ofstream pred_file(outdir / "predictions.csv", std::ios::binary);
        pred_file << "window,predicted,truth\n";
        for (const Prediction& p : predictions) {
            pred_file << p.window << ',' << (p.positive ? "good" : "bad") << ','
                      << (p.truth == Label::good ? "good" : "bad") << '\n';
        }
    }
    write_file(outdir / "report.json", run_report_json(report) + "\n");
    std::cout << run_report_json(report) << "\n";
    return 0;
}

int run_oracle(const fs::path& data_dir, const std::string& encoder_path, const fs::path& outdir,
               int horizon, bool include_train, std::uint64_t seed, std::int64_t joint_ticks) {
    Calibration calib = calibration_from_json(read_file(encoder_path));
    AssembledStream stream = read_stream(data_dir);
    std::vector<LabeledInterval> intervals = stream_intervals(stream, !include_train);
    // The joint-state map is recomputed deterministically from the seed
    // rather than serialized (it holds one entry per visited discrete code).
    JointCalibration joint = calibrate_joint_states(joint_ticks, seed, calib.encoder);
    RunReport report = theoretical_limit_oracle(intervals, calib.encoder, joint, horizon);
    fs::create_directories(outdir);
    write_file(outdir / "oracle_report.json", run_report_json(report) + "\n");
    std::cout << run_report_json(report) << "\n";
    return 0;
}

int run_optimize(const fs::path& config_path, const fs::path& data_dir, std::uint64_t seed,
                 const fs::path& outdir, int population, int repeats, int jobs,
                 double validation_fraction) {
    NetworkConfig config = parse_config(read_file(config_path));
    AssembledStream full_stream = read_stream(data_dir);
    AssembledStream ga_stream = validation_slice(full_stream, validation_fraction);

    const std::vector<GeneSpec> genes = {
        {"d_d", 0.004, 0.4, false},     {"ratio_dh_dd", 0.0, 1.0, false},
        {"w_max", 0.04, 0.4, false},    {"w_min", -0.4, -0.0004, false},
        {"n_microcolumns", 1, 30, true}, {"alpha", 0.001, 0.3, false},
    };

    GAConfig ga;
    ga.population_size = population;
    ga.repeats_per_eval = repeats;
    ga.jobs = jobs;

    auto fitness = [&](const std::vector<double>& g, std::uint64_t eval_seed) -> double {
        Hyperparameters hyper;
        hyper.d_d = g[0];
        hyper.ratio_dh_dd = g[1];
        hyper.w_max = g[2];
        hyper.w_min = g[3];
        hyper.n_microcolumns = static_cast<int>(g[4]);
        hyper.alpha = g[5];
        try {
            SimSession session = make_session(config, hyper, eval_seed);
            TrainOptions options;
            options.enforce_choreography = true;
            train(session, ga_stream, options);
            RunReport report = evaluate(infer(session, ga_stream));
            return 1.0 - report.f_measure;  // absolute error of the F criterion
        } catch (const TrainError&) {
            return 1.0;  // choreography-breaking settings are worst-case
        }
    };

    GAResult result = genetic_optimize(ga, genes, fitness, seed);

    fs::create_directories(outdir);
    {
        std::ofstream hist(outdir / "ga_history.csv", std::ios::binary);
        hist << "generation,best,mean\n";
        for (const GAGeneration& g : result.history) {
            hist << g.generation << ',' << format_double(g.best_fitness) << ','
                 << format_double(g.mean_fitness) << '\n';
        }
    }
    nlohmann::json best;
    for (std::size_t i = 0; i < genes.size(); ++i) best[genes[i].name] = result.best_genes[i];
    best["fitness"] = result.best_fitness;
    best["generations"] = result.history.size();
    write_file(outdir / "best.json", best.dump(2) + "\n");
    std::cout << best.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"CoLaNET spiking-network simulator pipeline"};
    app.require_subcommand(1);

    std::uint64_t seed = 0;
    double seconds = 2000.0;
    fs::path outdir = default_outdir();
    fs::path config_path;
    fs::path data_dir;
    fs::path state_path;
    std::string encoder_path;
    std::string spike_log_path;
    std::vector<std::string> overrides;
    std::int64_t calibration_ticks = 3'000'000;
    int horizon = kDefaultHorizon;
    bool relabel = false;
    bool no_enforce = false;
    bool include_train = false;
    bool has_seed = false;
    int population = 100;
    int repeats = 4;
    int jobs = 1;
    double validation_fraction = 0.25;

    auto* gen = app.add_subcommand("gen-data", "simulate pong and assemble the labeled stream");
    gen->add_option("--seconds", seconds, "simulated time, seconds")->capture_default_str();
    gen->add_option("--seed", seed, "base seed")->required();
    gen->add_option("-o,--out", outdir, "output directory");
    gen->add_option("--encoder", encoder_path, "reuse an existing encoder.json");
    gen->add_option("--calibration-ticks", calibration_ticks, "velocity calibration length")
        ->capture_default_str();
    gen->add_option("--horizon", horizon, "label lookahead, ticks")->capture_default_str();
    gen->add_flag("--relabel", relabel, "re-label every interval with the frozen-racket check");

    auto* cal = app.add_subcommand("calibrate", "calibrate velocity bins and bin means");
    cal->add_option("--seed", seed, "base seed")->required();
    cal->add_option("--ticks", calibration_ticks, "sample ticks")->capture_default_str();
    cal->add_option("-o,--out", outdir, "output directory");

    auto* trn = app.add_subcommand("train", "train a network on a generated stream");
    trn->add_option("--config", config_path, "network description file")->required();
    trn->add_option("--data", data_dir, "gen-data output directory")->required();
    trn->add_option("--seed", seed, "base seed")->required();
    trn->add_option("-o,--out", outdir, "output directory");
    trn->add_option("--set", overrides, "hyperparameter override key=value");
    trn->add_option("--spike-log", spike_log_path, "write a tick/section/index spike log");
    trn->add_flag("--no-enforce", no_enforce, "do not abort on choreography violations");

    auto* evl = app.add_subcommand("eval", "run the test region and score predictions");
    evl->add_option("--config", config_path, "network description file")->required();
    evl->add_option("--data", data_dir, "gen-data output directory")->required();
    evl->add_option("--state", state_path, "state.json from train")->required();
    evl->add_option("-o,--out", outdir, "output directory");
    evl->add_option("--seed", seed, "override the build seed")->each([&](const std::string&) {
        has_seed = true;
    });

    auto* orc = app.add_subcommand("oracle", "discrete-state accuracy limit on the test set");
    orc->add_option("--data", data_dir, "gen-data output directory")->required();
    orc->add_option("--encoder", encoder_path, "encoder.json with calibration stats")->required();
    orc->add_option("--seed", seed, "calibration seed for the joint-state map")->required();
    orc->add_option("-o,--out", outdir, "output directory");
    orc->add_option("--horizon", horizon, "label lookahead, ticks")->capture_default_str();
    orc->add_option("--joint-ticks", calibration_ticks, "joint-state calibration length")
        ->capture_default_str();
    orc->add_flag("--include-train", include_train, "score the whole stream, not just the test set");

    auto* opt = app.add_subcommand("optimize", "genetic hyperparameter search");
    opt->add_option("--config", config_path, "network description file")->required();
    opt->add_option("--data", data_dir, "gen-data output directory")->required();
    opt->add_option("--seed", seed, "base seed")->required();
    opt->add_option("-o,--out", outdir, "output directory");
    opt->add_option("--population", population, "population size")->capture_default_str();
    opt->add_option("--repeats", repeats, "evaluations per individual")->capture_default_str();
    opt->add_option("--jobs", jobs, "parallel evaluation workers")->capture_default_str();
    opt->add_option("--validation-fraction", validation_fraction,
                    "training-region slice held out for fitness")
        ->capture_default_str();

    auto* dump = app.add_subcommand("topology-dump", "normalized JSON dump of the expanded graph");
    dump->add_option("--config", config_path, "network description file")->required();
    dump->add_option("--seed", seed, "build seed")->capture_default_str();
    dump->add_option("-o,--out", encoder_path, "output file (stdout when omitted)");

    auto* wdump = app.add_subcommand("weights-dump", "weight CSV from a saved state");
    wdump->add_option("--config", config_path, "network description file")->required();
    wdump->add_option("--state", state_path, "state.json from train")->required();
    wdump->add_option("-o,--out", encoder_path, "output file (stdout when omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (gen->parsed()) {
            return run_gen_data(seconds, seed, outdir, encoder_path, calibration_ticks, horizon,
                                relabel);
        }
        if (cal->parsed()) {
            Calibration calib = calibrate_velocity_bins(calibration_ticks, seed);
            fs::create_directories(outdir);
            write_file(outdir / "encoder.json", calibration_to_json(calib));
            std::cout << "wrote " << (outdir / "encoder.json").string() << "\n";
            return 0;
        }
        if (trn->parsed()) {
            return run_train(config_path, data_dir, seed, outdir, parse_overrides(overrides),
                             !no_enforce, spike_log_path);
        }
        if (evl->parsed()) {
            return run_eval(config_path, data_dir, state_path, outdir, seed, has_seed);
        }
        if (orc->parsed()) {
            return run_oracle(data_dir, encoder_path, outdir, horizon, include_train, seed,
                              calibration_ticks);
        }
        if (opt->parsed()) {
            return run_optimize(config_path, data_dir, seed, outdir, population, repeats, jobs,
                                validation_fraction);
        }
        if (dump->parsed()) {
            NetworkConfig config = parse_config(read_file(config_path));
            const std::string json = topology_json(config, seed);
            if (encoder_path.empty()) {
                std::cout << json << "\n";
            } else {
                write_file(encoder_path, json + "\n");
            }
            return 0;
        }
        if (wdump->parsed()) {
            NetworkConfig config = parse_config(read_file(config_path));
            const std::string state_text = read_file(state_path);
            SimSession session =
                make_session(config, state_hyperparameters(state_text),
                             nlohmann::json::parse(state_text).value("build_seed", std::uint64_t{0}));
            load_state(session, state_text);
            if (encoder_path.empty()) {
                write_weight_dump(session, std::cout);
            } else {
                std::ofstream out(encoder_path, std::ios::binary);
                write_weight_dump(session, out);
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
