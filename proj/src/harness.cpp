#include "colanet/harness.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

namespace colanet {

namespace {

NetworkConfig apply_microcolumns(NetworkConfig config, int n_micro) {
    // The microcolumn sections are the ones sized like the plastic section.
    int plastic_n = -1;
    for (const LinkSpec& link : config.links) {
        if (link.kind == SynapseKind::plastic) {
            plastic_n = config.section(link.to)->n;
            break;
        }
    }
    if (plastic_n < 0) return config;
    for (SectionSpec& sec : config.sections) {
        if (sec.n == plastic_n) sec.n = n_micro;
    }
    return config;
}

}  // namespace

SimSession make_session(const NetworkConfig& config, const Hyperparameters& hyper,
                        std::uint64_t seed, const BuildOptions& options) {
    NetworkConfig effective = config;
    if (hyper.n_microcolumns) effective = apply_microcolumns(std::move(effective), *hyper.n_microcolumns);

    SimSession session;
    session.built = build_network(effective, seed, options);

    PlasticityParams params = session.built.config_params;
    params.w_min = hyper.w_min.value_or(kDefaultWMin);
    params.w_max = hyper.w_max.value_or(kDefaultWMax);
    params.d_d = hyper.d_d.value_or(kDefaultDD);
    params.d_h = params.d_d * hyper.ratio_dh_dd.value_or(kDefaultRatio);
    if (hyper.alpha) params.alpha = *hyper.alpha;
    session.plasticity = std::make_unique<PlasticityEngine>(session.built.net, params,
                                                            session.built.plastic_units);
    session.built.net.set_plasticity_hooks(session.plasticity.get());

    // The data receptor feeds the plastic synapses; the label receptor is
    // the remaining one with outgoing links.
    std::string data_name;
    for (const LinkSpec& link : effective.links) {
        if (link.kind == SynapseKind::plastic && effective.receptor(link.from)) {
            data_name = link.from;
            break;
        }
    }
    if (data_name.empty()) throw ConfigError("no plastic receptor link in configuration");
    session.data_base = session.built.receptor_first(data_name);
    for (const auto& range : session.built.receptor_ranges) {
        if (range.name != data_name) {
            session.label_node = range.first;
            break;
        }
    }
    session.readout_section = effective.readout_section.value_or("OUT");
    return session;
}

namespace {

/// Per-tick bookkeeping shared by train(). Counts WTA spikes and dopamine
/// acts per column per 20-tick window and watches forcing-spike arrivals at
/// plastic neurons during the first half of a window.
class ChoreographyMonitor {
public:
    ChoreographyMonitor(const Network& net, const PlasticityEngine& plasticity)
        : net_(net), plasticity_(plasticity) {
        int max_column = 0;
        for (const Section& sec : net.sections()) max_column = std::max(max_column, sec.column);
        wta_counts_.assign(static_cast<std::size_t>(max_column) + 1, 0);
        dopamine_counts_.assign(static_cast<std::size_t>(max_column) + 1, 0);

        // Forcing synapses: fixed neuron-to-neuron links onto plastic
        // sections (the label-driven bias path).
        for (std::size_t s = 0; s < net.synapse_count(); ++s) {
            const Synapse& syn = net.synapse(static_cast<std::int32_t>(s));
            if (!syn.from_input && syn.kind == SynapseKind::fixed &&
                net.section_of(syn.post).plastic) {
                forcing_synapses_.push_back(static_cast<std::int32_t>(s));
            }
        }
    }

    void window_boundary(std::int64_t window_index, bool enforce) {
        for (std::size_t c = 0; c < wta_counts_.size(); ++c) {
            stats_.max_wta_spikes_per_window =
                std::max(stats_.max_wta_spikes_per_window, wta_counts_[c]);
            stats_.max_dopamine_acts_per_window =
                std::max(stats_.max_dopamine_acts_per_window, dopamine_counts_[c]);
            if (wta_counts_[c] > 1) ++stats_.wta_violations;
            if (dopamine_counts_[c] > 1) ++stats_.dopamine_violations;
            if (enforce && (wta_counts_[c] > 1 || dopamine_counts_[c] > 1)) {
                throw TrainError("choreography violation in window " +
                                 std::to_string(window_index) + ", column " + std::to_string(c) +
                                 ": " + std::to_string(wta_counts_[c]) + " WTA spikes, " +
                                 std::to_string(dopamine_counts_[c]) + " dopamine acts");
            }
            wta_counts_[c] = 0;
            dopamine_counts_[c] = 0;
        }
        ++stats_.windows;
    }

    void on_spike(std::int64_t tick, const Section& sec) {
        if (sec.wta_randomized) ++wta_counts_[static_cast<std::size_t>(sec.column)];
        // A forcing neuron's fixed spikes arrive one tick later (zero-delay
        // transmission completes next tick).
        (void)tick;
    }

    void note_forcing_fire(std::int64_t tick, std::int32_t neuron) {
        for (std::int32_t s : forcing_synapses_) {
            const Synapse& syn = net_.synapse(s);
            if (syn.pre != neuron) continue;
            const std::int64_t arrival = tick + std::max<std::int32_t>(syn.delay, 1);
            if (arrival % kWindowTicks < kIntervalTicks) ++stats_.early_forcing_arrivals;
            break;  // one arrival event per fire is enough for the statistic
        }
    }

    bool is_forcing_source(std::int32_t neuron) const {
        for (std::int32_t s : forcing_synapses_) {
            if (net_.synapse(s).pre == neuron) return true;
        }
        return false;
    }

    void consume_dopamine_log() {
        const auto& log = plasticity_.dopamine_log();
        for (; dopamine_cursor_ < log.size(); ++dopamine_cursor_) {
            const Section& sec = net_.section_of(log[dopamine_cursor_].neuron);
            ++dopamine_counts_[static_cast<std::size_t>(sec.column)];
        }
    }

    ChoreographyStats take_stats() { return stats_; }

private:
    const Network& net_;
    const PlasticityEngine& plasticity_;
    std::vector<int> wta_counts_;
    std::vector<int> dopamine_counts_;
    std::vector<std::int32_t> forcing_synapses_;
    std::size_t dopamine_cursor_ = 0;
    ChoreographyStats stats_;
};

void collect_inputs(const AssembledStream& stream, std::int64_t t, std::int32_t data_base,
                    std::int32_t label_node, std::vector<std::int32_t>& inputs) {
    inputs.clear();
    for (std::int64_t i = stream.spike_offsets[t]; i < stream.spike_offsets[t + 1]; ++i) {
        inputs.push_back(data_base + stream.spike_nodes[static_cast<std::size_t>(i)]);
    }
    if (label_node >= 0 && stream.label_active[static_cast<std::size_t>(t)]) {
        inputs.push_back(label_node);
    }
}

}  // namespace

TrainReport train(SimSession& session, const AssembledStream& stream, const TrainOptions& options) {
    Network& net = session.built.net;
    PlasticityEngine& plasticity = *session.plasticity;
    plasticity.set_frozen(false);

    TrainReport report;
    ChoreographyMonitor monitor(net, plasticity);
    const std::size_t depressions_before = plasticity.depression_log().size();
    const std::size_t dopamine_before = plasticity.dopamine_log().size();

    net.set_spike_observer([&](std::int64_t tick, const Section& sec, std::int32_t local) {
        monitor.on_spike(tick, sec);
        report.spikes_per_section[sec.name] += 1;
        if (options.spike_log) {
            (*options.spike_log) << tick << '\t' << sec.name << '\t' << local << '\n';
        }
    });

    std::vector<std::int32_t> inputs;
    for (std::int64_t t = 0; t < stream.learning_time; ++t) {
        collect_inputs(stream, t, session.data_base, session.label_node, inputs);
        const auto& fired = net.tick(inputs);
        for (std::int32_t n : fired) {
            if (monitor.is_forcing_source(n)) monitor.note_forcing_fire(t, n);
        }
        monitor.consume_dopamine_log();
        if ((t + 1) % kWindowTicks == 0) {
            monitor.window_boundary(t / kWindowTicks, options.enforce_choreography);
        }
    }
    net.set_spike_observer(nullptr);

    report.choreography = monitor.take_stats();
    report.dopamine_acts =
        static_cast<std::int64_t>(plasticity.dopamine_log().size() - dopamine_before);
    report.depression_acts =
        static_cast<std::int64_t>(plasticity.depression_log().size() - depressions_before);
    return report;
}

std::vector<Prediction> infer(SimSession& session, const AssembledStream& stream) {
    Network& net = session.built.net;
    session.plasticity->set_frozen(true);

    std::int64_t readout_spikes_this_window = 0;
    net.set_spike_observer([&](std::int64_t, const Section& sec, std::int32_t) {
        if (sec.name == session.readout_section) ++readout_spikes_this_window;
    });

    std::vector<Prediction> predictions;
    std::vector<std::int32_t> inputs;
    for (std::size_t w = 0; w < stream.windows.size(); ++w) {
        const StreamWindow& window = stream.windows[w];
        if (window.train) continue;
        readout_spikes_this_window = 0;
        for (std::int64_t t = window.start_tick; t < window.start_tick + kWindowTicks; ++t) {
            // Label nodes are silent in the inference regime.
            collect_inputs(stream, t, session.data_base, -1, inputs);
            net.tick(inputs);
        }
        predictions.push_back({static_cast<std::int64_t>(w), readout_spikes_this_window > 0,
                               window.label});
    }
    net.set_spike_observer(nullptr);
    return predictions;
}

RunReport evaluate(const std::vector<Prediction>& predictions) {
    RunReport r;
    for (const Prediction& p : predictions) {
        const bool truth = p.truth == Label::good;
        if (p.positive && truth) ++r.tp;
        if (p.positive && !truth) ++r.fp;
        if (!p.positive && truth) ++r.fn;
        if (!p.positive && !truth) ++r.tn;
    }
    r.precision = r.tp + r.fp > 0 ? static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fp) : 0.0;
    r.recall = r.tp + r.fn > 0 ? static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fn) : 0.0;
    r.f_measure = r.precision + r.recall > 0.0
                      ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
                      : 0.0;
    return r;
}

std::string run_report_json(const RunReport& report) {
    nlohmann::json j;
    j["tp"] = report.tp;
    j["fp"] = report.fp;
    j["tn"] = report.tn;
    j["fn"] = report.fn;
    j["precision"] = report.precision;
    j["recall"] = report.recall;
    j["f_measure"] = report.f_measure;
    j["spikes_per_section"] = report.spikes_per_section;
    return j.dump(2);
}

void write_weight_dump(const SimSession& session, std::ostream& out) {
    const PlasticityEngine& plasticity = *session.plasticity;
    const Network& net = session.built.net;
    out << "neuron_index,synapse_index,input_section,W,w\n";
    for (std::size_t u = 0; u < plasticity.unit_count(); ++u) {
        const auto resources = plasticity.resources(u);
        const auto weights = plasticity.weights(u);
        const auto synapses = plasticity.unit_synapses(u);
        for (std::size_t e = 0; e < resources.size(); ++e) {
            out << plasticity.unit_neuron(u) << ',' << e << ',';
            if (e < synapses.size()) {
                const Synapse& syn = net.synapse(synapses[e]);
                std::string section = "?";
                for (const auto& range : session.built.receptor_ranges) {
                    if (syn.pre >= range.first && syn.pre < range.first + range.count) {
                        section = range.name;
                        break;
                    }
                }
                out << section << ',' << format_double(resources[e]) << ','
                    << format_double(weights[e]) << '\n';
            } else {
                out << "silent," << format_double(resources[e]) << ",\n";
            }
        }
    }
}

std::string state_to_json(const SimSession& session, const Hyperparameters& hyper) {
    nlohmann::json j;
    const PlasticityEngine& plasticity = *session.plasticity;
    j["hyperparameters"] = nlohmann::json::object();
    if (hyper.d_d) j["hyperparameters"]["d_d"] = *hyper.d_d;
    if (hyper.ratio_dh_dd) j["hyperparameters"]["ratio_dh_dd"] = *hyper.ratio_dh_dd;
    if (hyper.w_max) j["hyperparameters"]["w_max"] = *hyper.w_max;
    if (hyper.w_min) j["hyperparameters"]["w_min"] = *hyper.w_min;
    if (hyper.n_microcolumns) j["hyperparameters"]["n_microcolumns"] = *hyper.n_microcolumns;
    if (hyper.alpha) j["hyperparameters"]["alpha"] = *hyper.alpha;
    j["units"] = nlohmann::json::array();
    for (std::size_t u = 0; u < plasticity.unit_count(); ++u) {
        const auto resources = plasticity.resources(u);
        j["units"].push_back({{"neuron", plasticity.unit_neuron(u)},
                              {"resources", std::vector<double>(resources.begin(), resources.end())}});
    }
    return j.dump(2);
}

Hyperparameters state_hyperparameters(const std::string& json_text) {
    nlohmann::json j = nlohmann::json::parse(json_text);
    Hyperparameters hyper;
    const auto& h = j.at("hyperparameters");
    if (h.contains("d_d")) hyper.d_d = h["d_d"].get<double>();
    if (h.contains("ratio_dh_dd")) hyper.ratio_dh_dd = h["ratio_dh_dd"].get<double>();
    if (h.contains("w_max")) hyper.w_max = h["w_max"].get<double>();
    if (h.contains("w_min")) hyper.w_min = h["w_min"].get<double>();
    if (h.contains("n_microcolumns")) hyper.n_microcolumns = h["n_microcolumns"].get<int>();
    if (h.contains("alpha")) hyper.alpha = h["alpha"].get<double>();
    return hyper;
}

void load_state(SimSession& session, const std::string& json_text) {
    nlohmann::json j = nlohmann::json::parse(json_text);
    PlasticityEngine& plasticity = *session.plasticity;
    const auto& units = j.at("units");
    if (units.size() != plasticity.unit_count()) {
        throw std::runtime_error("state has " + std::to_string(units.size()) +
                                 " plastic units, network has " +
                                 std::to_string(plasticity.unit_count()));
    }
    for (std::size_t u = 0; u < units.size(); ++u) {
        if (units[u].at("neuron").get<std::int32_t>() != plasticity.unit_neuron(u)) {
            throw std::runtime_error("state unit order does not match the network");
        }
        const auto resources = units[u].at("resources").get<std::vector<double>>();
        plasticity.set_resources(u, resources);
    }
}

}  // namespace colanet
