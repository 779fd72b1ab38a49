#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "colanet/dataset.hpp"
#include "colanet/plasticity.hpp"
#include "colanet/topology.hpp"

namespace colanet {

/// The tunable search-space parameters. Values left unset fall back to the
/// network description (microcolumn count, alpha) or the built-in defaults
/// (learning rates, weight range).
struct Hyperparameters {
    std::optional<double> d_d;
    std::optional<double> ratio_dh_dd;
    std::optional<double> w_max;
    std::optional<double> w_min;
    std::optional<int> n_microcolumns;
    std::optional<double> alpha;
};

inline constexpr double kDefaultDD = 0.0186;
inline constexpr double kDefaultRatio = 0.582;
inline constexpr double kDefaultWMax = 0.328;
inline constexpr double kDefaultWMin = -0.00746;

/// A network plus its plasticity state, ready to run a stream.
struct SimSession {
    BuiltNetwork built;
    std::unique_ptr<PlasticityEngine> plasticity;
    std::int32_t data_base = 0;    // first input node of the data receptor
    std::int32_t label_node = -1;  // input node of the class-label receptor
    std::string readout_section;
};

/// Resizes the microcolumn sections (those sharing the plastic section's
/// size) and instantiates the network with the given hyperparameters.
SimSession make_session(const NetworkConfig& config, const Hyperparameters& hyper,
                        std::uint64_t seed, const BuildOptions& options = {});

struct TrainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TrainOptions {
    /// Abort on more than one WTA spike or dopamine act per column per
    /// 20-tick window.
    bool enforce_choreography = true;
    std::ostream* spike_log = nullptr;  // per spike: tick \t section \t index
};

struct ChoreographyStats {
    std::int64_t windows = 0;
    int max_wta_spikes_per_window = 0;
    int max_dopamine_acts_per_window = 0;
    std::int64_t wta_violations = 0;       // windows with > 1 WTA spike in a column
    std::int64_t dopamine_violations = 0;  // windows with > 1 dopamine act in a column
    std::int64_t early_forcing_arrivals = 0;  // forcing spikes reaching a plastic
                                              // neuron before window tick 10
};

struct TrainReport {
    ChoreographyStats choreography;
    std::map<std::string, std::int64_t> spikes_per_section;
    std::int64_t dopamine_acts = 0;
    std::int64_t depression_acts = 0;
};

/// Runs the training region [0, learning_time) with plasticity enabled and
/// the label node driving the stream's target channel.
TrainReport train(SimSession& session, const AssembledStream& stream,
                  const TrainOptions& options = {});

struct Prediction {
    std::int64_t window = 0;  // index into stream.windows
    bool positive = false;
    Label truth = Label::unlabeled;
};

/// Runs the test region with plasticity frozen and label nodes silent.
/// A window is predicted positive iff the readout section spikes in it.
std::vector<Prediction> infer(SimSession& session, const AssembledStream& stream);

struct RunReport {
    std::int64_t tp = 0, fp = 0, tn = 0, fn = 0;
    double precision = 0.0, recall = 0.0, f_measure = 0.0;
    std::map<std::string, std::int64_t> spikes_per_section;
};

RunReport evaluate(const std::vector<Prediction>& predictions);

std::string run_report_json(const RunReport& report);

/// Weight dump: one CSV row per resource entry of every plastic neuron:
/// neuron_index,synapse_index,input_section,W,w (silent entries have input
/// section "silent" and no weight).
void write_weight_dump(const SimSession& session, std::ostream& out);

/// Plastic-state serialization, enough to rebuild an evaluable network.
std::string state_to_json(const SimSession& session, const Hyperparameters& hyper);
Hyperparameters state_hyperparameters(const std::string& json_text);
void load_state(SimSession& session, const std::string& json_text);

}  // namespace colanet
