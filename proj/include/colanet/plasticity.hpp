#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "colanet/engine.hpp"

namespace colanet {

struct PlasticityParams {
    double d_d = 0.0186;        // dopamine resource increment
    double d_h = 0.0186 * 0.582;  // anti-Hebbian resource decrement
    double w_min = -0.00746;
    double w_max = 0.328;
    int t_h = 11;               // Hebbian lookback window, ticks
    int t_p = 10;               // dopamine eligibility window, ticks
    double alpha = 0.005525;    // threshold variability coefficient
    int n_silent = 10;          // imaginary unconnected synapses per neuron
};

/// Resource-to-weight map: w = w_min + (w_max - w_min) max(W,0) / (w_max - w_min + max(W,0)).
/// Monotone nondecreasing in W, range [w_min, w_max).
inline double resource_to_weight(double w_resource, double w_min, double w_max) {
    const double span = w_max - w_min;
    const double pos = w_resource > 0.0 ? w_resource : 0.0;
    return w_min + span * pos / (span + pos);
}

/// Adaptive threshold: h = 1 + alpha * sum_i max(0, w_i) over the connected
/// plastic weights.
inline double adaptive_threshold(std::span<const double> weights, double alpha) {
    double s = 0.0;
    for (double w : weights) {
        if (w > 0.0) s += w;
    }
    return 1.0 + alpha * s;
}

struct DopamineAct {
    std::int64_t tick;
    std::int32_t neuron;
};

struct DepressionAct {
    std::int64_t tick;
    std::int32_t neuron;
};

/// Synaptic-resource state and learning rules for the plastic neurons of one
/// network. Owned by the simulation thread together with the Network it is
/// attached to.
class PlasticityEngine : public PlasticityHooks {
public:
    struct UnitSetup {
        std::int32_t neuron = 0;
        std::vector<std::int32_t> synapses;     // engine synapse ids, one per connected entry
        std::vector<double> initial_resources;  // same length as synapses
    };

    PlasticityEngine(Network& net, PlasticityParams params, std::vector<UnitSetup> units);

    void on_fire(std::int32_t neuron, std::int64_t tick, bool forced) override;
    void on_reward(std::int32_t neuron, std::int64_t tick) override;

    void set_frozen(bool frozen) { frozen_ = frozen; }
    bool frozen() const { return frozen_; }

    const PlasticityParams& params() const { return params_; }

    std::size_t unit_count() const { return units_.size(); }
    std::int32_t unit_neuron(std::size_t u) const { return units_[u].neuron; }
    /// Full resource vector of a unit: connected entries first, then silent.
    std::span<const double> resources(std::size_t u) const { return units_[u].w_resource; }
    std::span<const double> weights(std::size_t u) const { return units_[u].weight; }
    std::span<const std::int32_t> unit_synapses(std::size_t u) const { return units_[u].synapses; }
    double initial_total(std::size_t u) const { return units_[u].initial_total; }
    void set_resources(std::size_t u, std::span<const double> w_resource);

    const std::vector<DopamineAct>& dopamine_log() const { return dopamine_log_; }
    const std::vector<DepressionAct>& depression_log() const { return depression_log_; }
    /// Number of acts where every entry was eligible, making conservation
    /// compensation impossible (logged and skipped).
    int degenerate_acts() const { return degenerate_acts_; }

private:
    struct FiringRecord {
        std::int64_t fire_tick = kNoTick;
        bool forced = false;
        std::vector<std::int32_t> eligible;  // entry indices
        bool depression_applied = false;
        std::vector<double> snapshot;        // pre-depression resources
    };

    struct Unit {
        std::int32_t neuron = 0;
        std::vector<std::int32_t> synapses;
        std::vector<double> w_resource;      // connected + silent entries
        std::vector<double> weight;          // connected entries only
        std::int32_t n_connected = 0;
        double initial_total = 0.0;
        FiringRecord record;
    };

    void apply_act(Unit& unit, std::span<const std::int32_t> eligible, double delta);
    void write_back(Unit& unit);
    Unit* find_unit(std::int32_t neuron);

    Network& net_;
    PlasticityParams params_;
    std::vector<Unit> units_;
    std::vector<std::int32_t> unit_of_neuron_;
    bool frozen_ = false;
    std::vector<DopamineAct> dopamine_log_;
    std::vector<DepressionAct> depression_log_;
    int degenerate_acts_ = 0;
    std::vector<std::uint8_t> eligible_mask_;
};

}  // namespace colanet
