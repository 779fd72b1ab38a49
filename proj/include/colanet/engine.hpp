#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "colanet/neuron.hpp"
#include "colanet/rng.hpp"

namespace colanet {

struct Synapse {
    std::int32_t pre = 0;                // input node or neuron index, see from_input
    std::int32_t post = 0;               // neuron index
    SynapseKind kind = SynapseKind::fixed;
    bool from_input = false;
    double weight = 0.0;                 // gating: omega; reward: opaque trigger value
    std::int32_t delay = 0;              // ticks >= 0
    std::int64_t last_pre_spike_tick = kNoTick;
};

struct Section {
    std::string name;
    int column = 0;
    std::int32_t first_neuron = 0;
    std::int32_t count = 0;
    double tau_v = 1.0;
    double leak_factor = 0.0;            // exp(-1/tau_v), precomputed
    activity_t initial_activity = kActivityInf;
    bool wta_randomized = false;         // members fire-checked in seeded shuffled order
    bool plastic = false;                // plasticity hooks fire for members
};

/// Receives plasticity-relevant events from the simulation loop. Reward
/// deliveries of a tick are reported before that tick's firings: a reward
/// spike arrives in the delivery phase and therefore refers to the last
/// firing completed before it.
class PlasticityHooks {
public:
    virtual ~PlasticityHooks() = default;
    virtual void on_fire(std::int32_t neuron, std::int64_t tick, bool forced) = 0;
    virtual void on_reward(std::int32_t neuron, std::int64_t tick) = 0;
};

/// Clock-driven simulation core. One instance is a single-owner state
/// machine advanced by tick(); independent instances may run concurrently.
class Network {
public:
    /// Advances the simulation by one tick.
    /// input_spikes: indices of input nodes spiking this tick.
    /// Phase order: pop due deliveries -> leak -> deliver (gating before
    /// potential, rewards collected) -> fire checks (shuffled inside WTA
    /// sections, in-tick gating onto not-yet-checked WTA members) ->
    /// enqueue outgoing spikes -> plasticity notifications (rewards, then
    /// firings) -> activity-time update.
    /// Returns the indices of neurons that fired, in processing order.
    const std::vector<std::int32_t>& tick(std::span<const std::int32_t> input_spikes);

    std::int64_t now() const { return next_tick_; }

    std::int32_t neuron_count() const { return static_cast<std::int32_t>(u_.size()); }
    std::int32_t input_count() const { return n_inputs_; }

    double potential(std::int32_t n) const { return u_[n]; }
    double threshold(std::int32_t n) const { return h_[n]; }
    activity_t activity(std::int32_t n) const { return a_[n]; }
    std::int64_t last_fire_tick(std::int32_t n) const { return last_fire_[n]; }
    bool last_fire_forced(std::int32_t n) const { return last_forced_[n]; }

    void set_threshold(std::int32_t n, double h) { h_[n] = h; }
    void set_activity(std::int32_t n, activity_t a) { a_[n] = a; }

    const std::vector<Section>& sections() const { return sections_; }
    const Section& section_of(std::int32_t n) const { return sections_[section_of_[n]]; }

    const Synapse& synapse(std::int32_t s) const { return synapses_[s]; }
    std::size_t synapse_count() const { return synapses_.size(); }
    void set_synapse_weight(std::int32_t s, double w) { synapses_[s].weight = w; }

    void set_plasticity_hooks(PlasticityHooks* hooks) { hooks_ = hooks; }

    /// Optional spike observer: (tick, section, local index within section).
    using SpikeObserver = std::function<void(std::int64_t, const Section&, std::int32_t)>;
    void set_spike_observer(SpikeObserver obs) { observer_ = std::move(obs); }

private:
    friend class NetworkBuilder;

    void deliver(std::int32_t syn_index);
    void handle_fire(std::int32_t n, bool forced);

    // Static structure.
    std::int32_t n_inputs_ = 0;
    std::vector<Section> sections_;
    std::vector<std::int32_t> section_of_;
    std::vector<Synapse> synapses_;
    std::vector<std::int32_t> neuron_out_begin_;   // CSR over synapses sorted by pre
    std::vector<std::int32_t> neuron_out_index_;
    std::vector<std::int32_t> input_out_begin_;
    std::vector<std::int32_t> input_out_index_;

    // Neuron state.
    std::vector<double> u_;
    std::vector<double> h_;
    std::vector<activity_t> a_;
    std::vector<std::int64_t> last_fire_;
    std::vector<std::uint8_t> last_forced_;

    // Per-tick scratch, stamped with the current tick instead of cleared.
    std::vector<std::int64_t> fixed_input_stamp_;
    std::vector<std::int64_t> processed_stamp_;

    // Delayed spike queue: ring of synapse-index lists keyed by delivery tick.
    std::vector<std::vector<std::int32_t>> queue_;
    std::int64_t next_tick_ = 0;

    std::vector<std::int32_t> fired_;
    std::vector<std::int32_t> deliveries_;         // due this tick
    std::vector<std::pair<std::int32_t, std::int64_t>> pending_rewards_;
    std::vector<std::int32_t> eligible_scratch_;

    Rng wta_rng_{0};
    PlasticityHooks* hooks_ = nullptr;
    SpikeObserver observer_;
};

/// Assembles a Network. The topology module drives this from a parsed
/// configuration; tests use it directly for small hand-built circuits.
class NetworkBuilder {
public:
    std::int32_t add_input_nodes(std::int32_t count);

    /// Returns the index of the first neuron of the new section.
    std::int32_t add_section(std::string name, int column, std::int32_t count, double tau_v,
                             activity_t initial_activity, bool wta_randomized = false,
                             bool plastic = false);

    std::int32_t add_synapse(std::int32_t pre, std::int32_t post, SynapseKind kind, double weight,
                             std::int32_t delay, bool from_input);

    Network build(std::uint64_t seed);

private:
    std::int32_t n_inputs_ = 0;
    std::int32_t n_neurons_ = 0;
    std::vector<Section> sections_;
    std::vector<Synapse> synapses_;
};

}  // namespace colanet
