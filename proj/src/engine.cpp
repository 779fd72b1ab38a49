#include "colanet/engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace colanet {

namespace {
constexpr std::int64_t kMinQueueSlots = 4;
}

const std::vector<std::int32_t>& Network::tick(std::span<const std::int32_t> input_spikes) {
    const std::int64_t now = next_tick_;
    fired_.clear();
    deliveries_.clear();
    pending_rewards_.clear();

    // Phase 1: deliveries due now. Queued events first, then zero-delay
    // input spikes. Events enqueued during a tick always target a strictly
    // later tick, so the slot for `now` is complete at this point.
    auto& due = queue_[static_cast<std::size_t>(now % static_cast<std::int64_t>(queue_.size()))];
    deliveries_.swap(due);
    for (std::int32_t node : input_spikes) {
        for (std::int32_t i = input_out_begin_[node]; i < input_out_begin_[node + 1]; ++i) {
            const std::int32_t s = input_out_index_[i];
            const std::int32_t d = synapses_[s].delay;
            if (d == 0) {
                deliveries_.push_back(s);
            } else {
                queue_[static_cast<std::size_t>((now + d) % static_cast<std::int64_t>(queue_.size()))]
                    .push_back(s);
            }
        }
    }

    // Phase 2: leak, including inactive neurons.
    for (const Section& sec : sections_) {
        for (std::int32_t n = sec.first_neuron; n < sec.first_neuron + sec.count; ++n) {
            u_[n] *= sec.leak_factor;
        }
    }

    // Phase 3: spike delivery. Gating spikes settle the activity regime for
    // this tick before any potential-changing spike is integrated (a neuron
    // gated active and driven in the same tick must integrate that drive).
    for (std::int32_t s : deliveries_) {
        Synapse& syn = synapses_[s];
        if (syn.kind != SynapseKind::gating) continue;
        syn.last_pre_spike_tick = now;
        a_[syn.post] = apply_gating(a_[syn.post], static_cast<activity_t>(std::lround(syn.weight)));
    }
    for (std::int32_t s : deliveries_) {
        Synapse& syn = synapses_[s];
        switch (syn.kind) {
            case SynapseKind::gating:
                break;
            case SynapseKind::reward:
                syn.last_pre_spike_tick = now;
                pending_rewards_.emplace_back(syn.post, now);
                break;
            case SynapseKind::fixed:
                syn.last_pre_spike_tick = now;
                fixed_input_stamp_[syn.post] = now;
                if (is_active(a_[syn.post])) u_[syn.post] += syn.weight;
                break;
            case SynapseKind::plastic:
                syn.last_pre_spike_tick = now;
                if (is_active(a_[syn.post])) u_[syn.post] += syn.weight;
                break;
        }
    }

    // Phases 4-5: fire checks and outgoing spikes. WTA sections are checked
    // in seeded shuffled member order and a winner's gating spikes suppress
    // the not-yet-checked members within the same tick; everything else runs
    // in index order and goes through the queue.
    for (const Section& sec : sections_) {
        if (sec.wta_randomized) {
            eligible_scratch_.clear();
            for (std::int32_t n = sec.first_neuron; n < sec.first_neuron + sec.count; ++n) {
                if (is_active(a_[n]) && u_[n] > h_[n]) eligible_scratch_.push_back(n);
            }
            if (eligible_scratch_.size() > 1) wta_rng_.shuffle(eligible_scratch_);
            for (std::int32_t n : eligible_scratch_) {
                // Re-check: an earlier winner may have gated this one off.
                NeuronState st{u_[n], h_[n], a_[n], last_fire_[n], last_forced_[n] != 0};
                FireResult r = fire_check(st, fixed_input_stamp_[n] == now, now);
                processed_stamp_[n] = now;
                if (!r.fired) continue;
                u_[n] = st.u;
                last_fire_[n] = now;
                last_forced_[n] = r.forced ? 1 : 0;
                handle_fire(n, r.forced);
            }
            for (std::int32_t n = sec.first_neuron; n < sec.first_neuron + sec.count; ++n) {
                processed_stamp_[n] = now;
            }
        } else {
            for (std::int32_t n = sec.first_neuron; n < sec.first_neuron + sec.count; ++n) {
                NeuronState st{u_[n], h_[n], a_[n], last_fire_[n], last_forced_[n] != 0};
                FireResult r = fire_check(st, fixed_input_stamp_[n] == now, now);
                processed_stamp_[n] = now;
                if (!r.fired) continue;
                u_[n] = st.u;
                last_fire_[n] = now;
                last_forced_[n] = r.forced ? 1 : 0;
                handle_fire(n, r.forced);
            }
        }
    }

    // Phase 6: plasticity notifications, reward arrivals first.
    if (hooks_) {
        for (auto [post, t] : pending_rewards_) {
            if (sections_[section_of_[post]].plastic) hooks_->on_reward(post, t);
        }
        for (std::int32_t n : fired_) {
            if (sections_[section_of_[n]].plastic) hooks_->on_fire(n, now, last_forced_[n] != 0);
        }
    }

    // Phase 7: activity-time update.
    for (auto& a : a_) a = step_activity(a);

    ++next_tick_;
    return fired_;
}

void Network::handle_fire(std::int32_t n, bool /*forced*/) {
    const std::int64_t now = next_tick_;
    fired_.push_back(n);
    if (observer_) {
        const Section& sec = sections_[section_of_[n]];
        observer_(now, sec, n - sec.first_neuron);
    }
    const bool emitter_is_wta = sections_[section_of_[n]].wta_randomized;
    for (std::int32_t i = neuron_out_begin_[n]; i < neuron_out_begin_[n + 1]; ++i) {
        const std::int32_t s = neuron_out_index_[i];
        const Synapse& syn = synapses_[s];
        if (emitter_is_wta && syn.kind == SynapseKind::gating &&
            sections_[section_of_[syn.post]].wta_randomized && processed_stamp_[syn.post] != now) {
            a_[syn.post] =
                apply_gating(a_[syn.post], static_cast<activity_t>(std::lround(syn.weight)));
            continue;
        }
        // Zero-delay synaptic transmission completes at the next tick's
        // delivery phase; longer delays land exactly emit + delay.
        const std::int64_t deliver = now + std::max<std::int64_t>(syn.delay, 1);
        queue_[static_cast<std::size_t>(deliver % static_cast<std::int64_t>(queue_.size()))]
            .push_back(s);
    }
}

std::int32_t NetworkBuilder::add_input_nodes(std::int32_t count) {
    const std::int32_t first = n_inputs_;
    n_inputs_ += count;
    return first;
}

std::int32_t NetworkBuilder::add_section(std::string name, int column, std::int32_t count,
                                         double tau_v, activity_t initial_activity,
                                         bool wta_randomized, bool plastic) {
    if (tau_v <= 0) throw std::invalid_argument("section '" + name + "': tau_v must be > 0");
    Section sec;
    sec.name = std::move(name);
    sec.column = column;
    sec.first_neuron = n_neurons_;
    sec.count = count;
    sec.tau_v = tau_v;
    sec.leak_factor = std::exp(-1.0 / tau_v);
    sec.initial_activity = initial_activity;
    sec.wta_randomized = wta_randomized;
    sec.plastic = plastic;
    sections_.push_back(std::move(sec));
    n_neurons_ += count;
    return sections_.back().first_neuron;
}

std::int32_t NetworkBuilder::add_synapse(std::int32_t pre, std::int32_t post, SynapseKind kind,
                                         double weight, std::int32_t delay, bool from_input) {
    if (kind == SynapseKind::gating && std::lround(weight) == 0) {
        throw std::invalid_argument("gating synapse weight must be a nonzero integer");
    }
    if (delay < 0) throw std::invalid_argument("synapse delay must be >= 0");
    Synapse s;
    s.pre = pre;
    s.post = post;
    s.kind = kind;
    s.weight = weight;
    s.delay = delay;
    s.from_input = from_input;
    synapses_.push_back(s);
    return static_cast<std::int32_t>(synapses_.size() - 1);
}

Network NetworkBuilder::build(std::uint64_t seed) {
    Network net;
    net.n_inputs_ = n_inputs_;
    net.sections_ = sections_;
    net.synapses_ = synapses_;

    net.section_of_.assign(static_cast<std::size_t>(n_neurons_), 0);
    for (std::size_t si = 0; si < net.sections_.size(); ++si) {
        const Section& sec = net.sections_[si];
        for (std::int32_t n = sec.first_neuron; n < sec.first_neuron + sec.count; ++n) {
            net.section_of_[n] = static_cast<std::int32_t>(si);
        }
    }

    auto build_csr = [&](bool from_input, std::int32_t n_pre, std::vector<std::int32_t>& begin,
                         std::vector<std::int32_t>& index) {
        begin.assign(static_cast<std::size_t>(n_pre) + 1, 0);
        for (std::size_t s = 0; s < net.synapses_.size(); ++s) {
            if (net.synapses_[s].from_input == from_input) ++begin[net.synapses_[s].pre + 1];
        }
        for (std::size_t i = 1; i < begin.size(); ++i) begin[i] += begin[i - 1];
        index.assign(static_cast<std::size_t>(begin.back()), 0);
        std::vector<std::int32_t> cursor(begin.begin(), begin.end() - 1);
        for (std::size_t s = 0; s < net.synapses_.size(); ++s) {
            if (net.synapses_[s].from_input == from_input) {
                index[cursor[net.synapses_[s].pre]++] = static_cast<std::int32_t>(s);
            }
        }
    };
    build_csr(false, n_neurons_, net.neuron_out_begin_, net.neuron_out_index_);
    build_csr(true, n_inputs_, net.input_out_begin_, net.input_out_index_);

    net.u_.assign(static_cast<std::size_t>(n_neurons_), 0.0);
    net.h_.assign(static_cast<std::size_t>(n_neurons_), 1.0);
    net.a_.assign(static_cast<std::size_t>(n_neurons_), kActivityInf);
    for (const Section& sec : net.sections_) {
        for (std::int32_t n = sec.first_neuron; n < sec.first_neuron + sec.count; ++n) {
            net.a_[n] = sec.initial_activity;
        }
    }
    net.last_fire_.assign(static_cast<std::size_t>(n_neurons_), kNoTick);
    net.last_forced_.assign(static_cast<std::size_t>(n_neurons_), 0);
    net.fixed_input_stamp_.assign(static_cast<std::size_t>(n_neurons_), kNoTick);
    net.processed_stamp_.assign(static_cast<std::size_t>(n_neurons_), kNoTick);

    std::int64_t max_delay = 1;
    for (const Synapse& s : net.synapses_) max_delay = std::max<std::int64_t>(max_delay, s.delay);
    net.queue_.assign(static_cast<std::size_t>(std::max(max_delay + 2, kMinQueueSlots)), {});

    net.wta_rng_ = Rng(derive_seed(seed, "wta-order"));
    return net;
}

}  // namespace colanet
