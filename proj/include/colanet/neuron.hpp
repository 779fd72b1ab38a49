#pragma once

#include <cmath>
#include <cstdint>

#include "colanet/activity.hpp"

namespace colanet {

inline constexpr std::int64_t kNoTick = -1;

struct NeuronState {
    double u = 0.0;                     // membrane potential, threshold-base units
    double h = 1.0;                     // threshold potential, >= 1
    activity_t a = kActivityInf;        // activity time
    std::int64_t last_fire_tick = kNoTick;
    bool last_fire_forced = false;
};

struct SectionParams {
    double tau_v = 1.0;                 // membrane leakage time constant, ticks
    activity_t initial_activity = kActivityInf;
};

/// One tick of the membrane leak: exact integration of du/dt = -u/tau_v.
inline double leak_step(double u, double tau_v) { return u * std::exp(-1.0 / tau_v); }

enum class SynapseKind : std::uint8_t { plastic, fixed, gating, reward };

/// Delta-synapse delivery. Only potential-changing kinds are accepted here;
/// gating spikes go through apply_gating and reward spikes to the plasticity
/// hooks. A spike arriving at an inactive neuron leaves u unchanged, but the
/// presynaptic spike time is recorded either way.
/// Returns false if the synapse kind cannot change the membrane potential.
inline bool integrate_spike(NeuronState& s, SynapseKind kind, double weight) {
    if (kind == SynapseKind::gating || kind == SynapseKind::reward) return false;
    if (is_active(s.a)) s.u += weight;
    return true;
}

struct FireResult {
    bool fired = false;
    bool forced = false;
};

/// Threshold check, to be called after all same-tick deliveries. On firing,
/// h is subtracted from u until u <= h: a super-threshold potential in the
/// continuous model would discharge within the same instant, so the residual
/// above h never survives into the next tick. One spike is emitted per tick
/// regardless of the overshoot.
inline FireResult fire_check(NeuronState& s, bool had_fixed_input_this_tick, std::int64_t now) {
    FireResult r;
    if (!is_active(s.a) || !(s.u > s.h)) return r;
    do {
        s.u -= s.h;
    } while (s.u > s.h);
    r.fired = true;
    r.forced = had_fixed_input_this_tick;
    s.last_fire_tick = now;
    s.last_fire_forced = r.forced;
    return r;
}

}  // namespace colanet
