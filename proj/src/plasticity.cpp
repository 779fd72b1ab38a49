#include "colanet/plasticity.hpp"

#include <cassert>
#include <numeric>
#include <stdexcept>

namespace colanet {

PlasticityEngine::PlasticityEngine(Network& net, PlasticityParams params,
                                   std::vector<UnitSetup> units)
    : net_(net), params_(params) {
    if (!(params_.w_min < params_.w_max)) throw std::invalid_argument("w_min must be < w_max");
    if (params_.d_d <= 0 || params_.d_h < 0) throw std::invalid_argument("bad learning rates");
    if (params_.alpha < 0 || params_.alpha >= 1) throw std::invalid_argument("alpha must be in [0,1)");
    if (params_.t_h <= 0 || params_.t_p <= 0) throw std::invalid_argument("bad plasticity windows");
    if (params_.n_silent < 0) throw std::invalid_argument("n_silent must be >= 0");

    unit_of_neuron_.assign(static_cast<std::size_t>(net.neuron_count()), -1);
    units_.reserve(units.size());
    std::size_t max_entries = 0;
    for (auto& setup : units) {
        Unit u;
        u.neuron = setup.neuron;
        u.synapses = std::move(setup.synapses);
        u.n_connected = static_cast<std::int32_t>(u.synapses.size());
        u.w_resource = std::move(setup.initial_resources);
        assert(static_cast<std::int32_t>(u.w_resource.size()) == u.n_connected);
        u.w_resource.resize(u.w_resource.size() + static_cast<std::size_t>(params_.n_silent), 0.0);
        u.weight.assign(static_cast<std::size_t>(u.n_connected), 0.0);
        u.initial_total = std::accumulate(u.w_resource.begin(), u.w_resource.end(), 0.0);
        unit_of_neuron_[u.neuron] = static_cast<std::int32_t>(units_.size());
        max_entries = std::max(max_entries, u.w_resource.size());
        units_.push_back(std::move(u));
    }
    eligible_mask_.assign(max_entries, 0);
    for (Unit& u : units_) write_back(u);
}

PlasticityEngine::Unit* PlasticityEngine::find_unit(std::int32_t neuron) {
    const std::int32_t idx = unit_of_neuron_[neuron];
    return idx < 0 ? nullptr : &units_[idx];
}

void PlasticityEngine::write_back(Unit& unit) {
    double positive_sum = 0.0;
    for (std::int32_t e = 0; e < unit.n_connected; ++e) {
        const double w = resource_to_weight(unit.w_resource[e], params_.w_min, params_.w_max);
        unit.weight[e] = w;
        if (w > 0.0) positive_sum += w;
        net_.set_synapse_weight(unit.synapses[e], w);
    }
    net_.set_threshold(unit.neuron, 1.0 + params_.alpha * positive_sum);
}

void PlasticityEngine::apply_act(Unit& unit, std::span<const std::int32_t> eligible, double delta) {
    const std::size_t n = unit.w_resource.size();
    const std::size_t k = eligible.size();
    if (k == 0) return;
    if (k == n) {
        // Every entry changed: the total cannot be preserved by compensation.
        ++degenerate_acts_;
        for (std::int32_t e : eligible) unit.w_resource[e] += delta;
        write_back(unit);
        return;
    }
    for (std::int32_t e : eligible) eligible_mask_[e] = 1;
    const double compensation = -(static_cast<double>(k) * delta) / static_cast<double>(n - k);
    for (std::size_t e = 0; e < n; ++e) {
        unit.w_resource[e] += eligible_mask_[e] ? delta : compensation;
    }
    for (std::int32_t e : eligible) eligible_mask_[e] = 0;
    write_back(unit);
}

void PlasticityEngine::on_fire(std::int32_t neuron, std::int64_t tick, bool forced) {
    if (frozen_) return;
    Unit* unit = find_unit(neuron);
    if (!unit) return;

    FiringRecord rec;
    rec.fire_tick = tick;
    rec.forced = forced;
    for (std::int32_t e = 0; e < unit->n_connected; ++e) {
        const std::int64_t lp = net_.synapse(unit->synapses[e]).last_pre_spike_tick;
        if (lp != kNoTick && tick - lp <= params_.t_h) rec.eligible.push_back(e);
    }
    if (!forced && !rec.eligible.empty()) {
        rec.snapshot = unit->w_resource;
        rec.depression_applied = true;
        apply_act(*unit, rec.eligible, -params_.d_h);
        depression_log_.push_back({tick, neuron});
    }
    unit->record = std::move(rec);
}

void PlasticityEngine::on_reward(std::int32_t neuron, std::int64_t tick) {
    if (frozen_) return;
    Unit* unit = find_unit(neuron);
    if (!unit) return;
    FiringRecord& rec = unit->record;
    if (rec.fire_tick == kNoTick) return;
    if (tick - rec.fire_tick > params_.t_p) return;

    // If this firing was depressed, the dopamine spike first cancels that
    // act exactly (snapshot restore, so the d_D == d_H case is bit-exact),
    // then the remaining d_D - d_H is applied as a single act.
    double delta = params_.d_d;
    if (rec.depression_applied) {
        unit->w_resource = rec.snapshot;
        rec.depression_applied = false;
        delta = params_.d_d - params_.d_h;
        if (delta == 0.0) write_back(*unit);
    }
    if (delta != 0.0 && !rec.eligible.empty()) {
        apply_act(*unit, rec.eligible, delta);
    }
    dopamine_log_.push_back({tick, neuron});
}

void PlasticityEngine::set_resources(std::size_t u, std::span<const double> w_resource) {
    Unit& unit = units_[u];
    if (w_resource.size() != unit.w_resource.size()) {
        throw std::invalid_argument("resource vector size mismatch");
    }
    std::copy(w_resource.begin(), w_resource.end(), unit.w_resource.begin());
    unit.record = {};
    write_back(unit);
}

}  // namespace colanet
