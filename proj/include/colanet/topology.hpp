#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "colanet/engine.hpp"
#include "colanet/plasticity.hpp"

namespace colanet {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ReceptorSpec {
    std::string name;
    int n = 0;
    std::string lib;                       // "fromFile", "StateClassifier", ...
    std::optional<std::string> args_type;  // <args type="...">
    std::optional<std::string> source;
    std::optional<std::string> target_file;
    std::optional<std::int64_t> spike_period;
    std::optional<std::int64_t> state_duration;
    std::optional<std::int64_t> learning_time;
};

struct SectionSpec {
    std::string name;
    int n = 0;
    double chartime = 0.0;
    std::optional<std::string> structure_type;
    std::optional<int> structure_dimension;
    // Plasticity properties, present on sections with plastic inputs.
    std::optional<double> weight_inc;
    std::optional<double> dopamine_plasticity_time;
    std::optional<double> max_tssisi;
    std::optional<double> stability_resource_change_ratio;
    std::optional<double> minweight;
    std::optional<double> maxweight;
    bool three_factor_plasticity = false;
    std::optional<int> nsilentsynapses;
    std::optional<double> hebbian_plasticity_chartime_ratio;
};

enum class LinkPolicy : std::uint8_t { dense, aligned, all_to_all_sections, exclusive };

struct ValueRange {
    double min = 0.0;
    double max = 0.0;
};

struct LinkSpec {
    std::string from;
    std::string to;
    LinkPolicy policy = LinkPolicy::dense;
    SynapseKind kind = SynapseKind::fixed;
    std::optional<double> weight;
    std::optional<ValueRange> ini_resource;    // plastic links only
    std::optional<std::string> ini_resource_type;
    std::optional<ValueRange> delay;
    std::optional<std::string> delay_type;
    double probability = 1.0;
    int maxnpre = std::numeric_limits<int>::max();
    bool has_probability = false;
    bool has_maxnpre = false;
};

struct NetworkConfig {
    std::vector<double> globals;
    std::vector<ReceptorSpec> receptors;
    int ncopies = 1;
    std::vector<SectionSpec> sections;
    std::vector<LinkSpec> links;
    std::optional<std::string> readout_lib;
    std::optional<std::string> readout_section;

    const SectionSpec* section(std::string_view name) const;
    const ReceptorSpec* receptor(std::string_view name) const;
};

/// Parses a network description document. Unknown elements produce warnings
/// (collected into *warnings when given), never failures; malformed XML or
/// missing required fields throw ConfigError.
NetworkConfig parse_config(std::string_view xml_text, std::vector<std::string>* warnings = nullptr);

/// Canonical serialization; numeric values round-trip bit-exactly.
std::string serialize_config(const NetworkConfig& config);

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);

struct BuildOptions {
    bool wta_cross_column = true;  // all-to-all-sections self-links span columns
};

/// Expands a link into (pre, post) pairs in the engine's index spaces.
/// pre is a receptor node index for receptor sources, a neuron index
/// otherwise. Pure; connection sampling for dense links uses `rng`.
struct NeuronIndexer;
std::vector<std::pair<std::int32_t, std::int32_t>> expand_link_policy(
    const LinkSpec& link, const NetworkConfig& config, const NeuronIndexer& indexer, Rng& rng,
    const BuildOptions& options = {});

/// Maps (column, section, member) to flat engine neuron indices.
struct NeuronIndexer {
    int ncopies = 0;
    std::vector<std::string> section_names;
    std::vector<int> section_sizes;
    std::vector<std::int32_t> first_neuron;  // per (column * n_sections + section)

    int section_index(std::string_view name) const;
    std::int32_t neuron(int column, int section, int member) const {
        return first_neuron[static_cast<std::size_t>(column) * section_names.size() +
                            static_cast<std::size_t>(section)] +
               member;
    }
};

struct BuiltNetwork {
    Network net;
    NeuronIndexer indexer;
    // Receptor nodes are laid out in declaration order.
    struct ReceptorRange {
        std::string name;
        std::int32_t first = 0;
        std::int32_t count = 0;
    };
    std::vector<ReceptorRange> receptor_ranges;
    std::vector<PlasticityEngine::UnitSetup> plastic_units;
    // Config-derived plasticity fields (t_h, t_p, n_silent, w range, alpha).
    PlasticityParams config_params;

    std::int32_t receptor_first(std::string_view name) const;
};

/// Instantiates the column/section graph described by a validated config.
BuiltNetwork build_network(const NetworkConfig& config, std::uint64_t seed,
                           const BuildOptions& options = {});

/// Normalized JSON dump of the expanded graph, for debugging and tooling.
std::string topology_json(const NetworkConfig& config, std::uint64_t seed,
                          const BuildOptions& options = {});

}  // namespace colanet
