#include "colanet/topology.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <map>
#include <sstream>

#include <json.hpp>

#include "colanet/xml.hpp"

namespace colanet {

namespace {

double parse_number(const std::string& text, const std::string& what) {
    const char* begin = text.c_str();
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end == begin || end != begin + text.size()) {
        throw ConfigError("invalid number '" + text + "' in " + what);
    }
    return v;
}

int parse_int(const std::string& text, const std::string& what) {
    double v = parse_number(text, what);
    double r = std::round(v);
    if (std::abs(v - r) > 1e-9) throw ConfigError(what + " must be an integer, got '" + text + "'");
    return static_cast<int>(r);
}

const std::string& require_text(const XmlNode& node, const std::string& what) {
    if (node.text.empty()) throw ConfigError(what + " has no value");
    return node.text;
}

void warn(std::vector<std::string>* warnings, const std::string& msg) {
    if (warnings) warnings->push_back(msg);
}

ValueRange parse_range(const XmlNode& node, const std::string& what) {
    const XmlNode* mn = node.child("min");
    const XmlNode* mx = node.child("max");
    if (!mn || !mx) throw ConfigError(what + " needs <min> and <max>");
    ValueRange r;
    r.min = parse_number(require_text(*mn, what + " min"), what);
    r.max = parse_number(require_text(*mx, what + " max"), what);
    if (r.min > r.max) throw ConfigError(what + ": min > max");
    return r;
}

ReceptorSpec parse_receptor(const XmlNode& node, std::vector<std::string>* warnings) {
    ReceptorSpec rec;
    const std::string* name = node.attr("name");
    const std::string* n = node.attr("n");
    if (!name || !n) throw ConfigError("RECEPTORS needs name and n attributes");
    rec.name = *name;
    rec.n = parse_int(*n, "RECEPTORS n");
    if (rec.n < 1) throw ConfigError("RECEPTORS '" + rec.name + "': n must be >= 1");
    if (const XmlNode* impl = node.child("Implementation")) {
        if (const std::string* lib = impl->attr("lib")) rec.lib = *lib;
        if (const XmlNode* args = impl->child("args")) {
            if (const std::string* t = args->attr("type")) rec.args_type = *t;
            for (const XmlNode& a : args->children) {
                if (a.name == "source") {
                    rec.source = a.text;
                } else if (a.name == "target_file") {
                    rec.target_file = a.text;
                } else if (a.name == "spike_period") {
                    rec.spike_period = parse_int(require_text(a, a.name), a.name);
                } else if (a.name == "state_duration") {
                    rec.state_duration = parse_int(require_text(a, a.name), a.name);
                } else if (a.name == "learning_time") {
                    rec.learning_time = parse_int(require_text(a, a.name), a.name);
                } else {
                    warn(warnings, "unknown receptor arg <" + a.name + "> ignored");
                }
            }
        }
    }
    return rec;
}

SectionSpec parse_section(const XmlNode& node, std::vector<std::string>* warnings) {
    SectionSpec sec;
    const std::string* name = node.attr("name");
    if (!name) throw ConfigError("Section needs a name attribute");
    sec.name = *name;
    const XmlNode* props = node.child("props");
    if (!props) throw ConfigError("section '" + sec.name + "': missing <props>");
    bool have_n = false;
    bool have_chartime = false;
    for (const XmlNode& p : props->children) {
        const std::string what = "section '" + sec.name + "' <" + p.name + ">";
        if (p.name == "n") {
            sec.n = parse_int(require_text(p, what), what);
            have_n = true;
        } else if (p.name == "chartime") {
            sec.chartime = parse_number(require_text(p, what), what);
            have_chartime = true;
        } else if (p.name == "Structure") {
            if (const std::string* t = p.attr("type")) sec.structure_type = *t;
            if (const std::string* d = p.attr("dimension")) {
                sec.structure_dimension = parse_int(*d, what + " dimension");
            }
        } else if (p.name == "weight_inc") {
            sec.weight_inc = parse_number(require_text(p, what), what);
        } else if (p.name == "dopamine_plasticity_time") {
            sec.dopamine_plasticity_time = parse_number(require_text(p, what), what);
        } else if (p.name == "maxTSSISI") {
            sec.max_tssisi = parse_number(require_text(p, what), what);
        } else if (p.name == "stability_resource_change_ratio") {
            sec.stability_resource_change_ratio = parse_number(require_text(p, what), what);
        } else if (p.name == "minweight") {
            sec.minweight = parse_number(require_text(p, what), what);
        } else if (p.name == "maxweight") {
            sec.maxweight = parse_number(require_text(p, what), what);
        } else if (p.name == "three_factor_plasticity") {
            sec.three_factor_plasticity = true;
        } else if (p.name == "nsilentsynapses") {
            sec.nsilentsynapses = parse_int(require_text(p, what), what);
        } else if (p.name == "hebbian_plasticity_chartime_ratio") {
            sec.hebbian_plasticity_chartime_ratio = parse_number(require_text(p, what), what);
        } else {
            warn(warnings, "unknown section prop <" + p.name + "> ignored");
        }
    }
    if (!have_n) throw ConfigError("section '" + sec.name + "': missing required field n");
    if (!have_chartime) {
        throw ConfigError("section '" + sec.name + "': missing required field chartime");
    }
    if (sec.n < 1) throw ConfigError("section '" + sec.name + "': n must be >= 1");
    if (sec.chartime <= 0) throw ConfigError("section '" + sec.name + "': chartime must be > 0");
    return sec;
}

LinkSpec parse_link(const XmlNode& node, std::vector<std::string>* warnings) {
    LinkSpec link;
    const std::string* from = node.attr("from");
    const std::string* to = node.attr("to");
    if (!from || !to) throw ConfigError("Link needs from and to attributes");
    link.from = *from;
    link.to = *to;
    const std::string what = "link " + link.from + "->" + link.to;
    if (const std::string* policy = node.attr("policy")) {
        if (*policy == "aligned") {
            link.policy = LinkPolicy::aligned;
        } else if (*policy == "all-to-all-sections") {
            link.policy = LinkPolicy::all_to_all_sections;
        } else if (*policy == "exclusive") {
            link.policy = LinkPolicy::exclusive;
        } else {
            throw ConfigError(what + ": unknown policy '" + *policy + "'");
        }
    }
    if (const std::string* type = node.attr("type")) {
        if (*type == "plastic") {
            link.kind = SynapseKind::plastic;
        } else if (*type == "gating") {
            link.kind = SynapseKind::gating;
        } else if (*type == "reward") {
            link.kind = SynapseKind::reward;
        } else {
            throw ConfigError(what + ": unknown type '" + *type + "'");
        }
    }
    for (const XmlNode& c : node.children) {
        if (c.name == "weight") {
            link.weight = parse_number(require_text(c, what + " weight"), what);
        } else if (c.name == "IniResource") {
            link.ini_resource = parse_range(c, what + " IniResource");
            if (const std::string* t = c.attr("type")) link.ini_resource_type = *t;
        } else if (c.name == "Delay") {
            link.delay = parse_range(c, what + " Delay");
            if (const std::string* t = c.attr("type")) link.delay_type = *t;
            if (link.delay->min < 0) throw ConfigError(what + ": delay must be >= 0");
        } else if (c.name == "probability") {
            link.probability = parse_number(require_text(c, what + " probability"), what);
            link.has_probability = true;
            if (link.probability < 0 || link.probability > 1) {
                throw ConfigError(what + ": probability must be in [0, 1]");
            }
        } else if (c.name == "maxnpre") {
            link.maxnpre = parse_int(require_text(c, what + " maxnpre"), what);
            link.has_maxnpre = true;
            if (link.maxnpre < 0) throw ConfigError(what + ": maxnpre must be >= 0");
        } else {
            warn(warnings, "unknown link element <" + c.name + "> ignored");
        }
    }
    if (link.kind == SynapseKind::plastic) {
        if (!link.ini_resource) throw ConfigError(what + ": plastic link needs IniResource");
        if (link.weight) throw ConfigError(what + ": plastic link carries IniResource, not weight");
    } else {
        if (!link.weight) throw ConfigError(what + ": missing weight");
        if (link.kind == SynapseKind::gating && std::lround(*link.weight) == 0) {
            throw ConfigError(what + ": gating weight must be nonzero");
        }
    }
    return link;
}

void validate(const NetworkConfig& config) {
    for (std::size_t i = 0; i < config.sections.size(); ++i) {
        for (std::size_t j = i + 1; j < config.sections.size(); ++j) {
            if (config.sections[i].name == config.sections[j].name) {
                throw ConfigError("duplicate section name '" + config.sections[i].name + "'");
            }
        }
    }
    auto known = [&](const std::string& name) {
        return config.section(name) != nullptr || config.receptor(name) != nullptr;
    };
    for (const LinkSpec& link : config.links) {
        if (!known(link.from)) throw ConfigError("link endpoint '" + link.from + "' is not defined");
        if (!known(link.to)) throw ConfigError("link endpoint '" + link.to + "' is not defined");
        if (config.receptor(link.to)) {
            throw ConfigError("link target '" + link.to + "' is a receptor");
        }
        if (link.kind == SynapseKind::plastic) {
            const SectionSpec* target = config.section(link.to);
            const std::string pfx = "section '" + target->name + "': plastic target missing ";
            if (!target->minweight) throw ConfigError(pfx + "minweight");
            if (!target->maxweight) throw ConfigError(pfx + "maxweight");
            if (!target->nsilentsynapses) throw ConfigError(pfx + "nsilentsynapses");
            if (!target->hebbian_plasticity_chartime_ratio) {
                throw ConfigError(pfx + "hebbian_plasticity_chartime_ratio");
            }
            if (!target->dopamine_plasticity_time) {
                throw ConfigError(pfx + "dopamine_plasticity_time");
            }
            if (*target->minweight >= *target->maxweight) {
                throw ConfigError("section '" + target->name + "': minweight must be < maxweight");
            }
        }
    }
    if (config.ncopies < 1) throw ConfigError("ncopies must be >= 1");
}

}  // namespace

const SectionSpec* NetworkConfig::section(std::string_view name) const {
    for (const SectionSpec& s : sections) {
        if (s.name == name) return &s;
    }
    return nullptr;
}

const ReceptorSpec* NetworkConfig::receptor(std::string_view name) const {
    for (const ReceptorSpec& r : receptors) {
        if (r.name == name) return &r;
    }
    return nullptr;
}

NetworkConfig parse_config(std::string_view xml_text, std::vector<std::string>* warnings) {
    XmlNode root = xml_parse(xml_text);
    if (root.name != "SNN") throw ConfigError("root element must be <SNN>, got <" + root.name + ">");

    NetworkConfig config;
    const XmlNode* network = nullptr;
    for (const XmlNode& c : root.children) {
        if (c.name == "Global") {
            config.globals.push_back(parse_number(require_text(c, "Global"), "Global"));
        } else if (c.name == "RECEPTORS") {
            config.receptors.push_back(parse_receptor(c, warnings));
        } else if (c.name == "NETWORK") {
            network = &c;
        } else if (c.name == "Readout") {
            if (const std::string* lib = c.attr("lib")) config.readout_lib = *lib;
            if (const XmlNode* out = c.child("output")) config.readout_section = out->text;
        } else {
            warn(warnings, "unknown element <" + c.name + "> ignored");
        }
    }
    if (network) {
        if (const std::string* n = network->attr("ncopies")) {
            config.ncopies = parse_int(*n, "ncopies");
        }
        const XmlNode* sections = network->child("Sections");
        if (sections) {
            for (const XmlNode& c : sections->children) {
                if (c.name == "Section") {
                    config.sections.push_back(parse_section(c, warnings));
                } else if (c.name == "Link") {
                    config.links.push_back(parse_link(c, warnings));
                } else {
                    warn(warnings, "unknown element <" + c.name + "> in Sections ignored");
                }
            }
        }
    }
    validate(config);
    return config;
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

namespace {

class XmlWriter {
public:
    void open(const std::string& tag) {
        line() << '<' << tag << '>';
        tags_.push_back(tag);
        ++depth_;
    }

    void open_attrs(const std::string& tag,
                    const std::vector<std::pair<std::string, std::string>>& attrs) {
        auto& os = line();
        os << '<' << tag;
        for (const auto& [k, v] : attrs) os << ' ' << k << "=\"" << v << '"';
        os << '>';
        tags_.push_back(tag);
        ++depth_;
    }

    void close() {
        --depth_;
        line() << "</" << tags_.back() << '>';
        tags_.pop_back();
    }

    void leaf(const std::string& tag, const std::string& text) {
        line() << '<' << tag << '>' << text << "</" << tag << '>';
    }

    std::string str() const { return out_.str(); }

    std::ostringstream& line() {
        if (!first_) out_ << '\n';
        first_ = false;
        for (int i = 0; i < depth_; ++i) out_ << "  ";
        return out_;
    }

private:
    std::ostringstream out_;
    std::vector<std::string> tags_;
    int depth_ = 0;
    bool first_ = true;
};

}  // namespace

std::string serialize_config(const NetworkConfig& config) {
    XmlWriter w;
    w.line() << "<?xml version=\"1.0\" encoding=\"utf-8\"?>";
    w.open("SNN");
    for (double g : config.globals) w.leaf("Global", format_double(g));
    for (const ReceptorSpec& rec : config.receptors) {
        w.open_attrs("RECEPTORS", {{"name", rec.name}, {"n", std::to_string(rec.n)}});
        w.open_attrs("Implementation", {{"lib", rec.lib}});
        if (rec.args_type) {
            w.open_attrs("args", {{"type", *rec.args_type}});
        } else {
            w.open("args");
        }
        if (rec.source) w.leaf("source", *rec.source);
        if (rec.target_file) w.leaf("target_file", *rec.target_file);
        if (rec.spike_period) w.leaf("spike_period", std::to_string(*rec.spike_period));
        if (rec.state_duration) w.leaf("state_duration", std::to_string(*rec.state_duration));
        if (rec.learning_time) w.leaf("learning_time", std::to_string(*rec.learning_time));
        w.close();
        w.close();
        w.close();
    }
    w.open_attrs("NETWORK", {{"ncopies", std::to_string(config.ncopies)}});
    w.open("Sections");
    for (const SectionSpec& sec : config.sections) {
        w.open_attrs("Section", {{"name", sec.name}});
        w.open("props");
        w.leaf("n", std::to_string(sec.n));
        if (sec.structure_type) {
            std::vector<std::pair<std::string, std::string>> attrs{{"type", *sec.structure_type}};
            if (sec.structure_dimension) {
                attrs.emplace_back("dimension", std::to_string(*sec.structure_dimension));
            }
            w.open_attrs("Structure", attrs);
            w.close();
        }
        w.leaf("chartime", format_double(sec.chartime));
        if (sec.weight_inc) w.leaf("weight_inc", format_double(*sec.weight_inc));
        if (sec.dopamine_plasticity_time) {
            w.leaf("dopamine_plasticity_time", format_double(*sec.dopamine_plasticity_time));
        }
        if (sec.max_tssisi) w.leaf("maxTSSISI", format_double(*sec.max_tssisi));
        if (sec.stability_resource_change_ratio) {
            w.leaf("stability_resource_change_ratio",
                   format_double(*sec.stability_resource_change_ratio));
        }
        if (sec.minweight) w.leaf("minweight", format_double(*sec.minweight));
        if (sec.maxweight) w.leaf("maxweight", format_double(*sec.maxweight));
        if (sec.three_factor_plasticity) {
            w.open("three_factor_plasticity");
            w.close();
        }
        if (sec.nsilentsynapses) w.leaf("nsilentsynapses", std::to_string(*sec.nsilentsynapses));
        if (sec.hebbian_plasticity_chartime_ratio) {
            w.leaf("hebbian_plasticity_chartime_ratio",
                   format_double(*sec.hebbian_plasticity_chartime_ratio));
        }
        w.close();
        w.close();
    }
    for (const LinkSpec& link : config.links) {
        std::vector<std::pair<std::string, std::string>> attrs{{"from", link.from},
                                                               {"to", link.to}};
        switch (link.policy) {
            case LinkPolicy::dense:
                break;
            case LinkPolicy::aligned:
                attrs.emplace_back("policy", "aligned");
                break;
            case LinkPolicy::all_to_all_sections:
                attrs.emplace_back("policy", "all-to-all-sections");
                break;
            case LinkPolicy::exclusive:
                attrs.emplace_back("policy", "exclusive");
                break;
        }
        switch (link.kind) {
            case SynapseKind::fixed:
                break;
            case SynapseKind::plastic:
                attrs.emplace_back("type", "plastic");
                break;
            case SynapseKind::gating:
                attrs.emplace_back("type", "gating");
                break;
            case SynapseKind::reward:
                attrs.emplace_back("type", "reward");
                break;
        }
        w.open_attrs("Link", attrs);
        if (link.ini_resource) {
            w.open_attrs("IniResource",
                         {{"type", link.ini_resource_type.value_or("uni")}});
            w.leaf("min", format_double(link.ini_resource->min));
            w.leaf("max", format_double(link.ini_resource->max));
            w.close();
        }
        if (link.weight) w.leaf("weight", format_double(*link.weight));
        if (link.delay) {
            w.open_attrs("Delay", {{"type", link.delay_type.value_or("uni")}});
            w.leaf("min", format_double(link.delay->min));
            w.leaf("max", format_double(link.delay->max));
            w.close();
        }
        if (link.has_probability) w.leaf("probability", format_double(link.probability));
        if (link.has_maxnpre) w.leaf("maxnpre", std::to_string(link.maxnpre));
        w.close();
    }
    w.close();
    w.close();
    if (config.readout_lib || config.readout_section) {
        w.open_attrs("Readout", {{"lib", config.readout_lib.value_or("")}});
        if (config.readout_section) w.leaf("output", *config.readout_section);
        w.close();
    }
    w.close();
    std::string out = w.str();
    out += '\n';
    return out;
}

int NeuronIndexer::section_index(std::string_view name) const {
    for (std::size_t i = 0; i < section_names.size(); ++i) {
        if (section_names[i] == name) return static_cast<int>(i);
    }
    return -1;
}

namespace {

std::int32_t receptor_node_base(const NetworkConfig& config, std::string_view name) {
    std::int32_t base = 0;
    for (const ReceptorSpec& r : config.receptors) {
        if (r.name == name) return base;
        base += r.n;
    }
    throw ConfigError("unknown receptor '" + std::string(name) + "'");
}

}  // namespace

std::vector<std::pair<std::int32_t, std::int32_t>> expand_link_policy(
    const LinkSpec& link, const NetworkConfig& config, const NeuronIndexer& indexer, Rng& rng,
    const BuildOptions& options) {
    std::vector<std::pair<std::int32_t, std::int32_t>> pairs;
    const bool from_receptor = config.receptor(link.from) != nullptr;
    const SectionSpec* to_sec = config.section(link.to);
    if (!to_sec) throw ConfigError("link target '" + link.to + "' is not a section");
    const int to_idx = indexer.section_index(link.to);
    const int n_to = to_sec->n;
    const int ncopies = config.ncopies;

    if (from_receptor) {
        const ReceptorSpec* rec = config.receptor(link.from);
        const std::int32_t base = receptor_node_base(config, link.from);
        switch (link.policy) {
            case LinkPolicy::dense: {
                // Every receptor node to every target neuron in every column,
                // Bernoulli-sampled with a per-target presynaptic cap.
                for (int c = 0; c < ncopies; ++c) {
                    for (int j = 0; j < n_to; ++j) {
                        int accepted = 0;
                        for (int i = 0; i < rec->n && accepted < link.maxnpre; ++i) {
                            if (link.probability < 1.0 && rng.uniform() >= link.probability) {
                                continue;
                            }
                            pairs.emplace_back(base + i, indexer.neuron(c, to_idx, j));
                            ++accepted;
                        }
                    }
                }
                break;
            }
            case LinkPolicy::aligned: {
                // One receptor node per column, broadcast within its column.
                if (rec->n != ncopies) {
                    throw ConfigError("aligned link " + link.from + "->" + link.to +
                                      ": receptor count " + std::to_string(rec->n) +
                                      " must equal ncopies " + std::to_string(ncopies));
                }
                for (int c = 0; c < ncopies; ++c) {
                    for (int j = 0; j < n_to; ++j) {
                        pairs.emplace_back(base + c, indexer.neuron(c, to_idx, j));
                    }
                }
                break;
            }
            case LinkPolicy::exclusive: {
                if (rec->n != ncopies) {
                    throw ConfigError("exclusive link " + link.from + "->" + link.to +
                                      ": receptor count must equal ncopies");
                }
                for (int c = 0; c < ncopies; ++c) {
                    for (int tc = 0; tc < ncopies; ++tc) {
                        if (tc == c) continue;
                        for (int j = 0; j < n_to; ++j) {
                            pairs.emplace_back(base + c, indexer.neuron(tc, to_idx, j));
                        }
                    }
                }
                break;
            }
            case LinkPolicy::all_to_all_sections:
                throw ConfigError("all-to-all-sections is not defined for receptor sources");
        }
        return pairs;
    }

    const SectionSpec* from_sec = config.section(link.from);
    if (!from_sec) throw ConfigError("link source '" + link.from + "' is not defined");
    const int from_idx = indexer.section_index(link.from);
    const int n_from = from_sec->n;

    switch (link.policy) {
        case LinkPolicy::dense: {
            for (int c = 0; c < ncopies; ++c) {
                for (int j = 0; j < n_to; ++j) {
                    int accepted = 0;
                    for (int i = 0; i < n_from && accepted < link.maxnpre; ++i) {
                        if (link.probability < 1.0 && rng.uniform() >= link.probability) continue;
                        pairs.emplace_back(indexer.neuron(c, from_idx, i),
                                           indexer.neuron(c, to_idx, j));
                        ++accepted;
                    }
                }
            }
            break;
        }
        case LinkPolicy::aligned: {
            if (n_from > 1 && n_from < n_to) {
                throw ConfigError("aligned link " + link.from + "->" + link.to +
                                  ": cannot align " + std::to_string(n_from) + " onto " +
                                  std::to_string(n_to));
            }
            for (int c = 0; c < ncopies; ++c) {
                if (n_from == 1) {
                    for (int j = 0; j < n_to; ++j) {
                        pairs.emplace_back(indexer.neuron(c, from_idx, 0),
                                           indexer.neuron(c, to_idx, j));
                    }
                } else {
                    for (int i = 0; i < n_from; ++i) {
                        pairs.emplace_back(indexer.neuron(c, from_idx, i),
                                           indexer.neuron(c, to_idx, i % n_to));
                    }
                }
            }
            break;
        }
        case LinkPolicy::all_to_all_sections: {
            // Self-pairs are included: a winner's firing must suppress the
            // winner itself for the rest of the presentation, not only its
            // rivals.
            const bool same_section = link.from == link.to;
            const bool cross = options.wta_cross_column || !same_section;
            for (int c = 0; c < ncopies; ++c) {
                for (int i = 0; i < n_from; ++i) {
                    for (int tc = 0; tc < ncopies; ++tc) {
                        if (!cross && tc != c) continue;
                        for (int j = 0; j < n_to; ++j) {
                            pairs.emplace_back(indexer.neuron(c, from_idx, i),
                                               indexer.neuron(tc, to_idx, j));
                        }
                    }
                }
            }
            break;
        }
        case LinkPolicy::exclusive: {
            for (int c = 0; c < ncopies; ++c) {
                for (int i = 0; i < n_from; ++i) {
                    for (int tc = 0; tc < ncopies; ++tc) {
                        if (tc == c) continue;
                        for (int j = 0; j < n_to; ++j) {
                            pairs.emplace_back(indexer.neuron(c, from_idx, i),
                                               indexer.neuron(tc, to_idx, j));
                        }
                    }
                }
            }
            break;
        }
    }
    return pairs;
}

BuiltNetwork build_network(const NetworkConfig& config, std::uint64_t seed,
                           const BuildOptions& options) {
    validate(config);
    Rng rng(derive_seed(seed, "build"));

    // Structural roles. A section is WTA-like iff it gates itself; a section
    // starts inactive iff it emits reward spikes (it must wait for its WTA
    // activation); a section is plastic iff it is the target of a plastic
    // link.
    std::vector<std::string> wta_sections;
    std::vector<std::string> reward_sources;
    std::vector<std::string> plastic_targets;
    for (const LinkSpec& link : config.links) {
        if (link.kind == SynapseKind::gating && link.from == link.to) {
            wta_sections.push_back(link.from);
        }
        if (link.kind == SynapseKind::reward) reward_sources.push_back(link.from);
        if (link.kind == SynapseKind::plastic) plastic_targets.push_back(link.to);
    }
    auto contains = [](const std::vector<std::string>& v, const std::string& s) {
        return std::find(v.begin(), v.end(), s) != v.end();
    };

    BuiltNetwork built;
    NetworkBuilder builder;

    std::int32_t input_base = 0;
    for (const ReceptorSpec& rec : config.receptors) {
        builder.add_input_nodes(rec.n);
        built.receptor_ranges.push_back({rec.name, input_base, rec.n});
        input_base += rec.n;
    }

    NeuronIndexer& indexer = built.indexer;
    indexer.ncopies = config.ncopies;
    for (const SectionSpec& sec : config.sections) {
        indexer.section_names.push_back(sec.name);
        indexer.section_sizes.push_back(sec.n);
    }
    indexer.first_neuron.resize(static_cast<std::size_t>(config.ncopies) *
                                config.sections.size());
    for (int c = 0; c < config.ncopies; ++c) {
        for (std::size_t s = 0; s < config.sections.size(); ++s) {
            const SectionSpec& sec = config.sections[s];
            const activity_t a0 = contains(reward_sources, sec.name) ? 0 : kActivityInf;
            const std::int32_t first = builder.add_section(
                sec.name, c, sec.n, sec.chartime, a0, contains(wta_sections, sec.name),
                contains(plastic_targets, sec.name));
            indexer.first_neuron[static_cast<std::size_t>(c) * config.sections.size() + s] = first;
        }
    }

    // Expand links and create synapses. Plastic synapses start with weight 0;
    // the plasticity engine derives their weights from the initial resources.
    std::map<std::int32_t, PlasticityEngine::UnitSetup> plastic_by_neuron;
    for (const LinkSpec& link : config.links) {
        const bool from_receptor = config.receptor(link.from) != nullptr;
        auto pairs = expand_link_policy(link, config, indexer, rng, options);
        for (auto [pre, post] : pairs) {
            std::int32_t delay = 0;
            if (link.delay) {
                delay = link.delay->min == link.delay->max
                            ? static_cast<std::int32_t>(std::lround(link.delay->min))
                            : static_cast<std::int32_t>(rng.uniform_int(
                                  std::lround(link.delay->min), std::lround(link.delay->max)));
            }
            const double weight = link.kind == SynapseKind::plastic ? 0.0 : *link.weight;
            const std::int32_t syn =
                builder.add_synapse(pre, post, link.kind, weight, delay, from_receptor);
            if (link.kind == SynapseKind::plastic) {
                const ValueRange& r = *link.ini_resource;
                const double w0 = r.min == r.max ? r.min : rng.uniform(r.min, r.max);
                auto& unit = plastic_by_neuron[post];
                unit.neuron = post;
                unit.synapses.push_back(syn);
                unit.initial_resources.push_back(w0);
            }
        }
    }
    // Plastic sections get a unit for every member, even if connection
    // sampling left a member without synapses.
    for (int c = 0; c < config.ncopies; ++c) {
        for (std::size_t s = 0; s < config.sections.size(); ++s) {
            const SectionSpec& sec = config.sections[s];
            if (!contains(plastic_targets, sec.name)) continue;
            for (int j = 0; j < sec.n; ++j) {
                const std::int32_t n = indexer.neuron(c, static_cast<int>(s), j);
                plastic_by_neuron[n].neuron = n;
            }
        }
    }
    for (auto& [n, unit] : plastic_by_neuron) built.plastic_units.push_back(std::move(unit));

    built.net = builder.build(seed);

    PlasticityParams params;
    if (!plastic_targets.empty()) {
        const SectionSpec* sec = config.section(plastic_targets.front());
        if (sec->minweight) params.w_min = *sec->minweight;
        if (sec->maxweight) params.w_max = *sec->maxweight;
        if (sec->nsilentsynapses) params.n_silent = *sec->nsilentsynapses;
        if (sec->dopamine_plasticity_time) {
            params.t_p = static_cast<int>(std::lround(*sec->dopamine_plasticity_time));
        }
        if (sec->hebbian_plasticity_chartime_ratio) {
            params.t_h = static_cast<int>(
                std::ceil(*sec->hebbian_plasticity_chartime_ratio * sec->chartime));
        }
    }
    if (config.globals.size() >= 2) params.alpha = config.globals[1];
    built.config_params = params;
    return built;
}

std::int32_t BuiltNetwork::receptor_first(std::string_view name) const {
    for (const ReceptorRange& r : receptor_ranges) {
        if (r.name == name) return r.first;
    }
    throw ConfigError("unknown receptor '" + std::string(name) + "'");
}

std::string topology_json(const NetworkConfig& config, std::uint64_t seed,
                          const BuildOptions& options) {
    BuiltNetwork built = build_network(config, seed, options);
    nlohmann::json j;
    j["ncopies"] = config.ncopies;
    j["receptors"] = nlohmann::json::array();
    for (const auto& r : built.receptor_ranges) {
        j["receptors"].push_back({{"name", r.name}, {"first_node", r.first}, {"count", r.count}});
    }
    j["sections"] = nlohmann::json::array();
    for (const Section& sec : built.net.sections()) {
        j["sections"].push_back({{"name", sec.name},
                                 {"column", sec.column},
                                 {"first_neuron", sec.first_neuron},
                                 {"count", sec.count},
                                 {"tau_v", sec.tau_v},
                                 {"initially_active", sec.initial_activity > 0},
                                 {"wta", sec.wta_randomized},
                                 {"plastic", sec.plastic}});
    }
    j["synapses"] = nlohmann::json::array();
    const char* kind_names[] = {"plastic", "fixed", "gating", "reward"};
    for (std::size_t s = 0; s < built.net.synapse_count(); ++s) {
        const Synapse& syn = built.net.synapse(static_cast<std::int32_t>(s));
        j["synapses"].push_back({{"pre", syn.pre},
                                 {"pre_is_input", syn.from_input},
                                 {"post", syn.post},
                                 {"kind", kind_names[static_cast<int>(syn.kind)]},
                                 {"weight", syn.weight},
                                 {"delay", syn.delay}});
    }
    j["neuron_count"] = built.net.neuron_count();
    j["synapse_count"] = built.net.synapse_count();
    return j.dump(2);
}

}  // namespace colanet
