#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "quadbar/algebra.hpp"
#include "quadbar/device.hpp"
#include "quadbar/domain.hpp"

namespace quadbar {

struct TopologyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/**
 * One domain's crossbar array: a square concept-indexed crossbar holding one
 * conductance plane per relation present in the domain. Row and column index
 * space coincide; order is lexicographic so compiled artifacts are stable.
 */
struct ArraySpec {
    Domain domain;
    std::vector<std::string> concepts;
    std::vector<std::string> relations;

    bool has_concept(const std::string& c) const {
        return std::binary_search(concepts.begin(), concepts.end(), c);
    }

    bool has_relation(const std::string& r) const {
        return std::binary_search(relations.begin(), relations.end(), r);
    }
};

/** Identity of one inheritance gate: relation × covering edge. */
struct GateKey {
    std::string rel;
    Domain parent;
    Domain child;

    friend bool operator==(const GateKey&, const GateKey&) = default;
    friend auto operator<=>(const GateKey&, const GateKey&) = default;
};

/** Driver fabric that fans one meta-junction state out to its gates. */
struct BufferTreePlan {
    int fan_out = 4;
    int stages = 0;
    double propagation_delay_ns = 0.0;
};

struct FixtureProvenance {
    std::uint64_t seed = 0;
    std::string generator;
};

/** Explicit junction target states of one array, keyed by relation plane. */
using PlaneTargets = std::map<std::pair<std::string, std::string>, TruthValue>;
using ArrayTargets = std::map<std::string, PlaneTargets>;

/**
 * The compiled crossbar topology: arrays, directed Hasse wiring, unfolded
 * inheritance gates, meta-array states, buffer plan, bridge register bank,
 * per-array explicit junction targets, and the device operating point.
 *
 * Immutable after compile; junction resistances live in the engine's state.
 */
struct CrossbarTopology {
    std::map<Domain, ArraySpec> arrays;
    std::set<std::pair<Domain, Domain>> hasse_edges; // (parent, child) covering pairs
    std::map<GateKey, bool> gates;                   // true = ON
    std::map<std::string, TruthValue> meta_states;   // +1 monotone, -1 non-monotone
    std::map<std::string, bool> transitive_relations; // write-controller cascade table
    BufferTreePlan buffer_plan;
    std::map<std::pair<std::string, Domain>, std::vector<std::pair<std::string, Domain>>>
        bridge_bank;
    DeviceParams device_params;
    std::map<Domain, ArrayTargets> targets;
    std::optional<FixtureProvenance> provenance;

    const ArraySpec& array(const Domain& d) const {
        auto it = arrays.find(d);
        if (it == arrays.end()) throw TopologyError("no array for domain " + d.render());
        return it->second;
    }

    static const PlaneTargets& empty_plane() {
        static const PlaneTargets empty;
        return empty;
    }

    const PlaneTargets& plane(const Domain& d, const std::string& rel) const {
        auto dit = targets.find(d);
        if (dit == targets.end()) return empty_plane();
        auto rit = dit->second.find(rel);
        return rit == dit->second.end() ? empty_plane() : rit->second;
    }

    /** Stored (programmed) junction count across all arrays. */
    std::size_t junction_count() const {
        std::size_t n = 0;
        for (const auto& [d, planes] : targets)
            for (const auto& [r, plane] : planes) n += plane.size();
        return n;
    }

    /**
     * Physical gate-transistor count: each gate G(r, p, c) switches one
     * transistor per gated row line of the parent's r-plane; a relation with
     * no plane in the parent gates nothing.
     */
    std::size_t gate_transistor_count() const {
        std::size_t n = 0;
        for (const auto& [key, on] : gates) {
            const auto& parent = array(key.parent);
            if (parent.has_relation(key.rel)) n += parent.concepts.size();
        }
        return n;
    }

    std::vector<std::pair<std::string, Domain>> bridge_targets(const std::string& concept_id,
                                                               const Domain& d) const {
        auto it = bridge_bank.find({concept_id, d});
        if (it == bridge_bank.end()) return {};
        return it->second;
    }
};

// -- serialization -------------------------------------------------------------

namespace detail {

inline nlohmann::ordered_json device_params_to_json(const DeviceParams& p) {
    nlohmann::ordered_json j;
    j["r_low_ohm"] = p.r_low_ohm;
    j["r_mid_ohm"] = p.r_mid_ohm;
    j["r_high_ohm"] = p.r_high_ohm;
    j["v_read_volt"] = p.v_read_volt;
    j["i_high_threshold_amp"] = p.i_high_threshold_amp;
    j["i_low_threshold_amp"] = p.i_low_threshold_amp;
    j["sigma_log"] = p.sigma_log;
    if (p.noise_enabled())
        j["snr_db"] = p.snr_db;
    else
        j["snr_db"] = "inf";
    nlohmann::ordered_json stages = nlohmann::ordered_json::array();
    for (const auto& [name, ns] : p.cycle_stage_ns) stages.push_back({{"stage", name}, {"ns", ns}});
    j["cycle_stage_ns"] = stages;
    j["register_read_ns"] = p.register_read_ns;
    return j;
}

inline DeviceParams device_params_from_json(const nlohmann::ordered_json& j) {
    DeviceParams p;
    p.r_low_ohm = j.at("r_low_ohm").get<double>();
    p.r_mid_ohm = j.at("r_mid_ohm").get<double>();
    p.r_high_ohm = j.at("r_high_ohm").get<double>();
    p.v_read_volt = j.at("v_read_volt").get<double>();
    p.i_high_threshold_amp = j.at("i_high_threshold_amp").get<double>();
    p.i_low_threshold_amp = j.at("i_low_threshold_amp").get<double>();
    p.sigma_log = j.at("sigma_log").get<double>();
    if (j.at("snr_db").is_string())
        p.snr_db = std::numeric_limits<double>::infinity();
    else
        p.snr_db = j.at("snr_db").get<double>();
    p.cycle_stage_ns.clear();
    for (const auto& s : j.at("cycle_stage_ns"))
        p.cycle_stage_ns.emplace_back(s.at("stage").get<std::string>(), s.at("ns").get<double>());
    p.register_read_ns = j.at("register_read_ns").get<double>();
    return p;
}

} // namespace detail

/** Self-describing topology document; stable across runs for byte-diffing. */
inline nlohmann::ordered_json topology_to_json(const CrossbarTopology& ct) {
    using nlohmann::ordered_json;
    ordered_json j;
    j["format"] = "quadbar-topology";
    j["version"] = 1;
    j["device_params"] = detail::device_params_to_json(ct.device_params);

    ordered_json arrays = ordered_json::array();
    for (const auto& [d, spec] : ct.arrays) {
        ordered_json a;
        a["domain"] = d.render();
        a["concepts"] = spec.concepts;
        a["relations"] = spec.relations;
        ordered_json planes = ordered_json::object();
        if (auto it = ct.targets.find(d); it != ct.targets.end()) {
            for (const auto& [r, plane] : it->second) {
                ordered_json triples = ordered_json::array();
                for (const auto& [pair, v] : plane)
                    triples.push_back({pair.first, pair.second, to_int(v)});
                planes[r] = triples;
            }
        }
        a["planes"] = planes;
        arrays.push_back(a);
    }
    j["arrays"] = arrays;

    ordered_json edges = ordered_json::array();
    for (const auto& [p, c] : ct.hasse_edges) edges.push_back({p.render(), c.render()});
    j["hasse_edges"] = edges;

    ordered_json gates = ordered_json::array();
    for (const auto& [k, on] : ct.gates)
        gates.push_back({{"rel", k.rel},
                         {"parent", k.parent.render()},
                         {"child", k.child.render()},
                         {"on", on}});
    j["gates"] = gates;

    ordered_json meta = ordered_json::object();
    for (const auto& [r, v] : ct.meta_states) meta[r] = to_int(v);
    j["meta_states"] = meta;

    ordered_json transitive = ordered_json::object();
    for (const auto& [r, t] : ct.transitive_relations) transitive[r] = t;
    j["transitive_relations"] = transitive;

    j["buffer_plan"] = {{"fan_out", ct.buffer_plan.fan_out},
                        {"stages", ct.buffer_plan.stages},
                        {"propagation_delay_ns", ct.buffer_plan.propagation_delay_ns}};

    ordered_json bank = ordered_json::array();
    for (const auto& [key, outs] : ct.bridge_bank) {
        ordered_json entry;
        entry["concept"] = key.first;
        entry["domain"] = key.second.render();
        ordered_json ts = ordered_json::array();
        for (const auto& [c2, d2] : outs) ts.push_back({c2, d2.render()});
        entry["targets"] = ts;
        bank.push_back(entry);
    }
    j["bridge_bank"] = bank;

    if (ct.provenance) {
        j["provenance"] = {{"seed", ct.provenance->seed},
                           {"generator", ct.provenance->generator}};
    }

    j["stats"] = {{"arrays", ct.arrays.size()},
                  {"hasse_edges", ct.hasse_edges.size()},
                  {"gate_states", ct.gates.size()},
                  {"gate_transistors", ct.gate_transistor_count()},
                  {"junctions", ct.junction_count()},
                  {"meta_states", ct.meta_states.size()},
                  {"bridge_entries", ct.bridge_bank.size() == 0 ? 0 : [&] {
                       std::size_t n = 0;
                       for (const auto& [k, v] : ct.bridge_bank) n += v.size();
                       return n;
                   }()}};
    return j;
}

inline CrossbarTopology topology_from_json(const nlohmann::ordered_json& j) {
    if (j.value("format", "") != std::string("quadbar-topology"))
        throw TopologyError("not a quadbar topology document");
    CrossbarTopology ct;
    ct.device_params = detail::device_params_from_json(j.at("device_params"));
    for (const auto& a : j.at("arrays")) {
        ArraySpec spec;
        spec.domain = parse_domain(a.at("domain").get<std::string>());
        spec.concepts = a.at("concepts").get<std::vector<std::string>>();
        spec.relations = a.at("relations").get<std::vector<std::string>>();
        for (const auto& [r, triples] : a.at("planes").items()) {
            PlaneTargets plane;
            for (const auto& t : triples)
                plane[{t.at(0).get<std::string>(), t.at(1).get<std::string>()}] =
                    truth_from_int(t.at(2).get<int>());
            ct.targets[spec.domain][r] = std::move(plane);
        }
        ct.arrays[spec.domain] = std::move(spec);
    }
    for (const auto& e : j.at("hasse_edges"))
        ct.hasse_edges.insert({parse_domain(e.at(0).get<std::string>()),
                               parse_domain(e.at(1).get<std::string>())});
    for (const auto& g : j.at("gates"))
        ct.gates[GateKey{g.at("rel").get<std::string>(),
                         parse_domain(g.at("parent").get<std::string>()),
                         parse_domain(g.at("child").get<std::string>())}] =
            g.at("on").get<bool>();
    for (const auto& [r, v] : j.at("meta_states").items())
        ct.meta_states[r] = truth_from_int(v.get<int>());
    if (j.contains("transitive_relations"))
        for (const auto& [r, t] : j.at("transitive_relations").items())
            ct.transitive_relations[r] = t.get<bool>();
    ct.buffer_plan.fan_out = j.at("buffer_plan").at("fan_out").get<int>();
    ct.buffer_plan.stages = j.at("buffer_plan").at("stages").get<int>();
    ct.buffer_plan.propagation_delay_ns =
        j.at("buffer_plan").at("propagation_delay_ns").get<double>();
    for (const auto& entry : j.at("bridge_bank")) {
        std::vector<std::pair<std::string, Domain>> outs;
        for (const auto& t : entry.at("targets"))
            outs.emplace_back(t.at(0).get<std::string>(), parse_domain(t.at(1).get<std::string>()));
        ct.bridge_bank[{entry.at("concept").get<std::string>(),
                        parse_domain(entry.at("domain").get<std::string>())}] = std::move(outs);
    }
    if (j.contains("provenance"))
        ct.provenance = FixtureProvenance{j.at("provenance").at("seed").get<std::uint64_t>(),
                                          j.at("provenance").at("generator").get<std::string>()};
    return ct;
}

} // namespace quadbar
