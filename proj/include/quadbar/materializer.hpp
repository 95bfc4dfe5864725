#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "quadbar/algebra.hpp"
#include "quadbar/topology.hpp"

namespace quadbar {

/**
 * Covering pairs of the domain set under refinement: (p, c) iff c refines p,
 * p != c, and no domain sits strictly between. In a prefix-generated set each
 * domain's cover is its longest proper prefix present in Δ.
 */
inline std::set<std::pair<Domain, Domain>> hasse_edges(const std::set<Domain>& delta) {
    std::set<std::pair<Domain, Domain>> edges;
    for (const auto& d : delta) {
        auto segs = d.segments();
        while (segs.size() > 1) {
            segs.pop_back();
            const Domain prefix(segs);
            if (delta.count(prefix)) {
                edges.insert({prefix, d});
                break;
            }
        }
    }
    return edges;
}

/**
 * Unfold the relation typing over the inheritance edge set: one gate per
 * (relation × covering edge), ON exactly when the relation is monotone.
 */
inline std::map<GateKey, bool> unfold_tau(const DomainAlgebra& da) {
    std::map<GateKey, bool> gates;
    const auto edges = hasse_edges(da.domains());
    for (const auto& [rname, meta] : da.relations())
        for (const auto& [p, c] : edges)
            gates[GateKey{rname, p, c}] = meta.tau == Tau::monotone;
    return gates;
}

/**
 * Logarithmic-depth driver fabric sizing: the smallest stage count whose
 * fan-out product covers the gate population. The 0.15 ns per-stage default
 * puts a full-scale tree (~8.6K gates, 7 stages) at ~1 ns total.
 */
inline BufferTreePlan buffer_tree_plan(std::size_t gate_count, int fan_out = 4,
                                       double per_stage_delay_ns = 0.15) {
    if (fan_out < 2) throw TopologyError("buffer tree fan-out must be >= 2");
    BufferTreePlan plan;
    plan.fan_out = fan_out;
    plan.stages = 0;
    std::size_t reach = 1;
    while (reach < gate_count) {
        reach *= static_cast<std::size_t>(fan_out);
        ++plan.stages;
    }
    plan.propagation_delay_ns = plan.stages * per_stage_delay_ns;
    return plan;
}

/**
 * Compile the materialized algebra into a crossbar topology: one array per
 * domain, explicit quads as junction target states, covering pairs as
 * directed wiring, unfolded gates, meta states, and the bridge register bank.
 * Deterministic: identical algebras yield byte-identical serializations.
 */
inline CrossbarTopology compile(const DomainAlgebra& da, DeviceParams params = {}) {
    da.validate();
    params.validate();

    CrossbarTopology ct;
    ct.device_params = params;
    ct.hasse_edges = hasse_edges(da.domains());
    ct.gates = unfold_tau(da);

    for (const auto& [rname, meta] : da.relations()) {
        ct.meta_states[rname] =
            meta.tau == Tau::monotone ? TruthValue::holds : TruthValue::negated;
        ct.transitive_relations[rname] = meta.transitive;
    }

    // Plane index spaces, top-down so inherited concepts propagate through
    // ON gates along multi-level chains in one pass.
    std::map<Domain, Domain> parent_of;
    for (const auto& [p, c] : ct.hasse_edges) parent_of.emplace(c, p);

    std::vector<Domain> order(da.domains().begin(), da.domains().end());
    std::sort(order.begin(), order.end(), [](const Domain& a, const Domain& b) {
        if (a.depth() != b.depth()) return a.depth() < b.depth();
        return a < b;
    });

    std::map<Domain, std::map<std::string, std::set<std::string>>> plane_concepts;
    for (const auto& d : order) {
        auto& planes = plane_concepts[d];
        for (const auto& [k, v] : da.fiber(d)) {
            planes[k.rel].insert(k.from);
            planes[k.rel].insert(k.to);
        }
        if (auto pit = parent_of.find(d); pit != parent_of.end()) {
            for (const auto& [rname, meta] : da.relations()) {
                if (meta.tau != Tau::monotone) continue;
                auto parent_plane = plane_concepts[pit->second].find(rname);
                if (parent_plane == plane_concepts[pit->second].end()) continue;
                planes[rname].insert(parent_plane->second.begin(), parent_plane->second.end());
            }
        }
    }

    for (const auto& d : da.domains()) {
        ArraySpec spec;
        spec.domain = d;
        std::set<std::string> all;
        for (const auto& [r, cs] : plane_concepts[d]) {
            if (cs.empty()) continue;
            spec.relations.push_back(r);
            all.insert(cs.begin(), cs.end());
        }
        spec.concepts.assign(all.begin(), all.end());
        ct.arrays[d] = std::move(spec);
    }

    for (const auto& q : da.all_quads()) ct.targets[q.domain][q.rel][{q.from, q.to}] = q.value;

    for (const auto& b : da.bridges())
        ct.bridge_bank[{b.from_concept, b.from_domain}].emplace_back(b.to_concept, b.to_domain);

    ct.buffer_plan = buffer_tree_plan(ct.gate_transistor_count());
    return ct;
}

// -- graph-side lattice operations (no string arithmetic) ----------------------

namespace detail {

/** Ancestor chain of `d` in the wiring graph, nearest first, self included. */
inline std::vector<Domain> ancestor_chain(const CrossbarTopology& ct, const Domain& d) {
    std::map<Domain, Domain> parent_of;
    for (const auto& [p, c] : ct.hasse_edges) parent_of.emplace(c, p);
    std::vector<Domain> chain{d};
    auto cur = d;
    while (true) {
        auto it = parent_of.find(cur);
        if (it == parent_of.end()) break;
        cur = it->second;
        chain.push_back(cur);
    }
    return chain;
}

} // namespace detail

/**
 * Most specific common ancestor of two arrays, computed purely from the
 * directed wiring. None when the arrays live in unconnected trees.
 */
inline std::optional<Domain> array_ancestor(const CrossbarTopology& ct, const Domain& a1,
                                            const Domain& a2) {
    ct.array(a1);
    ct.array(a2);
    const auto chain1 = detail::ancestor_chain(ct, a1);
    const auto chain2 = detail::ancestor_chain(ct, a2);
    const std::set<Domain> set2(chain2.begin(), chain2.end());

    std::vector<Domain> common;
    for (const auto& a : chain1)
        if (set2.count(a)) common.push_back(a);
    if (common.empty()) return std::nullopt;

    // chain1 is ordered nearest-first, so the first hit is the deepest; the
    // remaining common ancestors must all sit above it (forest shape).
    const Domain& best = common.front();
    const auto best_chain = detail::ancestor_chain(ct, best);
    const std::set<Domain> above(best_chain.begin(), best_chain.end());
    for (const auto& a : common)
        if (!above.count(a))
            throw TopologyError("ambiguous common ancestor: " + best.render() + " vs " +
                                a.render());
    return best;
}

/**
 * Graph-side Heyting implication: the join of arrays whose common ancestor
 * with a1 reaches a2 along the wiring. Must coincide with the algebraic
 * enumeration; the structure suite compares the two routes.
 */
inline Domain array_implication(const CrossbarTopology& ct, const Domain& a1, const Domain& a2) {
    const auto chain2 = detail::ancestor_chain(ct, a2);
    const std::set<Domain> ancestors2(chain2.begin(), chain2.end());

    std::vector<Domain> candidates;
    for (const auto& [d, spec] : ct.arrays) {
        const auto m = array_ancestor(ct, d, a1);
        if (m && ancestors2.count(*m)) candidates.push_back(d);
    }
    if (candidates.empty())
        throw LatticeError("implication " + a1.render() + " -> " + a2.render() +
                           " has an empty candidate set");

    const Domain* best = &candidates.front();
    std::size_t best_depth = detail::ancestor_chain(ct, *best).size();
    for (const auto& c : candidates) {
        const std::size_t depth = detail::ancestor_chain(ct, c).size();
        if (depth > best_depth) {
            best = &c;
            best_depth = depth;
        }
    }
    const auto best_chain = detail::ancestor_chain(ct, *best);
    const std::set<Domain> above(best_chain.begin(), best_chain.end());
    for (const auto& c : candidates)
        if (!above.count(c))
            throw LatticeError("no unique join: " + c.render() + " and " + best->render() +
                               " are incomparable");
    return *best;
}

inline std::optional<Domain> try_array_implication(const CrossbarTopology& ct, const Domain& a1,
                                                   const Domain& a2) {
    try {
        return array_implication(ct, a1, a2);
    } catch (const LatticeError&) {
        return std::nullopt;
    }
}

} // namespace quadbar
