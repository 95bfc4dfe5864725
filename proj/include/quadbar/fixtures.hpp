#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "quadbar/algebra.hpp"
#include "quadbar/rng.hpp"

namespace quadbar {

struct GenerationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/**
 * The bundled ICD-11 respiratory mini knowledge base: three classification
 * axes as parallel domain trees, one entity (CA40.00) present in all three
 * and bridged across them, plus a non-monotone decoy relation so inheritance
 * gating is exercised.
 */
inline DomainAlgebra load_icd11_mini() {
    DomainAlgebra da;
    da.add_relation({"is_a", Tau::monotone, true});
    da.add_relation({"has_dosage", Tau::non_monotone, false});

    const Domain anatomical = parse_domain("@ICD11@Anatomical");
    const Domain etiological = parse_domain("@ICD11@Etiological");
    const Domain clinical = parse_domain("@ICD11@Clinical");

    auto holds = [&da](const std::string& from, const std::string& rel, const Domain& d,
                       const std::string& to) {
        da.insert_unchecked(Quad{from, rel, d, to, TruthValue::holds});
    };

    holds("CA40.00", "is_a", anatomical, "Pneumonia");
    holds("Pneumonia", "is_a", anatomical, "Lower_Resp_Infection");
    holds("Lower_Resp_Infection", "is_a", anatomical, "Respiratory_Disease");

    holds("CA40.00", "is_a", etiological, "Bacterial_Infection");
    holds("Bacterial_Infection", "is_a", etiological, "Infectious_Disease");
    // explicitly negated misclassification, exercises the -1 state
    da.insert_unchecked(
        Quad{"CA40.00", "is_a", etiological, "Viral_Infection", TruthValue::negated});

    holds("CA40.00", "is_a", clinical, "Acute_Lower_Respiratory");
    holds("CA40.00", "has_dosage", clinical, "Standard_Adult_Dose");

    const std::vector<Domain> axes{anatomical, etiological, clinical};
    for (const auto& from : axes)
        for (const auto& to : axes)
            if (from != to)
                da.add_bridge(Bridge{"CA40.00", from, "CA40.00", to, "same_entity_across"});

    da.finalize();
    return da;
}

/**
 * Shape of a synthetic multi-axis fixture. Defaults reproduce the reference
 * chip scale: 47 arrays over 3 axes, 1,247 entities, classification chains
 * 4-6 deep, with density and link-rate knobs calibrated so compilation lands
 * on ~136K junctions, ~8.6K gate transistors and ~3K bridge entries.
 */
struct FixtureSpec {
    std::size_t entities = 1247;
    std::size_t arrays = 47;
    std::size_t axes = 3;
    int depth_min = 4;
    int depth_max = 6;
    double density = 0.129;         // programmed fraction of each non-chain plane
    double bridge_fraction = 1.0 / 3.0; // entities present (and bridged) in every axis
    double cross_link_rate = 0.202;     // analogous_to pairs per entity
    std::size_t group_concepts = 31;    // reference concepts per mid-tier array
    std::size_t group_quads_per_relation = 10;
    std::uint64_t seed = 1;
};

namespace detail {

inline std::string padded_id(const std::string& prefix, std::size_t i, std::size_t width) {
    std::string n = std::to_string(i);
    if (n.size() < width) n.insert(0, width - n.size(), '0');
    return prefix + n;
}

} // namespace detail

/**
 * Deterministic synthetic taxonomy at a parameterized scale. Per axis: a root
 * domain, a tier of reference subdomains, and leaf subdomains holding the
 * entities and their classification chains. Bridged entities appear in every
 * axis; everyone else lives in one.
 */
inline DomainAlgebra generate_fixture(const FixtureSpec& spec) {
    if (spec.axes == 0) throw GenerationError("need at least one axis");
    if (spec.arrays < spec.axes) throw GenerationError("need at least one array per axis");
    if (spec.entities == 0) throw GenerationError("need at least one entity");
    if (spec.depth_min < 1 || spec.depth_min > spec.depth_max)
        throw GenerationError("bad depth range");
    if (static_cast<std::size_t>(spec.depth_max) > spec.entities)
        throw GenerationError("chain depth exceeds entity count");
    if (spec.density < 0.0 || spec.density > 0.5)
        throw GenerationError("density must be in [0, 0.5]");

    Rng rng(spec.seed);
    DomainAlgebra da;

    const std::vector<std::string> monotone_rels{"is_a", "has_finding", "has_site",
                                                 "associated_with"};
    const std::vector<std::string> nonmono_rels{"has_severity", "has_dosage", "excludes",
                                                "has_stage"};
    da.add_relation({"is_a", Tau::monotone, true});
    for (std::size_t i = 1; i < monotone_rels.size(); ++i)
        da.add_relation({monotone_rels[i], Tau::monotone, false});
    for (const auto& r : nonmono_rels) da.add_relation({r, Tau::non_monotone, false});

    std::vector<std::string> fill_rels; // every relation except the chain relation
    for (std::size_t i = 1; i < monotone_rels.size(); ++i) fill_rels.push_back(monotone_rels[i]);
    for (const auto& r : nonmono_rels) fill_rels.push_back(r);

    // domain trees: root -> groups -> leaves, arrays distributed round-robin
    std::vector<Domain> roots;
    std::vector<std::vector<Domain>> groups_per_axis(spec.axes), leaves_per_axis(spec.axes);
    std::vector<std::size_t> extra(spec.axes, 0);
    for (std::size_t i = 0; i < spec.arrays - spec.axes; ++i) ++extra[i % spec.axes];

    for (std::size_t ax = 0; ax < spec.axes; ++ax) {
        const std::string axis_name = "Ax" + std::to_string(ax + 1);
        const Domain root = Domain({axis_name});
        roots.push_back(root);
        da.add_domain(root);

        const std::size_t n = extra[ax];
        const std::size_t n_groups = n == 0 ? 0 : std::max<std::size_t>(1, n / 4);
        const std::size_t n_leaves = n - n_groups;
        for (std::size_t g = 0; g < n_groups; ++g) {
            Domain d({axis_name, "G" + std::to_string(g + 1)});
            groups_per_axis[ax].push_back(d);
            da.add_domain(d);
        }
        for (std::size_t l = 0; l < n_leaves; ++l) {
            const auto& parent = groups_per_axis[ax][l % n_groups];
            auto segs = parent.segments();
            segs.push_back("L" + std::to_string(l + 1));
            Domain d(segs);
            leaves_per_axis[ax].push_back(d);
            da.add_domain(d);
        }
        // a bare root (or a group with no leaves) still hosts entities
        if (leaves_per_axis[ax].empty()) {
            if (!groups_per_axis[ax].empty())
                leaves_per_axis[ax] = groups_per_axis[ax];
            else
                leaves_per_axis[ax].push_back(root);
        }
    }

    // entity placement: a shuffled prefix participates in every axis
    const std::size_t id_width = std::to_string(spec.entities).size();
    std::vector<std::size_t> order(spec.entities);
    for (std::size_t i = 0; i < spec.entities; ++i) order[i] = i;
    for (std::size_t i = spec.entities; i > 1; --i)
        std::swap(order[i - 1], order[rng.below(i)]);
    const std::size_t participants =
        std::min(spec.entities,
                 static_cast<std::size_t>(std::llround(spec.bridge_fraction * spec.entities)));

    struct Placement {
        std::map<std::size_t, Domain> leaf_by_axis; // axis -> leaf domain
    };
    std::vector<Placement> placements(spec.entities);
    std::map<Domain, std::vector<std::string>> leaf_entities;

    for (std::size_t rank = 0; rank < spec.entities; ++rank) {
        const std::size_t e = order[rank];
        const std::string name = detail::padded_id("E", e + 1, id_width);
        const bool bridged = rank < participants;
        if (bridged) {
            for (std::size_t ax = 0; ax < spec.axes; ++ax) {
                const auto& leaves = leaves_per_axis[ax];
                const Domain leaf = leaves[rng.below(leaves.size())];
                placements[e].leaf_by_axis[ax] = leaf;
                leaf_entities[leaf].push_back(name);
            }
        } else {
            const std::size_t ax = rng.below(spec.axes);
            const auto& leaves = leaves_per_axis[ax];
            const Domain leaf = leaves[rng.below(leaves.size())];
            placements[e].leaf_by_axis[ax] = leaf;
            leaf_entities[leaf].push_back(name);
        }
    }

    // classification chains + filler planes per leaf
    std::size_t leaf_counter = 0;
    for (std::size_t ax = 0; ax < spec.axes; ++ax) {
        for (const auto& leaf : leaves_per_axis[ax]) {
            ++leaf_counter;
            const int depth =
                spec.depth_min +
                static_cast<int>(rng.below(static_cast<std::uint64_t>(spec.depth_max -
                                                                      spec.depth_min + 1)));
            std::vector<std::string> cats;
            for (int level = 1; level <= depth; ++level)
                cats.push_back("C" + std::to_string(leaf_counter) + "_" + std::to_string(level));
            for (std::size_t i = 0; i + 1 < cats.size(); ++i)
                da.insert_unchecked(Quad{cats[i], "is_a", leaf, cats[i + 1], TruthValue::holds});

            std::vector<std::string> pool = leaf_entities[leaf];
            for (const auto& e : pool)
                da.insert_unchecked(Quad{e, "is_a", leaf, cats.front(), TruthValue::holds});
            pool.insert(pool.end(), cats.begin(), cats.end());

            const std::size_t n = pool.size();
            const auto per_plane =
                static_cast<std::size_t>(std::llround(spec.density * static_cast<double>(n * n)));
            for (const auto& rel : fill_rels) {
                std::set<std::pair<std::size_t, std::size_t>> used;
                std::size_t placed = 0, attempts = 0;
                while (placed < per_plane && attempts < per_plane * 20 + 100) {
                    ++attempts;
                    const std::size_t a = rng.below(n), b = rng.below(n);
                    if (!used.insert({a, b}).second) continue;
                    const TruthValue v =
                        rng.uniform() < 0.8 ? TruthValue::holds : TruthValue::negated;
                    da.insert_unchecked(Quad{pool[a], rel, leaf, pool[b], v});
                    ++placed;
                }
            }
        }
    }

    // reference content for the mid-tier arrays
    std::size_t group_counter = 0;
    for (std::size_t ax = 0; ax < spec.axes; ++ax) {
        for (const auto& group : groups_per_axis[ax]) {
            if (leaf_entities.count(group)) continue; // doubles as a leaf
            ++group_counter;
            std::vector<std::string> refs;
            for (std::size_t i = 1; i <= spec.group_concepts; ++i)
                refs.push_back("R" + std::to_string(group_counter) + "_" + std::to_string(i));
            for (const auto& [rel, meta] : da.relations()) {
                std::set<std::pair<std::size_t, std::size_t>> used;
                std::size_t placed = 0, attempts = 0;
                while (placed < spec.group_quads_per_relation && attempts < 1000) {
                    ++attempts;
                    std::size_t a = rng.below(refs.size()), b = rng.below(refs.size());
                    if (rel == "is_a") {
                        if (a == b) continue;
                        if (a > b) std::swap(a, b); // increasing index keeps chains acyclic
                    }
                    if (!used.insert({a, b}).second) continue;
                    const TruthValue v = rel == "is_a" || rng.uniform() < 0.8
                                             ? TruthValue::holds
                                             : TruthValue::negated;
                    da.insert_unchecked(Quad{refs[a], rel, group, refs[b], v});
                    ++placed;
                }
            }
        }
    }

    // same-entity bridges across every axis pair for the participating prefix
    for (std::size_t rank = 0; rank < participants; ++rank) {
        const std::size_t e = order[rank];
        const std::string name = detail::padded_id("E", e + 1, id_width);
        const auto& by_axis = placements[e].leaf_by_axis;
        for (const auto& [ax1, d1] : by_axis)
            for (const auto& [ax2, d2] : by_axis)
                if (ax1 != ax2) da.add_bridge(Bridge{name, d1, name, d2, "same_entity_across"});
    }

    // analogous_to cross-links between distinct entities in different axes
    if (spec.axes > 1) {
        const auto pairs =
            static_cast<std::size_t>(std::llround(spec.cross_link_rate * spec.entities));
        std::size_t made = 0, attempts = 0;
        while (made < pairs && attempts < pairs * 50 + 100) {
            ++attempts;
            const std::size_t e1 = rng.below(spec.entities), e2 = rng.below(spec.entities);
            if (e1 == e2) continue;
            const auto& p1 = placements[e1].leaf_by_axis;
            const auto& p2 = placements[e2].leaf_by_axis;
            auto it1 = p1.begin(), it2 = p2.begin();
            std::advance(it1, rng.below(p1.size()));
            std::advance(it2, rng.below(p2.size()));
            if (it1->first == it2->first) continue; // need different axes
            const std::string n1 = detail::padded_id("E", e1 + 1, id_width);
            const std::string n2 = detail::padded_id("E", e2 + 1, id_width);
            const std::size_t before = da.bridges().size();
            da.add_bridge(Bridge{n1, it1->second, n2, it2->second, "analogous_to"});
            da.add_bridge(Bridge{n2, it2->second, n1, it1->second, "analogous_to"});
            if (da.bridges().size() == before + 2) ++made;
        }
    }

    da.finalize();
    return da;
}

} // namespace quadbar
