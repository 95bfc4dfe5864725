#pragma once

#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "quadbar/algebra.hpp"
#include "quadbar/engine.hpp"
#include "quadbar/materializer.hpp"
#include "quadbar/topology.hpp"

namespace quadbar {

struct CheckResult {
    std::string id;
    std::string name;
    bool passed = true;
    std::string detail;
};

struct HomomorphismReport {
    std::vector<CheckResult> checks;

    bool all_passed() const {
        for (const auto& c : checks)
            if (!c.passed) return false;
        return true;
    }

    const CheckResult& check(const std::string& id) const {
        for (const auto& c : checks)
            if (c.id == id) return c;
        throw std::out_of_range("no check " + id);
    }

    std::vector<std::string> failed_ids() const {
        std::vector<std::string> out;
        for (const auto& c : checks)
            if (!c.passed) out.push_back(c.id);
        return out;
    }
};

namespace detail {

inline std::set<std::tuple<std::string, std::string, std::string, int>>
fiber_triples(const DomainAlgebra& da, const Domain& d) {
    std::set<std::tuple<std::string, std::string, std::string, int>> out;
    for (const auto& [k, v] : da.fiber(d)) out.insert({k.rel, k.from, k.to, to_int(v)});
    return out;
}

inline std::set<std::tuple<std::string, std::string, std::string, int>>
array_triples(const CrossbarTopology& ct, const Domain& d) {
    std::set<std::tuple<std::string, std::string, std::string, int>> out;
    if (auto it = ct.targets.find(d); it != ct.targets.end())
        for (const auto& [r, plane] : it->second)
            for (const auto& [pair, v] : plane) out.insert({r, pair.first, pair.second, to_int(v)});
    return out;
}

/** Reflexive-transitive reachability over the directed wiring. */
inline bool wiring_reaches(const CrossbarTopology& ct, const Domain& from, const Domain& to) {
    if (from == to) return true;
    std::set<Domain> seen{from};
    std::vector<Domain> stack{from};
    while (!stack.empty()) {
        const Domain cur = stack.back();
        stack.pop_back();
        for (const auto& [p, c] : ct.hasse_edges) {
            if (p != cur) continue;
            if (c == to) return true;
            if (seen.insert(c).second) stack.push_back(c);
        }
    }
    return false;
}

} // namespace detail

/**
 * The eight structure-preservation checks, executed against a compiled
 * topology. Failures are report contents, not faults; each failing check
 * carries its first counterexample.
 *
 *   L1 fiber isolation      arrays partition the explicit assertions
 *   L2 ternary valuation    three states <-> three resistances, round trip
 *   L3 order preservation   wiring reachability == domain refinement
 *   L4 meet                 graph common ancestor == longest common prefix
 *   L5 implication          graph residual == enumerated residual
 *   L6 gates                gate ON <-> relation monotone, full unfolding
 *   L7 closure              a second inheritance pass changes nothing
 *   L8 bridges              register bank <-> bridge set, endpoints incomparable
 */
inline HomomorphismReport verify_homomorphism(const DomainAlgebra& da,
                                              const CrossbarTopology& ct) {
    HomomorphismReport report;
    auto add = [&report](std::string id, std::string name, bool passed, std::string detail) {
        report.checks.push_back({std::move(id), std::move(name), passed, std::move(detail)});
    };

    // L1: array key set == Δ; per-array explicit triples == fiber; index space holds them
    {
        bool ok = true;
        std::string detail;
        if (ct.arrays.size() != da.domains().size()) {
            ok = false;
            detail = "array count != domain count";
        }
        for (const auto& d : da.domains()) {
            if (!ok) break;
            if (!ct.arrays.count(d)) {
                ok = false;
                detail = "missing array for " + d.render();
                break;
            }
            const auto want = detail::fiber_triples(da, d);
            const auto got = detail::array_triples(ct, d);
            if (want != got) {
                ok = false;
                detail = "fiber/array mismatch at " + d.render();
                break;
            }
            const auto& spec = ct.array(d);
            for (const auto& [r, from, to, v] : got) {
                if (!spec.has_concept(from) || !spec.has_concept(to) || !spec.has_relation(r)) {
                    ok = false;
                    detail = "junction outside index space of " + d.render() + ": " + from +
                             " " + r + " " + to;
                    break;
                }
            }
        }
        add("L1", "fiber isolation", ok, detail);
    }

    // L2: the three targets are distinct and decode back noiselessly
    {
        bool ok = true;
        std::string detail;
        const auto& p = ct.device_params;
        std::set<double> resistances;
        for (TruthValue v : {TruthValue::holds, TruthValue::undefined, TruthValue::negated}) {
            const double r = target_resistance(v, p);
            resistances.insert(r);
            const TruthValue back = decode(p.v_read_volt / r, p);
            if (back != v) {
                ok = false;
                detail = std::string("state ") + to_string(v) + " does not round-trip";
            }
        }
        if (resistances.size() != 3) {
            ok = false;
            detail = "resistance targets not distinct";
        }
        add("L2", "ternary valuation", ok, detail);
    }

    // L3: wiring reachability == refines, all ordered pairs
    {
        bool ok = true;
        std::string detail;
        for (const auto& [a, sa] : ct.arrays) {
            for (const auto& [b, sb] : ct.arrays) {
                const bool graph = detail::wiring_reaches(ct, a, b);
                const bool order = refines(b, a);
                if (graph != order) {
                    ok = false;
                    detail = "reachability/refinement disagree on (" + a.render() + ", " +
                             b.render() + ")";
                    break;
                }
            }
            if (!ok) break;
        }
        add("L3", "order preservation", ok, detail);
    }

    // L4: graph common ancestor == algebraic meet, all pairs
    {
        bool ok = true;
        std::string detail;
        for (const auto& [a, sa] : ct.arrays) {
            for (const auto& [b, sb] : ct.arrays) {
                const auto graph = array_ancestor(ct, a, b);
                const auto algebra = meet(a, b);
                if (graph != algebra) {
                    ok = false;
                    detail = "ancestor/meet disagree on (" + a.render() + ", " + b.render() + ")";
                    break;
                }
            }
            if (!ok) break;
        }
        add("L4", "meet preservation", ok, detail);
    }

    // L5: graph implication == enumerated implication, definedness included
    {
        bool ok = true;
        std::string detail;
        for (const auto& [a, sa] : ct.arrays) {
            for (const auto& [b, sb] : ct.arrays) {
                const auto graph = try_array_implication(ct, a, b);
                const auto algebra = try_heyting_implication(a, b, da.domains());
                if (graph != algebra) {
                    ok = false;
                    detail = "implication routes disagree on (" + a.render() + ", " + b.render() +
                             ")";
                    break;
                }
            }
            if (!ok) break;
        }
        add("L5", "implication preservation", ok, detail);
    }

    // L6: exactly one gate per relation x edge; ON iff monotone
    {
        bool ok = true;
        std::string detail;
        const std::size_t expected = da.relations().size() * ct.hasse_edges.size();
        if (ct.gates.size() != expected) {
            ok = false;
            detail = "gate count " + std::to_string(ct.gates.size()) + " != |relations|x|edges| " +
                     std::to_string(expected);
        }
        for (const auto& [key, on] : ct.gates) {
            if (!ok) break;
            if (!da.has_relation(key.rel)) {
                ok = false;
                detail = "gate for unknown relation " + key.rel;
                break;
            }
            const bool want = da.relation(key.rel).tau == Tau::monotone;
            if (on != want) {
                ok = false;
                detail = "gate (" + key.rel + ", " + key.parent.render() + " -> " +
                         key.child.render() + ") is " + (on ? "ON" : "OFF") + ", typing says " +
                         (want ? "ON" : "OFF");
                break;
            }
            if (!ct.hasse_edges.count({key.parent, key.child})) {
                ok = false;
                detail = "gate on a non-covering pair";
                break;
            }
        }
        add("L6", "gate typing", ok, detail);
    }

    // L7: second inheritance pass is a no-op (physical closure)
    {
        bool ok = true;
        std::string detail;
        try {
            auto shared = std::make_shared<CrossbarTopology>(ct);
            ChipState chip(shared, 0xC105EDull);
            chip.inherit_pass();
            const auto h1 = chip.snapshot_hash();
            const std::size_t second = chip.inherit_pass();
            const auto h2 = chip.snapshot_hash();
            if (second != 0) {
                ok = false;
                detail = "second pass reported " + std::to_string(second) + " changes";
            } else if (h1 != h2) {
                ok = false;
                detail = "snapshot hash changed on the second pass";
            }
        } catch (const std::exception& e) {
            ok = false;
            detail = e.what();
        }
        add("L7", "closure idempotence", ok, detail);
    }

    // L8: bank entries <-> bridge records, endpoints incomparable
    {
        bool ok = true;
        std::string detail;
        std::multiset<std::tuple<std::string, std::string, std::string, std::string>> want, got;
        for (const auto& b : da.bridges())
            want.insert({b.from_concept, b.from_domain.render(), b.to_concept,
                         b.to_domain.render()});
        for (const auto& [key, outs] : ct.bridge_bank)
            for (const auto& [c2, d2] : outs)
                got.insert({key.first, key.second.render(), c2, d2.render()});
        if (want != got) {
            ok = false;
            detail = "register bank and bridge set are not bijective";
        }
        for (const auto& [key, outs] : ct.bridge_bank) {
            if (!ok) break;
            for (const auto& [c2, d2] : outs) {
                if (comparable(key.second, d2)) {
                    ok = false;
                    detail = "bridge between comparable domains: " + key.second.render() +
                             " / " + d2.render();
                    break;
                }
            }
        }
        add("L8", "bridge preservation", ok, detail);
    }

    return report;
}

} // namespace quadbar
