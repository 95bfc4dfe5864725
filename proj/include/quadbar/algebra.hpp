#pragma once

#include <deque>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "quadbar/domain.hpp"
#include "quadbar/truth.hpp"

namespace quadbar {

/** Relation typing: monotone assertions inherit into child domains. */
enum class Tau { monotone, non_monotone };

inline const char* to_string(Tau t) {
    return t == Tau::monotone ? "monotone" : "non_monotone";
}

struct RelationMeta {
    std::string name;
    Tau tau = Tau::non_monotone;
    bool transitive = false; // cascades apply only to transitive relations
};

/** One domain-scoped assertion: <from, rel, to> holds/negated in `domain`. */
struct Quad {
    std::string from;
    std::string rel;
    Domain domain;
    std::string to;
    TruthValue value = TruthValue::undefined;
};

/** Cross-reference between concepts in incomparable domains. */
struct Bridge {
    std::string from_concept;
    Domain from_domain;
    std::string to_concept;
    Domain to_domain;
    std::string kind; // e.g. same_entity_across, analogous_to

    friend bool operator==(const Bridge&, const Bridge&) = default;
    friend auto operator<=>(const Bridge&, const Bridge&) = default;
};

/** Key of an explicit assertion within one fiber. */
struct ExplicitKey {
    std::string from;
    std::string rel;
    std::string to;

    friend bool operator==(const ExplicitKey&, const ExplicitKey&) = default;
    friend auto operator<=>(const ExplicitKey&, const ExplicitKey&) = default;
};

enum class RejectReason { none, duplicate_conflict, derived_contradiction, cycle };

inline const char* to_string(RejectReason r) {
    switch (r) {
    case RejectReason::duplicate_conflict: return "duplicate_conflict";
    case RejectReason::derived_contradiction: return "derived_contradiction";
    case RejectReason::cycle: return "cycle";
    default: return "none";
    }
}

struct InsertDecision {
    bool accepted = true;
    RejectReason reason = RejectReason::none;

    static InsertDecision accept() { return {}; }
    static InsertDecision reject(RejectReason r) { return {false, r}; }
};

struct AlgebraError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/** A transitive cascade ran into a conductive cycle. */
struct CycleFault : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/**
 * The materialized domain algebra: a meet-closed domain set, one fiber of
 * explicit assertions per domain, the relation typing table, and bridges.
 *
 * Only non-undefined assertions are stored; an explicitly undefined record
 * asserts nothing and is indistinguishable from absence. This class is the
 * pure-software ground truth the crossbar simulation is validated against.
 */
class DomainAlgebra {
public:
    using Fiber = std::map<ExplicitKey, TruthValue>;

    // -- construction -------------------------------------------------------

    void add_relation(RelationMeta meta) {
        if (meta.name.empty()) throw AlgebraError("relation name must be non-empty");
        relations_[meta.name] = std::move(meta);
    }

    void add_domain(const Domain& d) {
        domains_.insert(d);
        close_domains();
    }

    /** Insert without admissibility checking (bulk load path). */
    void insert_unchecked(const Quad& q) {
        require_relation(q.rel);
        domains_.insert(q.domain);
        if (q.value == TruthValue::undefined) return;
        fibers_[q.domain][ExplicitKey{q.from, q.rel, q.to}] = q.value;
    }

    void add_bridge(Bridge b) {
        if (comparable(b.from_domain, b.to_domain))
            throw AlgebraError("bridge endpoints must be incomparable: " +
                               b.from_domain.render() + " vs " + b.to_domain.render());
        domains_.insert(b.from_domain);
        domains_.insert(b.to_domain);
        for (const auto& existing : bridges_)
            if (existing == b) return;
        bridges_.push_back(std::move(b));
    }

    /** Call after bulk construction: meet-closes Δ and checks every invariant. */
    void finalize() {
        close_domains();
        validate();
    }

    // -- accessors ----------------------------------------------------------

    const std::set<Domain>& domains() const { return domains_; }
    const std::map<std::string, RelationMeta>& relations() const { return relations_; }
    const std::vector<Bridge>& bridges() const { return bridges_; }

    bool has_relation(const std::string& name) const { return relations_.count(name) > 0; }

    const RelationMeta& relation(const std::string& name) const {
        auto it = relations_.find(name);
        if (it == relations_.end()) throw AlgebraError("unknown relation: " + name);
        return it->second;
    }

    static const Fiber& empty_fiber() {
        static const Fiber empty;
        return empty;
    }

    const Fiber& fiber(const Domain& d) const {
        auto it = fibers_.find(d);
        return it == fibers_.end() ? empty_fiber() : it->second;
    }

    std::size_t quad_count() const {
        std::size_t n = 0;
        for (const auto& [d, f] : fibers_) n += f.size();
        return n;
    }

    std::vector<Quad> all_quads() const {
        std::vector<Quad> out;
        out.reserve(quad_count());
        for (const auto& [d, f] : fibers_)
            for (const auto& [k, v] : f) out.push_back(Quad{k.from, k.rel, d, k.to, v});
        return out;
    }

    /** Concepts mentioned by the explicit fiber of `d`. */
    std::set<std::string> fiber_concepts(const Domain& d) const {
        std::set<std::string> out;
        for (const auto& [k, v] : fiber(d)) {
            out.insert(k.from);
            out.insert(k.to);
        }
        return out;
    }

    // -- reasoning oracle ----------------------------------------------------

    /**
     * Effective truth of <c, r, c2> in d: the explicit value if the fiber has
     * one; otherwise, for monotone r, the value at the nearest ancestor domain
     * holding an explicit assertion; otherwise undefined.
     */
    TruthValue oracle_truth(const std::string& c, const std::string& r, const std::string& c2,
                            const Domain& d) const {
        require_relation(r);
        const ExplicitKey key{c, r, c2};
        if (auto own = lookup(d, key)) return *own;
        if (relation(r).tau != Tau::monotone) return TruthValue::undefined;
        for (auto p = parent_prefix(d); p; p = parent_prefix(*p)) {
            if (auto inherited = lookup(*p, key)) return *inherited;
        }
        return TruthValue::undefined;
    }

    /**
     * Holds-successors of `c` under r in d, nearest-ancestor resolved,
     * in lexicographic order (the same tie-break the hardware index uses).
     */
    std::vector<std::string> successors(const std::string& c, const std::string& r,
                                        const Domain& d) const {
        std::map<std::string, TruthValue> row;
        collect_row(c, r, d, row);
        std::vector<std::string> out;
        for (const auto& [to, v] : row)
            if (v == TruthValue::holds) out.push_back(to);
        return out;
    }

    /**
     * Transitive classification: breadth-first visit order over holds-edges,
     * FIFO frontier, lexicographic ties. Linear chains come back as the
     * classification path. Throws CycleFault on a holds-edge back to a
     * visit-tree ancestor (admissible algebras never reach this).
     */
    std::vector<std::string> oracle_classify(const std::string& c, const std::string& r,
                                             const Domain& d) const {
        if (!relation(r).transitive)
            throw AlgebraError("oracle_classify requires a transitive relation, got " + r);
        std::vector<std::string> chain;
        std::map<std::string, std::string> parent;
        std::set<std::string> seen{c};
        std::deque<std::string> frontier{c};
        while (!frontier.empty()) {
            const std::string u = frontier.front();
            frontier.pop_front();
            chain.push_back(u);
            for (const auto& next : successors(u, r, d)) {
                if (is_tree_ancestor(next, u, parent, c))
                    throw CycleFault("conductive cycle: " + next + " reached again from " + u +
                                     " in " + d.render());
                if (seen.insert(next).second) {
                    parent[next] = u;
                    frontier.push_back(next);
                }
            }
        }
        return chain;
    }

    /** Reachability over holds-edges (cycle tolerant). */
    bool oracle_reachable(const std::string& from, const std::string& r, const Domain& d,
                          const std::string& target) const {
        std::set<std::string> seen{from};
        std::deque<std::string> frontier{from};
        while (!frontier.empty()) {
            const std::string u = frontier.front();
            frontier.pop_front();
            if (u == target) return true;
            for (const auto& next : successors(u, r, d))
                if (seen.insert(next).second) frontier.push_back(next);
        }
        return false;
    }

    // -- mutation ------------------------------------------------------------

    /**
     * Write-time admissibility: reject duplicate-key conflicts, contradictions
     * with the derived (inherited or transitively implied) value, and inserts
     * that would close a conductive cycle. Accepted quads are stored.
     */
    InsertDecision admissible_insert(const Quad& q) {
        require_relation(q.rel);
        if (!domains_.count(q.domain))
            throw AlgebraError("insert into unknown domain " + q.domain.render());
        if (q.value == TruthValue::undefined) return InsertDecision::accept(); // asserts nothing

        const ExplicitKey key{q.from, q.rel, q.to};
        if (auto own = lookup(q.domain, key)) {
            if (*own != q.value) return InsertDecision::reject(RejectReason::duplicate_conflict);
            return InsertDecision::accept(); // identical re-assert
        }

        const TruthValue derived = derived_truth(q.from, q.rel, q.to, q.domain);
        if (derived != TruthValue::undefined && to_int(derived) == -to_int(q.value))
            return InsertDecision::reject(RejectReason::derived_contradiction);

        if (q.value == TruthValue::holds && relation(q.rel).transitive &&
            oracle_reachable(q.to, q.rel, q.domain, q.from))
            return InsertDecision::reject(RejectReason::cycle);

        fibers_[q.domain][key] = q.value;
        return InsertDecision::accept();
    }

    /** Retract an explicit assertion. Absent keys are a no-op. */
    void erase(const std::string& from, const std::string& r, const std::string& to,
               const Domain& d) {
        auto fit = fibers_.find(d);
        if (fit == fibers_.end()) return;
        fit->second.erase(ExplicitKey{from, r, to});
        if (fit->second.empty()) fibers_.erase(fit);
    }

    // -- invariants ----------------------------------------------------------

    /** Full invariant check; throws AlgebraError naming the first violation. */
    void validate() const {
        // Δ meet-closed
        for (const auto& a : domains_)
            for (const auto& b : domains_) {
                const auto m = meet(a, b);
                if (m && !domains_.count(*m))
                    throw AlgebraError("domain set not meet-closed: missing " + m->render() +
                                       " = meet(" + a.render() + ", " + b.render() + ")");
            }
        for (const auto& [d, f] : fibers_) {
            if (!domains_.count(d))
                throw AlgebraError("fiber domain not in domain set: " + d.render());
            for (const auto& [k, v] : f) {
                require_relation(k.rel);
                if (v == TruthValue::undefined)
                    throw AlgebraError("stored assertion with undefined value at " + k.from);
            }
        }
        for (const auto& b : bridges_) {
            if (!domains_.count(b.from_domain) || !domains_.count(b.to_domain))
                throw AlgebraError("bridge references unknown domain");
            if (comparable(b.from_domain, b.to_domain))
                throw AlgebraError("bridge between comparable domains: " +
                                   b.from_domain.render() + " / " + b.to_domain.render());
        }
        check_consistency();
    }

private:
    std::optional<TruthValue> lookup(const Domain& d, const ExplicitKey& key) const {
        auto fit = fibers_.find(d);
        if (fit == fibers_.end()) return std::nullopt;
        auto qit = fit->second.find(key);
        if (qit == fit->second.end()) return std::nullopt;
        return qit->second;
    }

    static std::optional<Domain> parent_prefix(const Domain& d) {
        if (d.depth() <= 1) return std::nullopt;
        auto segs = d.segments();
        segs.pop_back();
        return Domain(std::move(segs));
    }

    void require_relation(const std::string& r) const {
        if (!relations_.count(r)) throw AlgebraError("unknown relation: " + r);
    }

    /** Nearest-ancestor-resolved row of <c, r, *> in d. */
    void collect_row(const std::string& c, const std::string& r, const Domain& d,
                     std::map<std::string, TruthValue>& row) const {
        const bool monotone = relation(r).tau == Tau::monotone;
        std::optional<Domain> at = d;
        while (at) {
            if (auto fit = fibers_.find(*at); fit != fibers_.end()) {
                auto it = fit->second.lower_bound(ExplicitKey{c, r, ""});
                for (; it != fit->second.end() && it->first.from == c && it->first.rel == r; ++it)
                    row.emplace(it->first.to, it->second); // nearest wins: emplace keeps first
            }
            if (!monotone) break;
            at = parent_prefix(*at);
        }
    }

    /** Inherited or transitively implied value, absent any explicit entry. */
    TruthValue derived_truth(const std::string& c, const std::string& r, const std::string& c2,
                             const Domain& d) const {
        const TruthValue inherited = oracle_truth(c, r, c2, d);
        if (inherited != TruthValue::undefined) return inherited;
        if (relation(r).transitive && oracle_reachable(c, r, d, c2) && c != c2)
            return TruthValue::holds;
        return TruthValue::undefined;
    }

    static bool is_tree_ancestor(const std::string& candidate, const std::string& node,
                                 const std::map<std::string, std::string>& parent,
                                 const std::string& root) {
        std::string cur = node;
        while (true) {
            if (cur == candidate) return true;
            if (cur == root) return false;
            auto it = parent.find(cur);
            if (it == parent.end()) return false;
            cur = it->second;
        }
    }

    void close_domains() { domains_ = meet_closure(std::move(domains_)); }

    /**
     * No chain contradictions, no conductive cycles anywhere. An explicit
     * child value of the opposite sign to an ancestor is not a fault here:
     * the lookup order resolves it (explicit wins). The admissibility gate
     * is what refuses to create such overrides incrementally.
     */
    void check_consistency() const {
        for (const auto& [d, f] : fibers_) {
            for (const auto& [k, v] : f) {
                if (v == TruthValue::negated && relation(k.rel).transitive &&
                    oracle_reachable(k.from, k.rel, d, k.to) && k.from != k.to)
                    throw AlgebraError("negation contradicts a holds-chain: " + k.from + " " +
                                       k.rel + " " + k.to + " in " + d.render());
            }
        }
        for (const auto& [rname, meta] : relations_) {
            if (!meta.transitive) continue;
            for (const auto& d : domains_) {
                for (const auto& c : plane_concepts(d, rname)) {
                    try {
                        (void)oracle_classify(c, rname, d);
                    } catch (const CycleFault& e) {
                        throw AlgebraError(std::string("conductive cycle: ") + e.what());
                    }
                }
            }
        }
    }

    std::set<std::string> plane_concepts(const Domain& d, const std::string& r) const {
        std::set<std::string> out;
        std::optional<Domain> at = d;
        const bool monotone = relation(r).tau == Tau::monotone;
        while (at) {
            for (const auto& [k, v] : fiber(*at)) {
                if (k.rel == r) {
                    out.insert(k.from);
                    out.insert(k.to);
                }
            }
            if (!monotone) break;
            at = parent_prefix(*at);
        }
        return out;
    }

    std::set<Domain> domains_;
    std::map<Domain, Fiber> fibers_;
    std::map<std::string, RelationMeta> relations_;
    std::vector<Bridge> bridges_;
};

} // namespace quadbar
