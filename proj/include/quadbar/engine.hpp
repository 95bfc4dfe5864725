#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "quadbar/device.hpp"
#include "quadbar/rng.hpp"
#include "quadbar/topology.hpp"

namespace quadbar {

struct AddressError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/** Address of one junction: array, relation plane, row, column. */
struct JunctionKey {
    Domain domain;
    std::string rel;
    std::string from;
    std::string to;

    friend bool operator==(const JunctionKey&, const JunctionKey&) = default;
    friend auto operator<=>(const JunctionKey&, const JunctionKey&) = default;
};

/**
 * Where a junction's current target came from. Simulator metadata only:
 * invariant checks read it, decode paths never do.
 */
enum class Provenance { explicit_write, inherited, cleared };

struct StoredJunction {
    DeviceInstance device;
    Provenance provenance = Provenance::explicit_write;
};

/** One read cycle: one driven row, every column sensed and decoded. */
struct CycleRecord {
    std::string driven_row;
    std::map<std::string, TruthValue> decoded;
    std::vector<std::string> latched; // columns decoded +1, index order
    double elapsed_ns = 0.0;
};

/** Full record of one transitive classification cascade. */
struct CascadeTrace {
    Domain axis_domain;
    std::string relation;
    std::string start;
    std::vector<CycleRecord> cycles;
    std::vector<std::string> chain; // visit order
    double total_ns = 0.0;
};

struct CrudResult {
    bool committed = true;
    RejectReason reason = RejectReason::none;

    static CrudResult commit() { return {}; }
    static CrudResult reject(RejectReason r) { return {false, r}; }
};

/** Cascades in every bridged axis plus the register lookup that linked them. */
struct CrossAxisResult {
    std::vector<CascadeTrace> traces;
    std::vector<std::pair<std::string, Domain>> bridge_targets;
    std::size_t register_reads = 0;
    double total_ns = 0.0;
};

/**
 * Mutable physical state of one compiled chip: programmed junction instances
 * over an immutable topology. Single-writer; concurrent readers must own
 * independent random streams over cloned states.
 */
class ChipState {
public:
    ChipState(std::shared_ptr<const CrossbarTopology> topo, std::uint64_t seed)
        : ChipState(std::move(topo), seed, std::nullopt) {}

    ChipState(std::shared_ptr<const CrossbarTopology> topo, std::uint64_t seed,
              std::optional<DeviceParams> params_override)
        : topo_(std::move(topo)),
          params_(params_override ? *params_override : topo_->device_params),
          rng_(Rng::stream(seed, 0)) {
        params_.validate();
        for (const auto& [p, c] : topo_->hasse_edges) parent_of_.emplace(c, p);
        program_initial_state();
    }

    const CrossbarTopology& topology() const { return *topo_; }
    const DeviceParams& params() const { return params_; }
    Rng& rng() { return rng_; }
    void set_rng(Rng rng) { rng_ = rng; }

    /** Route junction touches into `log` (pass nullptr to stop recording). */
    void set_access_log(std::vector<Domain>* log) { access_log_ = log; }

    // -- single-row read cycle ------------------------------------------------

    CycleRecord read_cycle(const Domain& d, const std::string& rel, const std::string& row) {
        const ArraySpec& spec = require_array(d);
        require_relation(rel);
        if (!spec.has_concept(row))
            throw AddressError("row " + row + " not in array " + d.render());

        CycleRecord rec;
        rec.driven_row = row;
        for (const auto& col : spec.concepts) {
            const TruthValue v = sense(JunctionKey{d, rel, row, col});
            rec.decoded[col] = v;
            if (v == TruthValue::holds) rec.latched.push_back(col);
        }
        rec.elapsed_ns = params_.cycle_ns();
        return rec;
    }

    // -- transitive cascade -----------------------------------------------------

    /**
     * Iterated read cycles: each cycle's +1 columns join the FIFO frontier
     * (index-order ties); 0 and -1 outputs never enter it. A +1 edge back to
     * a visit-tree ancestor is a cycle fault (admissibility should have made
     * this unreachable).
     */
    CascadeTrace cascade(const Domain& d, const std::string& rel, const std::string& start) {
        if (!topo_->meta_states.count(rel)) throw AddressError("unknown relation " + rel);

        CascadeTrace trace;
        trace.axis_domain = d;
        trace.relation = rel;
        trace.start = start;

        std::map<std::string, std::string> parent;
        std::set<std::string> seen{start};
        std::deque<std::string> frontier{start};
        while (!frontier.empty()) {
            const std::string row = frontier.front();
            frontier.pop_front();
            CycleRecord rec = read_cycle(d, rel, row);
            trace.chain.push_back(row);
            trace.total_ns += rec.elapsed_ns;
            for (const auto& col : rec.latched) {
                if (is_tree_ancestor(col, row, parent, start))
                    throw CycleFault("cascade cycle: " + col + " re-entered from " + row +
                                     " in " + d.render());
                if (seen.insert(col).second) {
                    parent[col] = row;
                    frontier.push_back(col);
                }
            }
            trace.cycles.push_back(std::move(rec));
        }
        return trace;
    }

    // -- inheritance materialization --------------------------------------------

    /**
     * One top-down reindexing pass: for every covering edge and every ON
     * gate, make each child slot reflect its parent plane. Explicit child
     * values always win; parent values are copied in, and inherited copies
     * whose parent support vanished are retracted to the neutral state.
     * Re-running the pass on a settled chip reports zero changes.
     *
     * The provenance tag is the controller's record of its own writes; the
     * decode path never sees it.
     */
    std::size_t inherit_pass() {
        std::vector<std::pair<Domain, Domain>> edges(topo_->hasse_edges.begin(),
                                                     topo_->hasse_edges.end());
        std::sort(edges.begin(), edges.end(), [](const auto& a, const auto& b) {
            if (a.second.depth() != b.second.depth()) return a.second.depth() < b.second.depth();
            return a < b;
        });

        std::size_t changes = 0;
        for (const auto& [p, c] : edges) {
            for (const auto& [rel, state] : topo_->meta_states) {
                const auto git = topo_->gates.find(GateKey{rel, p, c});
                if (git == topo_->gates.end() || !git->second) continue; // no path exists

                std::set<std::pair<std::string, std::string>> keys;
                for (const auto& [key, stored] : plane_range(p, rel))
                    keys.insert({key.from, key.to});
                for (const auto& [key, stored] : plane_range(c, rel))
                    if (stored.provenance != Provenance::explicit_write)
                        keys.insert({key.from, key.to});

                for (const auto& [from, to] : keys) {
                    TruthValue support = TruthValue::undefined;
                    if (auto pit = junctions_.find(JunctionKey{p, rel, from, to});
                        pit != junctions_.end())
                        support = pit->second.device.target;

                    const JunctionKey child_key{c, rel, from, to};
                    const auto existing = junctions_.find(child_key);
                    const bool child_explicit =
                        existing != junctions_.end() &&
                        existing->second.provenance == Provenance::explicit_write &&
                        existing->second.device.target != TruthValue::undefined;
                    if (child_explicit) continue;

                    const TruthValue current = existing == junctions_.end()
                                                   ? TruthValue::undefined
                                                   : existing->second.device.target;
                    if (support != TruthValue::undefined) {
                        if (current != support) {
                            write(child_key, support, Provenance::inherited);
                            ++changes;
                        }
                    } else if (current != TruthValue::undefined) {
                        write(child_key, TruthValue::undefined, Provenance::cleared);
                        ++changes;
                    }
                }
            }
        }
        return changes;
    }

    // -- CRUD --------------------------------------------------------------------

    /**
     * Read-before-write admissibility on decoded (noisy) values, then the
     * programming pulse. The stored plane is the validator; no pulse is
     * issued on rejection. Same-pair conflicts read the addressed junction;
     * transitive contradiction/cycle checks scan the decoded plane.
     */
    CrudResult crud_create(const Quad& q) {
        const JunctionKey key{q.domain, q.rel, q.from, q.to};
        require_addressable(key);
        if (q.value == TruthValue::undefined) { // asserting absence = delete
            crud_delete(key);
            return CrudResult::commit();
        }

        const TruthValue own = sense(key);
        if (own != TruthValue::undefined && own != q.value)
            return CrudResult::reject(RejectReason::duplicate_conflict);

        if (auto evidence = gated_ancestor_evidence(key);
            evidence && *evidence != q.value)
            return CrudResult::reject(RejectReason::derived_contradiction);
        if (auto reason = transitive_inadmissible(key, q.value))
            return CrudResult::reject(*reason);

        write(key, q.value, Provenance::explicit_write);
        return CrudResult::commit();
    }

    TruthValue crud_read(const JunctionKey& key) {
        require_addressable(key);
        return sense(key);
    }

    /** READ -> VALIDATE -> WRITE; the key's own value is not a conflict. */
    CrudResult crud_update(const JunctionKey& key, TruthValue v2) {
        require_addressable(key);
        if (v2 == TruthValue::undefined) {
            crud_delete(key);
            return CrudResult::commit();
        }
        if (auto evidence = gated_ancestor_evidence(key); evidence && *evidence != v2)
            return CrudResult::reject(RejectReason::derived_contradiction);
        if (auto reason = transitive_inadmissible(key, v2))
            return CrudResult::reject(*reason);
        write(key, v2, Provenance::explicit_write);
        return CrudResult::commit();
    }

    /** Partial-RESET to the neutral state. Absent keys are a no-op commit. */
    CrudResult crud_delete(const JunctionKey& key) {
        require_addressable(key);
        if (junctions_.count(key)) write(key, TruthValue::undefined, Provenance::cleared);
        return CrudResult::commit();
    }

    // -- bridges and cross-axis queries -------------------------------------------

    /** Digital register lookup: deterministic, noise-free. */
    std::vector<std::pair<std::string, Domain>> bridge_lookup(const std::string& concept_id,
                                                              const Domain& d) const {
        return topo_->bridge_targets(concept_id, d);
    }

    /**
     * Cascade in the start axis, one register read, then a cascade in every
     * bridged axis from the returned address.
     */
    CrossAxisResult cross_axis_query(const std::string& start, const Domain& start_domain,
                                     const std::string& rel) {
        CrossAxisResult result;
        result.traces.push_back(cascade(start_domain, rel, start));
        result.bridge_targets = bridge_lookup(start, start_domain);
        result.register_reads = 1;
        for (const auto& [c2, d2] : result.bridge_targets)
            result.traces.push_back(cascade(d2, rel, c2));
        for (const auto& t : result.traces) result.total_ns += t.total_ns;
        result.total_ns += result.register_reads * params_.register_read_ns;
        return result;
    }

    // -- meta-array ----------------------------------------------------------------

    /** Noisy read of the meta-junction storing τ(rel); decoded gate drive. */
    TruthValue read_meta(const std::string& rel) {
        auto it = meta_junctions_.find(rel);
        if (it == meta_junctions_.end()) throw AddressError("unknown relation " + rel);
        return decode(read_current(it->second, params_, rng_), params_);
    }

    // -- state inspection / maintenance ---------------------------------------------

    std::optional<StoredJunction> junction_info(const JunctionKey& key) const {
        auto it = junctions_.find(key);
        if (it == junctions_.end()) return std::nullopt;
        return it->second;
    }

    std::size_t junction_count() const { return junctions_.size(); }

    /** FNV-1a over the sorted non-neutral junction targets. */
    std::uint64_t snapshot_hash() const {
        std::uint64_t h = 0xcbf29ce484222325ull;
        auto feed = [&h](const std::string& s) {
            for (unsigned char c : s) {
                h ^= c;
                h *= 0x100000001b3ull;
            }
            h ^= 0x1f;
            h *= 0x100000001b3ull;
        };
        for (const auto& [key, stored] : junctions_) {
            if (stored.device.target == TruthValue::undefined) continue;
            feed(key.domain.render());
            feed(key.rel);
            feed(key.from);
            feed(key.to);
            feed(to_string(stored.device.target));
        }
        return h;
    }

    /** Fresh programming pulse on every junction at its current target. */
    void resample_all() {
        for (auto& [key, stored] : junctions_)
            stored.device = write_junction(stored.device.target, params_, rng_);
        for (auto& [rel, inst] : meta_junctions_) inst = write_junction(inst.target, params_, rng_);
    }

    void resample_plane(const Domain& d, const std::string& rel) {
        for (auto& [key, stored] : plane_range(d, rel))
            stored.device = write_junction(stored.device.target, params_, rng_);
    }

    void resample_meta() {
        for (auto& [rel, inst] : meta_junctions_) inst = write_junction(inst.target, params_, rng_);
    }

    /** Raw programming pulse, no admissibility; test and load path. */
    void force_write(const JunctionKey& key, TruthValue v,
                     Provenance prov = Provenance::explicit_write) {
        write(key, v, prov);
    }

private:
    struct PlaneView {
        using Map = std::map<JunctionKey, StoredJunction>;
        Map::iterator first, last;
        Map::iterator begin() const { return first; }
        Map::iterator end() const { return last; }
    };

    PlaneView plane_range(const Domain& d, const std::string& rel) {
        auto first = junctions_.lower_bound(JunctionKey{d, rel, "", ""});
        auto last = first;
        while (last != junctions_.end() && last->first.domain == d && last->first.rel == rel)
            ++last;
        return PlaneView{first, last};
    }

    void program_initial_state() {
        for (const auto& [d, planes] : topo_->targets)
            for (const auto& [rel, plane] : planes)
                for (const auto& [pair, v] : plane)
                    write(JunctionKey{d, rel, pair.first, pair.second}, v,
                          Provenance::explicit_write);
        for (const auto& [rel, v] : topo_->meta_states)
            meta_junctions_[rel] = write_junction(v, params_, rng_);
    }

    const ArraySpec& require_array(const Domain& d) const {
        auto it = topo_->arrays.find(d);
        if (it == topo_->arrays.end()) throw AddressError("unknown domain " + d.render());
        return it->second;
    }

    void require_relation(const std::string& rel) const {
        if (!topo_->meta_states.count(rel)) throw AddressError("unknown relation " + rel);
    }

    void require_addressable(const JunctionKey& key) const {
        const ArraySpec& spec = require_array(key.domain);
        require_relation(key.rel);
        if (!spec.has_concept(key.from))
            throw AddressError("concept " + key.from + " not in array " + key.domain.render());
        if (!spec.has_concept(key.to))
            throw AddressError("concept " + key.to + " not in array " + key.domain.render());
    }

    void touch(const Domain& d) const {
        if (access_log_) access_log_->push_back(d);
    }

    /** Sense one junction; unprogrammed cells sit at exact nominal R_mid. */
    TruthValue sense(const JunctionKey& key) {
        touch(key.domain);
        auto it = junctions_.find(key);
        const DeviceInstance inst =
            it == junctions_.end() ? pristine_junction(params_) : it->second.device;
        return decode(read_current(inst, params_, rng_), params_);
    }

    void write(const JunctionKey& key, TruthValue v, Provenance prov) {
        touch(key.domain);
        junctions_[key] = StoredJunction{write_junction(v, params_, rng_), prov};
    }

    /**
     * Transitive-relation checks over the decoded plane, own key excluded for
     * updates. Values come from noisy decodes, never from targets; an
     * inherited conflict therefore reports the same way an explicit one does.
     */
    std::optional<RejectReason> transitive_inadmissible(const JunctionKey& key, TruthValue value) {
        if (!is_transitive(key.rel)) return std::nullopt;

        // decoded holds-graph of the plane's programmed cells; the addressed
        // key is never part of it (its value is what is being decided)
        std::map<std::string, std::vector<std::string>> holds_edges;
        for (const auto& [jkey, stored] : plane_range(key.domain, key.rel)) {
            if (jkey == key) continue;
            const TruthValue v = decode(read_current(stored.device, params_, rng_), params_);
            touch(jkey.domain);
            if (v == TruthValue::holds) holds_edges[jkey.from].push_back(jkey.to);
        }
        auto reaches = [&holds_edges](const std::string& a, const std::string& b) {
            std::set<std::string> seen{a};
            std::deque<std::string> q{a};
            while (!q.empty()) {
                auto u = q.front();
                q.pop_front();
                if (u == b) return true;
                auto it = holds_edges.find(u);
                if (it == holds_edges.end()) continue;
                for (const auto& n : it->second)
                    if (seen.insert(n).second) q.push_back(n);
            }
            return false;
        };

        if (value == TruthValue::negated && key.from != key.to && reaches(key.from, key.to))
            return RejectReason::derived_contradiction;
        if (value == TruthValue::holds && reaches(key.to, key.from)) return RejectReason::cycle;
        return std::nullopt;
    }

    bool is_transitive(const std::string& rel) const {
        auto it = topo_->transitive_relations.find(rel);
        return it != topo_->transitive_relations.end() && it->second;
    }

    /**
     * Inherited evidence for a key: walk covering parents while the gate for
     * this relation is ON and decode the same junction address there. The
     * nearest non-neutral decode is what the gated path would materialize.
     */
    std::optional<TruthValue> gated_ancestor_evidence(const JunctionKey& key) {
        Domain cur = key.domain;
        while (true) {
            auto pit = parent_of_.find(cur);
            if (pit == parent_of_.end()) return std::nullopt;
            const Domain& parent = pit->second;
            auto git = topo_->gates.find(GateKey{key.rel, parent, cur});
            if (git == topo_->gates.end() || !git->second) return std::nullopt; // path blocked
            auto jit = junctions_.find(JunctionKey{parent, key.rel, key.from, key.to});
            if (jit != junctions_.end()) {
                touch(parent);
                const TruthValue v =
                    decode(read_current(jit->second.device, params_, rng_), params_);
                if (v != TruthValue::undefined) return v;
            }
            cur = parent;
        }
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

    std::shared_ptr<const CrossbarTopology> topo_;
    DeviceParams params_;
    Rng rng_;
    std::map<Domain, Domain> parent_of_;
    std::map<JunctionKey, StoredJunction> junctions_;
    std::map<std::string, DeviceInstance> meta_junctions_;
    std::vector<Domain>* access_log_ = nullptr;
};

// -- trace serialization ---------------------------------------------------------

inline nlohmann::ordered_json cycle_to_json(const CycleRecord& rec) {
    nlohmann::ordered_json j;
    j["driven_row"] = rec.driven_row;
    nlohmann::ordered_json decoded = nlohmann::ordered_json::object();
    for (const auto& [c, v] : rec.decoded) decoded[c] = to_int(v);
    j["decoded"] = decoded;
    j["latched"] = rec.latched;
    j["elapsed_ns"] = rec.elapsed_ns;
    return j;
}

inline nlohmann::ordered_json trace_to_json(const CascadeTrace& t) {
    nlohmann::ordered_json j;
    j["axis_domain"] = t.axis_domain.render();
    j["relation"] = t.relation;
    j["start"] = t.start;
    j["chain"] = t.chain;
    j["cycle_count"] = t.cycles.size();
    nlohmann::ordered_json cycles = nlohmann::ordered_json::array();
    for (const auto& c : t.cycles) cycles.push_back(cycle_to_json(c));
    j["cycles"] = cycles;
    j["total_ns"] = t.total_ns;
    return j;
}

inline nlohmann::ordered_json cross_axis_to_json(const CrossAxisResult& r) {
    nlohmann::ordered_json j;
    nlohmann::ordered_json traces = nlohmann::ordered_json::array();
    std::size_t cycles = 0;
    for (const auto& t : r.traces) {
        traces.push_back(trace_to_json(t));
        cycles += t.cycles.size();
    }
    j["traces"] = traces;
    nlohmann::ordered_json targets = nlohmann::ordered_json::array();
    for (const auto& [c, d] : r.bridge_targets) targets.push_back({c, d.render()});
    j["bridge_targets"] = targets;
    j["register_reads"] = r.register_reads;
    j["total_cascade_cycles"] = cycles;
    j["total_ns"] = r.total_ns;
    return j;
}

/** Per-stage, per-cycle, and total timing of a trace. */
inline nlohmann::ordered_json timing_report(const CascadeTrace& t, const DeviceParams& p) {
    nlohmann::ordered_json j;
    nlohmann::ordered_json stages = nlohmann::ordered_json::object();
    for (const auto& [name, ns] : p.cycle_stage_ns) stages[name] = ns;
    j["stage_budget_ns"] = stages;
    j["per_cycle_ns"] = p.cycle_ns();
    j["cycles"] = t.cycles.size();
    j["total_ns"] = t.total_ns;
    return j;
}

} // namespace quadbar
