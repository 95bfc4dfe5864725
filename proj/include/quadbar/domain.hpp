#pragma once

#include <algorithm>
#include <compare>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace quadbar {

struct DomainParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/** Lattice operation failure (no unique join, empty candidate set). */
struct LatticeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/**
 * A domain string: ordered non-empty name segments, rendered "@Seg1@Seg2@...".
 *
 * Two orientations are used deliberately and kept as distinct predicates:
 *   - refines(child, parent): parent is a prefix of child. Wiring direction;
 *     child domains specialize their parents.
 *   - generalizes_into(a, b): a is a prefix of b. The lattice order in which
 *     the longest common prefix is the greatest lower bound.
 */
class Domain {
public:
    Domain() = default;
    explicit Domain(std::vector<std::string> segments) : segments_(std::move(segments)) {
        for (const auto& s : segments_) {
            if (s.empty()) throw DomainParseError("domain segment must be non-empty");
        }
        if (segments_.empty()) throw DomainParseError("domain needs at least one segment");
    }

    const std::vector<std::string>& segments() const { return segments_; }
    std::size_t depth() const { return segments_.size(); }
    bool empty() const { return segments_.empty(); }

    std::string render() const {
        std::string out;
        for (const auto& s : segments_) {
            out += '@';
            out += s;
        }
        return out;
    }

    friend bool operator==(const Domain&, const Domain&) = default;
    friend auto operator<=>(const Domain& a, const Domain& b) {
        return a.segments_ <=> b.segments_;
    }

private:
    std::vector<std::string> segments_;
};

/**
 * Parse "@Seg1@Seg2@..." into a Domain. Errors name the offending position.
 * render(parse(text)) == text for every accepted text.
 */
inline Domain parse_domain(const std::string& text) {
    if (text.empty() || text[0] != '@')
        throw DomainParseError("domain must begin with '@' (position 0): \"" + text + "\"");
    std::vector<std::string> segments;
    std::string current;
    for (std::size_t i = 1; i <= text.size(); ++i) {
        const bool at_end = i == text.size();
        const char c = at_end ? '@' : text[i];
        if (c == '@') {
            if (current.empty())
                throw DomainParseError("empty domain segment at position " + std::to_string(i) +
                                       ": \"" + text + "\"");
            segments.push_back(current);
            current.clear();
        } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
            throw DomainParseError("whitespace in domain at position " + std::to_string(i) +
                                   ": \"" + text + "\"");
        } else {
            current += c;
        }
    }
    return Domain(std::move(segments));
}

/** True iff `parent` is a (not necessarily proper) prefix of `child`. */
inline bool refines(const Domain& child, const Domain& parent) {
    const auto& c = child.segments();
    const auto& p = parent.segments();
    if (p.size() > c.size()) return false;
    return std::equal(p.begin(), p.end(), c.begin());
}

/** Lattice order: a is a prefix of b (a is the more general domain). */
inline bool generalizes_into(const Domain& a, const Domain& b) { return refines(b, a); }

inline bool comparable(const Domain& a, const Domain& b) {
    return refines(a, b) || refines(b, a);
}

/**
 * Longest common prefix — the greatest lower bound in the generality order.
 * None when the first segments differ (parallel trees share no ancestor).
 */
inline std::optional<Domain> meet(const Domain& a, const Domain& b) {
    const auto& sa = a.segments();
    const auto& sb = b.segments();
    std::size_t n = 0;
    while (n < sa.size() && n < sb.size() && sa[n] == sb[n]) ++n;
    if (n == 0) return std::nullopt;
    return Domain(std::vector<std::string>(sa.begin(), sa.begin() + n));
}

/**
 * The unique maximum of `ds` under the generality order: the single element
 * every other element is a prefix of. Throws LatticeError when two maximal
 * elements are incomparable, naming both.
 */
inline Domain join_within(const std::set<Domain>& ds) {
    if (ds.empty()) throw LatticeError("join of an empty domain set is undefined");
    const Domain* best = &*ds.begin();
    for (const auto& d : ds) {
        if (d.depth() > best->depth()) best = &d;
    }
    for (const auto& d : ds) {
        if (!generalizes_into(d, *best))
            throw LatticeError("no unique join: " + d.render() + " and " + best->render() +
                               " are incomparable");
    }
    return *best;
}

/**
 * Relative pseudo-complement d1 -> d2, by finite enumeration over Δ:
 * the join of S = { d in Δ : meet(d, d1) exists and generalizes into d2 }.
 * Throws LatticeError when S is empty or has no unique join.
 */
inline Domain heyting_implication(const Domain& d1, const Domain& d2,
                                  const std::set<Domain>& delta) {
    std::set<Domain> candidates;
    for (const auto& d : delta) {
        const auto m = meet(d, d1);
        if (m && generalizes_into(*m, d2)) candidates.insert(d);
    }
    if (candidates.empty())
        throw LatticeError("implication " + d1.render() + " -> " + d2.render() +
                           " has an empty candidate set");
    return join_within(candidates);
}

/** Exception-free variant for structure checks that compare definedness. */
inline std::optional<Domain> try_heyting_implication(const Domain& d1, const Domain& d2,
                                                     const std::set<Domain>& delta) {
    try {
        return heyting_implication(d1, d2, delta);
    } catch (const LatticeError&) {
        return std::nullopt;
    }
}

/** Close a domain set under pairwise meet (longest common prefix). */
inline std::set<Domain> meet_closure(std::set<Domain> delta) {
    bool changed = true;
    while (changed) {
        changed = false;
        std::vector<Domain> snapshot(delta.begin(), delta.end());
        for (std::size_t i = 0; i < snapshot.size(); ++i) {
            for (std::size_t j = i + 1; j < snapshot.size(); ++j) {
                const auto m = meet(snapshot[i], snapshot[j]);
                if (m && delta.insert(*m).second) changed = true;
            }
        }
    }
    return delta;
}

} // namespace quadbar
