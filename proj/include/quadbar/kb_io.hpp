#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "quadbar/algebra.hpp"

namespace quadbar {

using json = nlohmann::ordered_json;

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

template <typename Fn>
void for_each_record(const std::string& path, Fn&& fn) {
    const std::string text = read_file(path);
    std::istringstream lines(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(lines, line)) {
        ++lineno;
        if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::parse_error& e) {
            throw IoError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        try {
            fn(rec);
        } catch (const std::exception& e) {
            throw IoError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
}

} // namespace detail

/** One relation-table record per line: {"rel", "tau", "transitive"}. */
inline void load_relations(DomainAlgebra& da, const std::string& path) {
    detail::for_each_record(path, [&](const json& rec) {
        RelationMeta meta;
        meta.name = rec.at("rel").get<std::string>();
        const std::string tau = rec.at("tau").get<std::string>();
        if (tau == "monotone")
            meta.tau = Tau::monotone;
        else if (tau == "non_monotone")
            meta.tau = Tau::non_monotone;
        else
            throw IoError("tau must be monotone or non_monotone, got " + tau);
        meta.transitive = rec.value("transitive", false);
        da.add_relation(std::move(meta));
    });
}

/** One assertion per line: {"from", "rel", "domain", "to", "value"}. */
inline void load_kb(DomainAlgebra& da, const std::string& path) {
    detail::for_each_record(path, [&](const json& rec) {
        Quad q;
        q.from = rec.at("from").get<std::string>();
        q.rel = rec.at("rel").get<std::string>();
        q.domain = parse_domain(rec.at("domain").get<std::string>());
        q.to = rec.at("to").get<std::string>();
        q.value = truth_from_int(rec.at("value").get<int>());
        da.insert_unchecked(q);
    });
}

/** One bridge per line: {"concept", "from_domain", "to_concept", "to_domain", "kind"}. */
inline void load_bridges(DomainAlgebra& da, const std::string& path) {
    detail::for_each_record(path, [&](const json& rec) {
        Bridge b;
        b.from_concept = rec.at("concept").get<std::string>();
        b.from_domain = parse_domain(rec.at("from_domain").get<std::string>());
        b.to_concept = rec.at("to_concept").get<std::string>();
        b.to_domain = parse_domain(rec.at("to_domain").get<std::string>());
        b.kind = rec.value("kind", "same_entity_across");
        da.add_bridge(std::move(b));
    });
}

/** Optional explicit domain list: {"domain"} records (may add empty domains). */
inline void load_domains(DomainAlgebra& da, const std::string& path) {
    detail::for_each_record(path, [&](const json& rec) {
        da.add_domain(parse_domain(rec.at("domain").get<std::string>()));
    });
}

struct KbPaths {
    std::string kb;
    std::string relations;
    std::optional<std::string> bridges;
    std::optional<std::string> domains;
};

/** Load and finalize a full algebra from its file set. */
inline DomainAlgebra load_algebra(const KbPaths& paths) {
    DomainAlgebra da;
    load_relations(da, paths.relations);
    load_kb(da, paths.kb);
    if (paths.bridges) load_bridges(da, *paths.bridges);
    if (paths.domains) load_domains(da, *paths.domains);
    da.finalize();
    return da;
}

// -- canonical serialization (sorted, byte-stable) ---------------------------

inline std::string dump_kb(const DomainAlgebra& da) {
    std::string out;
    for (const auto& q : da.all_quads()) {
        json rec;
        rec["from"] = q.from;
        rec["rel"] = q.rel;
        rec["domain"] = q.domain.render();
        rec["to"] = q.to;
        rec["value"] = to_int(q.value);
        out += rec.dump();
        out += '\n';
    }
    return out;
}

inline std::string dump_relations(const DomainAlgebra& da) {
    std::string out;
    for (const auto& [name, meta] : da.relations()) {
        json rec;
        rec["rel"] = name;
        rec["tau"] = to_string(meta.tau);
        rec["transitive"] = meta.transitive;
        out += rec.dump();
        out += '\n';
    }
    return out;
}

inline std::string dump_bridges(const DomainAlgebra& da) {
    std::string out;
    for (const auto& b : da.bridges()) {
        json rec;
        rec["concept"] = b.from_concept;
        rec["from_domain"] = b.from_domain.render();
        rec["to_concept"] = b.to_concept;
        rec["to_domain"] = b.to_domain.render();
        rec["kind"] = b.kind;
        out += rec.dump();
        out += '\n';
    }
    return out;
}

inline std::string dump_domains(const DomainAlgebra& da) {
    std::string out;
    for (const auto& d : da.domains()) {
        json rec;
        rec["domain"] = d.render();
        out += rec.dump();
        out += '\n';
    }
    return out;
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << content;
    if (!out) throw IoError("write failed: " + path);
}

} // namespace quadbar
