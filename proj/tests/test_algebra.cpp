#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>

#include "quadbar/algebra.hpp"
#include "quadbar/fixtures.hpp"
#include "quadbar/kb_io.hpp"
#include "support/random_algebra.hpp"

using namespace quadbar;

namespace {

DomainAlgebra small_algebra() {
    DomainAlgebra da;
    da.add_relation({"is_a", Tau::monotone, true});
    da.add_relation({"has_dosage", Tau::non_monotone, false});
    da.add_domain(parse_domain("@Med"));
    da.add_domain(parse_domain("@Med@Peds"));
    return da;
}

// Independent cycle oracle: depth-first search over explicit holds edges of
// one fiber (the fixtures used with it keep everything in a single fiber).
bool dfs_has_cycle(const DomainAlgebra& da, const std::string& rel, const Domain& d) {
    std::map<std::string, std::vector<std::string>> adj;
    std::set<std::string> nodes;
    for (const auto& [k, v] : da.fiber(d)) {
        if (k.rel != rel || v != TruthValue::holds) continue;
        adj[k.from].push_back(k.to);
        nodes.insert(k.from);
        nodes.insert(k.to);
    }
    std::map<std::string, int> color; // 0 new, 1 open, 2 done
    std::function<bool(const std::string&)> visit = [&](const std::string& u) {
        color[u] = 1;
        for (const auto& v : adj[u]) {
            if (color[v] == 1) return true;
            if (color[v] == 0 && visit(v)) return true;
        }
        color[u] = 2;
        return false;
    };
    for (const auto& n : nodes)
        if (color[n] == 0 && visit(n)) return true;
    return false;
}

} // namespace

TEST_CASE("oracle_truth resolves explicit, inherited and blocked lookups") {
    auto da = small_algebra();
    const Domain med = parse_domain("@Med");
    const Domain peds = parse_domain("@Med@Peds");

    da.insert_unchecked(Quad{"A", "is_a", med, "B", TruthValue::holds});
    da.insert_unchecked(Quad{"Aspirin", "has_dosage", med, "HighDose", TruthValue::holds});
    da.finalize();

    REQUIRE(da.oracle_truth("A", "is_a", "B", med) == TruthValue::holds);
    // monotone: the child fiber is empty at that key, the parent value flows in
    REQUIRE(da.oracle_truth("A", "is_a", "B", peds) == TruthValue::holds);
    // non-monotone relations never inherit
    REQUIRE(da.oracle_truth("Aspirin", "has_dosage", "HighDose", peds) == TruthValue::undefined);
    REQUIRE(da.oracle_truth("Aspirin", "has_dosage", "HighDose", med) == TruthValue::holds);
}

TEST_CASE("nearest ancestor wins and explicit child values override") {
    DomainAlgebra da;
    da.add_relation({"is_a", Tau::monotone, true});
    const Domain a = parse_domain("@T");
    const Domain b = parse_domain("@T@U");
    const Domain c = parse_domain("@T@U@V");
    for (const auto& d : {a, b, c}) da.add_domain(d);
    da.insert_unchecked(Quad{"x", "is_a", a, "y", TruthValue::holds});
    da.insert_unchecked(Quad{"x", "is_a", b, "y", TruthValue::negated});
    da.finalize();

    REQUIRE(da.oracle_truth("x", "is_a", "y", a) == TruthValue::holds);
    REQUIRE(da.oracle_truth("x", "is_a", "y", b) == TruthValue::negated);
    REQUIRE(da.oracle_truth("x", "is_a", "y", c) == TruthValue::negated); // nearest is @T@U
}

TEST_CASE("a key with an empty ancestor chain reads undefined everywhere") {
    Rng rng(31);
    const auto da = testsupport::random_algebra(rng);
    for (const auto& d : da.domains()) {
        REQUIRE(da.oracle_truth("nowhere1", "is_a", "nowhere2", d) == TruthValue::undefined);
    }
}

TEST_CASE("oracle_classify follows the bundled classification chains") {
    const auto da = load_icd11_mini();
    REQUIRE(da.oracle_classify("CA40.00", "is_a", parse_domain("@ICD11@Anatomical")) ==
            std::vector<std::string>{"CA40.00", "Pneumonia", "Lower_Resp_Infection",
                                     "Respiratory_Disease"});
    REQUIRE(da.oracle_classify("CA40.00", "is_a", parse_domain("@ICD11@Etiological")) ==
            std::vector<std::string>{"CA40.00", "Bacterial_Infection", "Infectious_Disease"});
    REQUIRE(da.oracle_classify("CA40.00", "is_a", parse_domain("@ICD11@Clinical")) ==
            std::vector<std::string>{"CA40.00", "Acute_Lower_Respiratory"});
    // a root concept with no holds successor is its own chain
    REQUIRE(da.oracle_classify("Respiratory_Disease", "is_a",
                               parse_domain("@ICD11@Anatomical")) ==
            std::vector<std::string>{"Respiratory_Disease"});
}

TEST_CASE("oracle_classify on a branching taxonomy visits breadth-first in index order") {
    auto da = small_algebra();
    const Domain med = parse_domain("@Med");
    da.insert_unchecked(Quad{"s", "is_a", med, "m2", TruthValue::holds});
    da.insert_unchecked(Quad{"s", "is_a", med, "m1", TruthValue::holds});
    da.insert_unchecked(Quad{"m1", "is_a", med, "top", TruthValue::holds});
    da.insert_unchecked(Quad{"m2", "is_a", med, "top", TruthValue::holds}); // diamond
    da.finalize();
    REQUIRE(da.oracle_classify("s", "is_a", med) ==
            std::vector<std::string>{"s", "m1", "m2", "top"});
}

TEST_CASE("oracle_classify faults on a conductive cycle") {
    auto da = small_algebra();
    const Domain med = parse_domain("@Med");
    da.insert_unchecked(Quad{"a", "is_a", med, "b", TruthValue::holds});
    da.insert_unchecked(Quad{"b", "is_a", med, "a", TruthValue::holds});
    REQUIRE_THROWS_AS(da.oracle_classify("a", "is_a", med), CycleFault);
}

TEST_CASE("admissible_insert accepts clean writes and rejects the three faults") {
    auto da = small_algebra();
    const Domain med = parse_domain("@Med");

    REQUIRE(da.admissible_insert(Quad{"A", "is_a", med, "B", TruthValue::holds}).accepted);

    SECTION("duplicate conflict on the same key") {
        const auto r = da.admissible_insert(Quad{"A", "is_a", med, "B", TruthValue::negated});
        REQUIRE_FALSE(r.accepted);
        REQUIRE(r.reason == RejectReason::duplicate_conflict);
        // an identical re-assert is not a conflict
        REQUIRE(da.admissible_insert(Quad{"A", "is_a", med, "B", TruthValue::holds}).accepted);
    }

    SECTION("conductive cycle through a holds chain") {
        REQUIRE(da.admissible_insert(Quad{"B", "is_a", med, "C", TruthValue::holds}).accepted);
        const auto r = da.admissible_insert(Quad{"C", "is_a", med, "A", TruthValue::holds});
        REQUIRE_FALSE(r.accepted);
        REQUIRE(r.reason == RejectReason::cycle);
        REQUIRE_FALSE(dfs_has_cycle(da, "is_a", med));
        // self loops are cycles too
        const auto self = da.admissible_insert(Quad{"A", "is_a", med, "A", TruthValue::holds});
        REQUIRE_FALSE(self.accepted);
        REQUIRE(self.reason == RejectReason::cycle);
    }

    SECTION("derived contradiction against a transitive chain") {
        REQUIRE(da.admissible_insert(Quad{"B", "is_a", med, "C", TruthValue::holds}).accepted);
        const auto r = da.admissible_insert(Quad{"A", "is_a", med, "C", TruthValue::negated});
        REQUIRE_FALSE(r.accepted);
        REQUIRE(r.reason == RejectReason::derived_contradiction);
    }

    SECTION("derived contradiction against an inherited value") {
        const Domain peds = parse_domain("@Med@Peds");
        const auto r = da.admissible_insert(Quad{"A", "is_a", peds, "B", TruthValue::negated});
        REQUIRE_FALSE(r.accepted);
        REQUIRE(r.reason == RejectReason::derived_contradiction);
        // the same polarity is fine
        REQUIRE(da.admissible_insert(Quad{"A", "is_a", peds, "B", TruthValue::holds}).accepted);
    }
}

TEST_CASE("accepted insert sequences never create cycles") {
    Rng rng(2024);
    for (int trial = 0; trial < 40; ++trial) {
        auto da = small_algebra();
        const Domain med = parse_domain("@Med");
        std::vector<std::string> pool;
        for (int i = 0; i < 8; ++i) pool.push_back("n" + std::to_string(i));
        for (int op = 0; op < 60; ++op) {
            const auto& from = pool[rng.below(pool.size())];
            const auto& to = pool[rng.below(pool.size())];
            const TruthValue v = rng.uniform() < 0.8 ? TruthValue::holds : TruthValue::negated;
            (void)da.admissible_insert(Quad{from, "is_a", med, to, v});
            REQUIRE_FALSE(dfs_has_cycle(da, "is_a", med));
        }
        for (const auto& c : pool) REQUIRE_NOTHROW(da.oracle_classify(c, "is_a", med));
    }
}

TEST_CASE("undefined-valued records assert nothing") {
    auto da = small_algebra();
    const Domain med = parse_domain("@Med");
    da.insert_unchecked(Quad{"A", "is_a", med, "B", TruthValue::undefined});
    REQUIRE(da.quad_count() == 0);
    REQUIRE(da.admissible_insert(Quad{"A", "is_a", med, "B", TruthValue::undefined}).accepted);
    REQUIRE(da.quad_count() == 0);
}

TEST_CASE("erase retracts explicit assertions and absent keys are a no-op") {
    auto da = small_algebra();
    const Domain med = parse_domain("@Med");
    REQUIRE(da.admissible_insert(Quad{"A", "is_a", med, "B", TruthValue::holds}).accepted);
    da.erase("A", "is_a", "B", med);
    REQUIRE(da.oracle_truth("A", "is_a", "B", med) == TruthValue::undefined);
    da.erase("A", "is_a", "B", med);
    REQUIRE(da.quad_count() == 0);
}

TEST_CASE("bridges must connect incomparable domains") {
    auto da = small_algebra();
    REQUIRE_THROWS_AS(da.add_bridge(Bridge{"A", parse_domain("@Med"), "A",
                                           parse_domain("@Med@Peds"), "same_entity_across"}),
                      AlgebraError);
}

TEST_CASE("knowledge-base files round-trip byte for byte") {
    const auto da = load_icd11_mini();
    const auto dir = std::filesystem::temp_directory_path() / "quadbar_kb_test";
    std::filesystem::create_directories(dir);
    const std::string kb = (dir / "f.kb.jsonl").string();
    const std::string rel = (dir / "f.relations.jsonl").string();
    const std::string br = (dir / "f.bridges.jsonl").string();
    write_file(kb, dump_kb(da));
    write_file(rel, dump_relations(da));
    write_file(br, dump_bridges(da));

    const auto loaded = load_algebra(KbPaths{kb, rel, br, std::nullopt});
    REQUIRE(dump_kb(loaded) == dump_kb(da));
    REQUIRE(dump_relations(loaded) == dump_relations(da));
    REQUIRE(dump_bridges(loaded) == dump_bridges(da));
    REQUIRE(loaded.domains() == da.domains());
}

TEST_CASE("loader errors carry the file and line of the offence") {
    const auto dir = std::filesystem::temp_directory_path() / "quadbar_kb_test";
    std::filesystem::create_directories(dir);
    const std::string bad = (dir / "bad.kb.jsonl").string();
    write_file(bad, "{\"from\":\"A\",\"rel\":\"is_a\",\"domain\":\"@M\",\"to\":\"B\",\"value\":1}\n"
                    "{\"from\":\"A\",\"rel\":\"is_a\",\"domain\":\"@M\",\"to\":\"C\",\"value\":7}\n");
    DomainAlgebra da;
    da.add_relation({"is_a", Tau::monotone, true});
    try {
        load_kb(da, bad);
        FAIL("expected a load error");
    } catch (const IoError& e) {
        const std::string msg = e.what();
        REQUIRE(msg.find(":2") != std::string::npos);
    }
    REQUIRE_THROWS_AS(load_kb(da, (dir / "missing.jsonl").string()), IoError);
}

TEST_CASE("value zero in a record is accepted and normalized to absence") {
    const auto dir = std::filesystem::temp_directory_path() / "quadbar_kb_test";
    std::filesystem::create_directories(dir);
    const std::string kb = (dir / "zero.kb.jsonl").string();
    write_file(kb, "{\"from\":\"A\",\"rel\":\"is_a\",\"domain\":\"@M\",\"to\":\"B\",\"value\":0}\n");
    DomainAlgebra da;
    da.add_relation({"is_a", Tau::monotone, true});
    load_kb(da, kb);
    REQUIRE(da.quad_count() == 0);
    REQUIRE(da.domains().count(parse_domain("@M")) == 1);
}
