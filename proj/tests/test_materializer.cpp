#include <catch2/catch_amalgamated.hpp>

#include <algorithm>

#include "quadbar/fixtures.hpp"
#include "quadbar/homomorphism.hpp"
#include "quadbar/materializer.hpp"
#include "support/random_algebra.hpp"

using namespace quadbar;

TEST_CASE("hasse edges are exactly the covering pairs") {
    REQUIRE(hasse_edges({parse_domain("@M")}).empty());

    const std::set<Domain> chain{parse_domain("@M"), parse_domain("@M@A"),
                                 parse_domain("@M@A@X")};
    const std::set<std::pair<Domain, Domain>> want{
        {parse_domain("@M"), parse_domain("@M@A")},
        {parse_domain("@M@A"), parse_domain("@M@A@X")}};
    REQUIRE(hasse_edges(chain) == want);
}

TEST_CASE("hasse reachability closure equals pairwise refinement on random sets") {
    Rng rng(5150);
    for (int trial = 0; trial < 30; ++trial) {
        const auto base = testsupport::random_domain_set(rng, 1 + rng.below(3), 16);
        const auto delta = meet_closure(std::set<Domain>(base.begin(), base.end()));
        const auto edges = hasse_edges(delta);

        // Floyd-Warshall style closure over the covering pairs
        std::vector<Domain> ds(delta.begin(), delta.end());
        const std::size_t n = ds.size();
        std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
        for (std::size_t i = 0; i < n; ++i) reach[i][i] = true;
        for (const auto& [p, c] : edges) {
            std::size_t pi = std::find(ds.begin(), ds.end(), p) - ds.begin();
            std::size_t ci = std::find(ds.begin(), ds.end(), c) - ds.begin();
            reach[pi][ci] = true;
        }
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    if (reach[i][k] && reach[k][j]) reach[i][j] = true;

        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                REQUIRE(reach[i][j] == refines(ds[j], ds[i]));
    }
}

TEST_CASE("unfold_tau emits one gate per relation per edge, ON iff monotone") {
    const auto da = load_icd11_mini();
    const auto gates = unfold_tau(da);
    const auto edges = hasse_edges(da.domains());
    REQUIRE(gates.size() == da.relations().size() * edges.size());
    for (const auto& [key, on] : gates) {
        if (key.rel == "is_a") REQUIRE(on);
        if (key.rel == "has_dosage") REQUIRE_FALSE(on);
    }
}

TEST_CASE("buffer tree stage count is the exact fan-out ceiling") {
    REQUIRE(buffer_tree_plan(0, 4).stages == 0);
    REQUIRE(buffer_tree_plan(1, 4).stages == 0);
    REQUIRE(buffer_tree_plan(4, 4).stages == 1);
    REQUIRE(buffer_tree_plan(5, 4).stages == 2);
    REQUIRE(buffer_tree_plan(8192, 4).stages == 7); // 4^6 = 4096 < 8192 <= 4^7
    const auto plan = buffer_tree_plan(8192, 4, 0.15);
    REQUIRE_THAT(plan.propagation_delay_ns, Catch::Matchers::WithinRel(1.05, 1e-9));
    REQUIRE_THROWS_AS(buffer_tree_plan(10, 1), TopologyError);
}

TEST_CASE("a single-domain single-quad algebra compiles to the minimal topology") {
    DomainAlgebra da;
    da.add_relation({"is_a", Tau::monotone, true});
    da.add_domain(parse_domain("@Solo"));
    da.insert_unchecked(Quad{"a", "is_a", parse_domain("@Solo"), "b", TruthValue::holds});
    da.finalize();

    const auto ct = compile(da);
    REQUIRE(ct.arrays.size() == 1);
    REQUIRE(ct.hasse_edges.empty());
    REQUIRE(ct.gates.empty());
    REQUIRE(ct.junction_count() == 1);
    const auto& plane = ct.plane(parse_domain("@Solo"), "is_a");
    REQUIRE(plane.at({"a", "b"}) == TruthValue::holds);
}

TEST_CASE("the mini fixture compiles to three axis trees under a shared root") {
    const auto da = load_icd11_mini();
    const auto ct = compile(da);
    REQUIRE(ct.arrays.size() == 4); // three axes + the meet-closure root
    REQUIRE(ct.hasse_edges.size() == 3);
    REQUIRE(ct.gates.size() == 6);
    REQUIRE(ct.meta_states.size() == 2);

    const auto targets =
        ct.bridge_targets("CA40.00", parse_domain("@ICD11@Anatomical"));
    REQUIRE(targets ==
            std::vector<std::pair<std::string, Domain>>{
                {"CA40.00", parse_domain("@ICD11@Etiological")},
                {"CA40.00", parse_domain("@ICD11@Clinical")}});

    // inherited index spaces: the axis arrays carry their fiber concepts
    const auto& anat = ct.array(parse_domain("@ICD11@Anatomical"));
    REQUIRE(anat.has_concept("CA40.00"));
    REQUIRE(anat.has_concept("Respiratory_Disease"));
    REQUIRE(anat.has_relation("is_a"));
}

TEST_CASE("compilation is deterministic byte for byte") {
    Rng rng(606);
    const auto da = testsupport::random_algebra(rng);
    const auto a = topology_to_json(compile(da)).dump();
    const auto b = topology_to_json(compile(da)).dump();
    REQUIRE(a == b);

    // serialize -> parse -> serialize is stable
    const auto parsed = topology_from_json(nlohmann::ordered_json::parse(a));
    REQUIRE(topology_to_json(parsed).dump() == a);
}

TEST_CASE("array_ancestor matches the algebraic meet everywhere") {
    const auto mini = compile(load_icd11_mini());
    const Domain anat = parse_domain("@ICD11@Anatomical");
    const Domain etio = parse_domain("@ICD11@Etiological");
    REQUIRE(array_ancestor(mini, anat, etio) == parse_domain("@ICD11"));
    REQUIRE(array_ancestor(mini, anat, anat) == anat);

    Rng rng(8181);
    for (int trial = 0; trial < 15; ++trial) {
        const auto da = testsupport::random_algebra(rng);
        const auto ct = compile(da);
        for (const auto& [a, sa] : ct.arrays)
            for (const auto& [b, sb] : ct.arrays)
                REQUIRE(array_ancestor(ct, a, b) == meet(a, b));
    }
}

TEST_CASE("array_implication agrees with the enumerated implication everywhere") {
    // identity case on a chain-shaped topology
    DomainAlgebra chain_da;
    chain_da.add_relation({"is_a", Tau::monotone, true});
    chain_da.add_domain(parse_domain("@M"));
    chain_da.add_domain(parse_domain("@M@A"));
    chain_da.insert_unchecked(Quad{"x", "is_a", parse_domain("@M"), "y", TruthValue::holds});
    chain_da.finalize();
    const auto chain_ct = compile(chain_da);
    REQUIRE(array_implication(chain_ct, parse_domain("@M@A"), parse_domain("@M@A")) ==
            heyting_implication(parse_domain("@M@A"), parse_domain("@M@A"), chain_da.domains()));

    // the five-domain fixture value
    DomainAlgebra five;
    five.add_relation({"is_a", Tau::monotone, true});
    for (const char* s : {"@M", "@M@A", "@M@A@X", "@M@B", "@M@B@Y"})
        five.add_domain(parse_domain(s));
    five.finalize();
    const auto five_ct = compile(five);
    REQUIRE(array_implication(five_ct, parse_domain("@M@A"), parse_domain("@M@B")) ==
            parse_domain("@M@B@Y"));

    Rng rng(9292);
    for (int trial = 0; trial < 15; ++trial) {
        const auto da = testsupport::random_algebra(rng);
        const auto ct = compile(da);
        for (const auto& [a, sa] : ct.arrays)
            for (const auto& [b, sb] : ct.arrays)
                REQUIRE(try_array_implication(ct, a, b) ==
                        try_heyting_implication(a, b, da.domains()));
    }
}

TEST_CASE("gate count is exactly relations times edges") {
    Rng rng(404);
    for (int trial = 0; trial < 10; ++trial) {
        const auto da = testsupport::random_algebra(rng);
        const auto ct = compile(da);
        REQUIRE(ct.gates.size() == da.relations().size() * ct.hasse_edges.size());
    }
}

TEST_CASE("removing a bridge changes only the register bank") {
    auto da = load_icd11_mini();
    const auto full = topology_to_json(compile(da));

    DomainAlgebra pruned = load_icd11_mini();
    // rebuild without one bridge
    DomainAlgebra rebuilt;
    for (const auto& [name, meta] : pruned.relations()) rebuilt.add_relation(meta);
    for (const auto& d : pruned.domains()) rebuilt.add_domain(d);
    for (const auto& q : pruned.all_quads()) rebuilt.insert_unchecked(q);
    for (std::size_t i = 1; i < pruned.bridges().size(); ++i)
        rebuilt.add_bridge(pruned.bridges()[i]);
    rebuilt.finalize();
    const auto less = topology_to_json(compile(rebuilt));

    REQUIRE(full.at("arrays") == less.at("arrays"));
    REQUIRE(full.at("hasse_edges") == less.at("hasse_edges"));
    REQUIRE(full.at("gates") == less.at("gates"));
    REQUIRE(full.at("meta_states") == less.at("meta_states"));
    REQUIRE(full.at("bridge_bank") != less.at("bridge_bank"));
}

TEST_CASE("verify_homomorphism passes vacuously on a single-domain algebra") {
    DomainAlgebra da;
    da.add_relation({"r", Tau::non_monotone, false});
    da.add_domain(parse_domain("@One"));
    da.insert_unchecked(Quad{"a", "r", parse_domain("@One"), "b", TruthValue::negated});
    da.finalize();
    const auto report = verify_homomorphism(da, compile(da));
    REQUIRE(report.all_passed());
    REQUIRE(report.checks.size() == 8);
}

TEST_CASE("verify_homomorphism passes 8/8 on the mini fixture") {
    const auto da = load_icd11_mini();
    const auto report = verify_homomorphism(da, compile(da));
    for (const auto& c : report.checks) {
        INFO(c.id << " " << c.detail);
        REQUIRE(c.passed);
    }
}

TEST_CASE("single-fault injections fail exactly the matching check") {
    const auto da = load_icd11_mini();

    SECTION("a flipped gate fails only the gate-typing check") {
        auto ct = compile(da);
        auto it = ct.gates.begin();
        it->second = !it->second;
        const auto report = verify_homomorphism(da, ct);
        REQUIRE(report.failed_ids() == std::vector<std::string>{"L6"});
        REQUIRE(report.check("L6").detail.find(it->first.rel) != std::string::npos);
    }

    SECTION("a quad moved across fibers fails only fiber isolation") {
        auto ct = compile(da);
        const Domain anat = parse_domain("@ICD11@Anatomical");
        const Domain etio = parse_domain("@ICD11@Etiological");
        auto& from_plane = ct.targets.at(anat).at("is_a");
        const auto entry = *from_plane.begin();
        from_plane.erase(from_plane.begin());
        ct.targets[etio]["is_a"][entry.first] = entry.second;
        const auto report = verify_homomorphism(da, ct);
        REQUIRE(report.failed_ids() == std::vector<std::string>{"L1"});
    }

    SECTION("a bridge between comparable domains fails only bridge preservation") {
        auto ct = compile(da);
        ct.bridge_bank[{"CA40.00", parse_domain("@ICD11")}].emplace_back(
            "CA40.00", parse_domain("@ICD11@Anatomical"));
        const auto report = verify_homomorphism(da, ct);
        REQUIRE(report.failed_ids() == std::vector<std::string>{"L8"});
    }
}
