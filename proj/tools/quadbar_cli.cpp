// quadbar -- compile a domain-scoped ternary knowledge base onto a simulated
// memristive crossbar and run reads, cascades, CRUD, capability benchmarks
// and variability sweeps against it.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "quadbar/quadbar.hpp"

namespace {

using namespace quadbar;

struct InputOpts {
    std::string kb;
    std::string relations;
    std::string bridges;
    std::string domains;
    std::string topology;
};

void add_input_flags(CLI::App* cmd, InputOpts& in, bool with_topology = true) {
    cmd->add_option("--kb", in.kb, "knowledge-base file (one assertion per line)");
    cmd->add_option("--relations", in.relations, "relation table file");
    cmd->add_option("--bridges", in.bridges, "bridge file");
    cmd->add_option("--domains", in.domains, "optional explicit domain list");
    if (with_topology)
        cmd->add_option("--topology", in.topology, "precompiled topology document");
}

struct ParamOpts {
    double sigma_log = -1.0;
    std::string snr_db;
    double v_read = -1.0;
};

void add_param_flags(CLI::App* cmd, ParamOpts& p) {
    cmd->add_option("--sigma-log", p.sigma_log, "programming variability (std of ln R)");
    cmd->add_option("--snr-db", p.snr_db, "read SNR in dB ('inf' disables noise)");
    cmd->add_option("--v-read", p.v_read, "read voltage in volts");
}

DeviceParams resolve_params(const ParamOpts& p) {
    DeviceParams params;
    if (p.sigma_log >= 0.0) params.sigma_log = p.sigma_log;
    if (p.v_read > 0.0) params.v_read_volt = p.v_read;
    if (!p.snr_db.empty()) {
        if (p.snr_db == "inf" || p.snr_db == "INF")
            params.snr_db = std::numeric_limits<double>::infinity();
        else
            params.snr_db = std::stod(p.snr_db);
    }
    params.derive_thresholds();
    return params;
}

/** Knowledge base from files, or the bundled mini fixture when none given. */
DomainAlgebra resolve_algebra(const InputOpts& in) {
    if (in.kb.empty()) return load_icd11_mini();
    if (in.relations.empty()) throw IoError("--kb requires --relations");
    KbPaths paths;
    paths.kb = in.kb;
    paths.relations = in.relations;
    if (!in.bridges.empty()) paths.bridges = in.bridges;
    if (!in.domains.empty()) paths.domains = in.domains;
    return load_algebra(paths);
}

std::shared_ptr<const CrossbarTopology> resolve_topology(const InputOpts& in,
                                                         const ParamOpts& params) {
    if (!in.topology.empty()) {
        std::ifstream f(in.topology);
        if (!f) throw IoError("cannot open " + in.topology);
        nlohmann::ordered_json doc;
        f >> doc;
        return std::make_shared<CrossbarTopology>(topology_from_json(doc));
    }
    return std::make_shared<CrossbarTopology>(compile(resolve_algebra(in), resolve_params(params)));
}

void emit(const std::string& content, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << content;
        if (!content.empty() && content.back() != '\n') std::cout << '\n';
    } else {
        write_file(out_path, content);
        std::cerr << "wrote " << out_path << "\n";
    }
}

int cmd_compile(const InputOpts& in, const ParamOpts& p, const std::string& out) {
    const DomainAlgebra da = resolve_algebra(in);
    const CrossbarTopology ct = compile(da, resolve_params(p));
    const auto doc = topology_to_json(ct);
    if (!out.empty()) {
        write_file(out, doc.dump(2) + "\n");
        std::cerr << "wrote " << out << "\n";
        std::cout << doc.at("stats").dump(2) << "\n";
    } else {
        std::cout << doc.dump(2) << "\n";
    }
    return 0;
}

int cmd_verify(const InputOpts& in, const ParamOpts& p) {
    const DomainAlgebra da = resolve_algebra(in);
    const CrossbarTopology ct = compile(da, resolve_params(p));
    const auto report = verify_homomorphism(da, ct);
    for (const auto& c : report.checks) {
        std::cout << c.id << " " << c.name << ": " << (c.passed ? "PASS" : "FAIL");
        if (!c.passed) std::cout << "  [" << c.detail << "]";
        std::cout << "\n";
    }
    return report.all_passed() ? 0 : 1;
}

int cmd_query(const InputOpts& in, const ParamOpts& p, const std::string& start,
              const std::string& domain, const std::string& rel, bool cross_axis,
              std::uint64_t seed, const std::string& out) {
    auto topo = resolve_topology(in, p);
    ChipState chip(topo, seed);
    chip.inherit_pass();
    nlohmann::ordered_json doc;
    doc["seed"] = seed;
    if (cross_axis) {
        const auto result = chip.cross_axis_query(start, parse_domain(domain), rel);
        doc["query"] = "cross_axis";
        doc["result"] = cross_axis_to_json(result);
    } else {
        const auto trace = chip.cascade(parse_domain(domain), rel, start);
        doc["query"] = "cascade";
        doc["result"] = trace_to_json(trace);
        doc["timing"] = timing_report(trace, chip.params());
    }
    emit(doc.dump(2), out);
    return 0;
}

int cmd_crud(const InputOpts& in, const ParamOpts& p, const std::string& op, const Quad& quad,
             std::uint64_t seed, const std::string& out) {
    auto topo = resolve_topology(in, p);
    ChipState chip(topo, seed);
    chip.inherit_pass();
    const JunctionKey key{quad.domain, quad.rel, quad.from, quad.to};
    nlohmann::ordered_json doc;
    doc["op"] = op;
    doc["from"] = quad.from;
    doc["rel"] = quad.rel;
    doc["domain"] = quad.domain.render();
    doc["to"] = quad.to;
    if (op == "read") {
        doc["value"] = to_int(chip.crud_read(key));
    } else if (op == "insert") {
        const CrudResult r = chip.crud_create(quad);
        doc["value"] = to_int(quad.value);
        doc["committed"] = r.committed;
        if (!r.committed) doc["reason"] = to_string(r.reason);
    } else if (op == "update") {
        const CrudResult r = chip.crud_update(key, quad.value);
        doc["value"] = to_int(quad.value);
        doc["committed"] = r.committed;
        if (!r.committed) doc["reason"] = to_string(r.reason);
    } else { // delete
        chip.crud_delete(key);
        doc["committed"] = true;
        doc["readback"] = to_int(chip.crud_read(key));
    }
    emit(doc.dump(2), out);
    return 0;
}

int cmd_bench(const InputOpts& in, const ParamOpts& p, const std::string& test,
              std::uint64_t trials, std::uint64_t seed, const std::string& format,
              const std::string& out) {
    ExperimentContext ctx = make_mini_context(resolve_params(p));
    if (!in.kb.empty())
        ctx = [&] {
            auto da = resolve_algebra(in);
            // designated cascade: first holds-assertion of a transitive relation
            for (const auto& d : da.domains())
                for (const auto& [k, v] : da.fiber(d))
                    if (da.relation(k.rel).transitive && v == TruthValue::holds)
                        return make_context(std::move(da), d, k.rel, k.from, resolve_params(p));
            throw AlgebraError("fixture has no transitive assertions to cascade");
        }();

    std::vector<std::pair<std::string, ErrorStats>> results;
    if (test == "all") {
        for (Capability c : {Capability::C1, Capability::C2, Capability::C3, Capability::C4,
                             Capability::C5, Capability::C6})
            results.emplace_back(to_string(c), run_capability(c, ctx, trials, seed));
    } else {
        const Capability c = capability_from_string(test);
        results.emplace_back(to_string(c), run_capability(c, ctx, trials, seed));
    }

    if (format == "rows")
        emit(capability_to_csv(results, ctx.topo->device_params, trials, seed), out);
    else
        emit(capability_report(results, ctx.topo->device_params, trials, seed).dump(2), out);
    for (const auto& [name, s] : results)
        std::cerr << name << ": " << s.errors << " errors / " << s.trials << "\n";
    return 0;
}

int cmd_sweep(const InputOpts& in, const ParamOpts& p, std::vector<double> grid,
              std::uint64_t trials, std::uint64_t seed, const std::string& format,
              const std::string& out) {
    (void)in;
    ExperimentContext ctx = make_mini_context(resolve_params(p));
    if (grid.empty()) grid = default_sigma_grid();
    const auto rows = variability_sweep(ctx, grid, trials, seed);
    if (format == "document")
        emit(sweep_to_document(rows, ctx.topo->device_params, trials, seed).dump(2), out);
    else
        emit(sweep_to_csv(rows, ctx.topo->device_params, trials, seed), out);
    return 0;
}

int cmd_gen(const FixtureSpec& spec, const std::string& prefix) {
    const DomainAlgebra da = generate_fixture(spec);
    write_file(prefix + ".kb.jsonl", dump_kb(da));
    write_file(prefix + ".relations.jsonl", dump_relations(da));
    write_file(prefix + ".bridges.jsonl", dump_bridges(da));
    const CrossbarTopology ct = compile(da);
    std::size_t bank = 0;
    for (const auto& [k, v] : ct.bridge_bank) bank += v.size();
    nlohmann::ordered_json summary;
    summary["seed"] = spec.seed;
    summary["entities"] = spec.entities;
    summary["quads"] = da.quad_count();
    summary["arrays"] = ct.arrays.size();
    summary["hasse_edges"] = ct.hasse_edges.size();
    summary["gate_states"] = ct.gates.size();
    summary["gate_transistors"] = ct.gate_transistor_count();
    summary["junctions"] = ct.junction_count();
    summary["bridge_entries"] = bank;
    summary["meta_states"] = ct.meta_states.size();
    std::cout << summary.dump(2) << "\n";
    std::cerr << "wrote " << prefix << ".{kb,relations,bridges}.jsonl\n";
    return 0;
}

int cmd_demo(std::uint64_t seed) {
    const DomainAlgebra da = load_icd11_mini();
    auto topo = std::make_shared<CrossbarTopology>(compile(da));
    ChipState chip(topo, seed);
    chip.inherit_pass();

    const Domain anatomical = parse_domain("@ICD11@Anatomical");
    const auto result = chip.cross_axis_query("CA40.00", anatomical, "is_a");

    std::printf("Cross-axis classification of CA40.00 (bundled respiratory mini fixture)\n\n");
    std::size_t step = 1;
    std::size_t total_cycles = 0;
    auto print_trace = [&](const CascadeTrace& t) {
        std::printf("STEP %zu: cascade in %s from %s\n", step++, t.axis_domain.render().c_str(),
                    t.start.c_str());
        for (std::size_t i = 0; i < t.cycles.size(); ++i) {
            const auto& c = t.cycles[i];
            std::string latched;
            for (const auto& l : c.latched) latched += (latched.empty() ? "" : ", ") + l;
            if (latched.empty())
                std::printf("  cycle %zu: drive %s -> no +1 outputs (chain complete)\n", i + 1,
                            c.driven_row.c_str());
            else
                std::printf("  cycle %zu: drive %s -> +1 at %s\n", i + 1, c.driven_row.c_str(),
                            latched.c_str());
        }
        std::string chain;
        for (const auto& c : t.chain) chain += (chain.empty() ? "" : " -> ") + c;
        std::printf("  chain: %s   (%zu cycles, %.0f ns)\n\n", chain.c_str(), t.cycles.size(),
                    t.total_ns);
        total_cycles += t.cycles.size();
    };

    print_trace(result.traces.at(0));

    std::printf("STEP %zu: bridge register lookup (CA40.00, %s)\n", step++,
                anatomical.render().c_str());
    for (const auto& [c, d] : result.bridge_targets)
        std::printf("  -> (%s, %s)\n", c.c_str(), d.render().c_str());
    std::printf("  (%zu register read, %.0f ns)\n\n", result.register_reads,
                chip.params().register_read_ns * result.register_reads);

    for (std::size_t i = 1; i < result.traces.size(); ++i) print_trace(result.traces[i]);

    std::printf("Total: %zu cascade cycles + %zu register read = %.0f ns\n", total_cycles,
                result.register_reads, result.total_ns);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"domain-scoped ternary crossbar compiler and behavioral simulator"};
    app.require_subcommand(1);

    InputOpts in;
    ParamOpts params;
    std::string out, format = "document", test = "all", start, domain, rel = "is_a", op;
    std::uint64_t seed = 0, trials = 100000;
    bool cross_axis = false;
    std::vector<double> grid;
    Quad quad;
    int quad_value = 1;
    FixtureSpec spec;
    std::string prefix = "fixture";

    auto* c_compile = app.add_subcommand("compile", "compile KB files into a topology document");
    add_input_flags(c_compile, in, false);
    add_param_flags(c_compile, params);
    c_compile->add_option("--out", out, "topology output path");

    auto* c_verify = app.add_subcommand("verify", "run the structure-preservation suite");
    add_input_flags(c_verify, in, false);
    add_param_flags(c_verify, params);

    auto* c_query = app.add_subcommand("query", "cascade or cross-axis classification");
    add_input_flags(c_query, in);
    add_param_flags(c_query, params);
    c_query->add_option("--start", start, "start concept")->required();
    c_query->add_option("--domain", domain, "axis domain, e.g. @ICD11@Anatomical")->required();
    c_query->add_option("--rel", rel, "relation (default is_a)");
    c_query->add_flag("--cross-axis", cross_axis, "follow bridges into every axis");
    c_query->add_option("--seed", seed, "random stream seed");
    c_query->add_option("--out", out, "write the trace document here");

    auto* c_crud = app.add_subcommand("crud", "insert/read/update/delete one assertion");
    add_input_flags(c_crud, in);
    add_param_flags(c_crud, params);
    c_crud->add_option("op", op, "one of insert|read|update|delete")->required();
    c_crud->add_option("--from", quad.from)->required();
    c_crud->add_option("--rel", quad.rel)->required();
    c_crud->add_option("--domain", domain)->required();
    c_crud->add_option("--to", quad.to)->required();
    c_crud->add_option("--value", quad_value, "1, 0 or -1");
    c_crud->add_option("--seed", seed);
    c_crud->add_option("--out", out);

    auto* c_bench = app.add_subcommand("bench", "capability tests C1..C6");
    add_input_flags(c_bench, in, false);
    add_param_flags(c_bench, params);
    c_bench->add_option("--test", test, "C1..C6 or all");
    c_bench->add_option("--trials", trials);
    c_bench->add_option("--seed", seed);
    c_bench->add_option("--format", format, "rows or document");
    c_bench->add_option("--out", out);

    auto* c_sweep = app.add_subcommand("sweep", "variability sweep over sigma_log");
    add_param_flags(c_sweep, params);
    c_sweep->add_option("--sigma", grid, "sigma grid points (default: the reference grid)");
    c_sweep->add_option("--trials", trials);
    c_sweep->add_option("--seed", seed);
    c_sweep->add_option("--format", format, "rows or document");
    c_sweep->add_option("--out", out);

    auto* c_gen = app.add_subcommand("gen", "generate a synthetic fixture");
    c_gen->add_option("--entities", spec.entities);
    c_gen->add_option("--arrays", spec.arrays);
    c_gen->add_option("--axes", spec.axes);
    c_gen->add_option("--depth-min", spec.depth_min);
    c_gen->add_option("--depth-max", spec.depth_max);
    c_gen->add_option("--density", spec.density);
    c_gen->add_option("--bridge-fraction", spec.bridge_fraction);
    c_gen->add_option("--seed", spec.seed);
    c_gen->add_option("--out-prefix", prefix, "output file prefix");

    auto* c_demo = app.add_subcommand("demo", "worked cross-axis classification walkthrough");
    c_demo->add_option("--seed", seed);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (c_compile->parsed()) return cmd_compile(in, params, out);
        if (c_verify->parsed()) return cmd_verify(in, params);
        if (c_query->parsed())
            return cmd_query(in, params, start, domain, rel, cross_axis, seed, out);
        if (c_crud->parsed()) {
            if (op != "insert" && op != "read" && op != "update" && op != "delete")
                throw std::invalid_argument("crud op must be insert|read|update|delete");
            quad.domain = parse_domain(domain);
            quad.value = truth_from_int(quad_value);
            return cmd_crud(in, params, op, quad, seed, out);
        }
        if (c_bench->parsed()) return cmd_bench(in, params, test, trials, seed, format, out);
        if (c_sweep->parsed()) return cmd_sweep(in, params, grid, trials, seed, format, out);
        if (c_gen->parsed()) return cmd_gen(spec, prefix);
        if (c_demo->parsed()) return cmd_demo(seed);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
