#pragma once

#include <cstdio>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "quadbar/algebra.hpp"
#include "quadbar/engine.hpp"
#include "quadbar/fixtures.hpp"
#include "quadbar/materializer.hpp"
#include "quadbar/stats.hpp"
#include "quadbar/version.hpp"

namespace quadbar {

enum class Capability { C1, C2, C3, C4, C5, C6 };

inline const char* to_string(Capability c) {
    switch (c) {
    case Capability::C1: return "C1";
    case Capability::C2: return "C2";
    case Capability::C3: return "C3";
    case Capability::C4: return "C4";
    case Capability::C5: return "C5";
    default: return "C6";
    }
}

inline Capability capability_from_string(const std::string& s) {
    if (s == "C1" || s == "c1") return Capability::C1;
    if (s == "C2" || s == "c2") return Capability::C2;
    if (s == "C3" || s == "c3") return Capability::C3;
    if (s == "C4" || s == "c4") return Capability::C4;
    if (s == "C5" || s == "c5") return Capability::C5;
    if (s == "C6" || s == "c6") return Capability::C6;
    throw std::invalid_argument("unknown capability test: " + s);
}

/**
 * Everything a capability run needs: the compiled topology, the software
 * ground truth, and the designated classification query.
 */
struct ExperimentContext {
    std::shared_ptr<const CrossbarTopology> topo;
    DomainAlgebra algebra;
    Domain cascade_domain;
    std::string cascade_rel;
    std::string cascade_start;
    std::vector<std::string> expected_chain;
};

/** Default bench context: the bundled mini fixture at the given parameters. */
inline ExperimentContext make_mini_context(DeviceParams params = {}) {
    ExperimentContext ctx;
    ctx.algebra = load_icd11_mini();
    ctx.topo = std::make_shared<CrossbarTopology>(compile(ctx.algebra, params));
    ctx.cascade_domain = parse_domain("@ICD11@Anatomical");
    ctx.cascade_rel = "is_a";
    ctx.cascade_start = "CA40.00";
    ctx.expected_chain =
        ctx.algebra.oracle_classify(ctx.cascade_start, ctx.cascade_rel, ctx.cascade_domain);
    return ctx;
}

/** Context for an arbitrary fixture; the cascade query defaults to the
 *  lexicographically first classifiable concept. */
inline ExperimentContext make_context(DomainAlgebra da, const Domain& cascade_domain,
                                      const std::string& rel, const std::string& start,
                                      DeviceParams params = {}) {
    ExperimentContext ctx;
    ctx.algebra = std::move(da);
    ctx.topo = std::make_shared<CrossbarTopology>(compile(ctx.algebra, params));
    ctx.cascade_domain = cascade_domain;
    ctx.cascade_rel = rel;
    ctx.cascade_start = start;
    ctx.expected_chain = ctx.algebra.oracle_classify(start, rel, cascade_domain);
    return ctx;
}

namespace detail {

inline ChipState make_chip(const ExperimentContext& ctx, std::uint64_t seed) {
    ChipState chip(ctx.topo, seed);
    chip.inherit_pass();
    return chip;
}

} // namespace detail

/**
 * One capability test at `trials` independent trials. The reported trial
 * count is the test's natural denominator (reads for C1/C2, relation checks
 * for C4, lookups for C6).
 *
 *   C1  domain scoping: random single-junction reads stay in their array
 *   C2  ternary fidelity: write/read/decode each of the three states
 *   C3  cascade: the designated classification chain, fresh variability
 *   C4  inheritance typing: meta-junction decode vs the typing table
 *   C5  write check: a contradicting write must be rejected
 *   C6  bridges: register lookups vs the bridge ground truth
 */
inline ErrorStats run_capability(Capability test, const ExperimentContext& ctx,
                                 std::uint64_t trials, std::uint64_t seed) {
    ChipState chip = detail::make_chip(ctx, seed);
    std::uint64_t errors = 0;

    switch (test) {
    case Capability::C1: {
        std::vector<const ArraySpec*> arrays;
        for (const auto& [d, spec] : ctx.topo->arrays)
            if (!spec.concepts.empty() && !spec.relations.empty()) arrays.push_back(&spec);
        std::vector<Domain> log;
        chip.set_access_log(&log);
        for (std::uint64_t t = 0; t < trials; ++t) {
            Rng stream = Rng::stream(seed, t);
            const ArraySpec& spec = *arrays[stream.below(arrays.size())];
            chip.set_rng(Rng::stream(seed ^ 0xA11CE5ull, t));
            for (int i = 0; i < 4; ++i) {
                log.clear();
                const auto& rel = spec.relations[stream.below(spec.relations.size())];
                const auto& row = spec.concepts[stream.below(spec.concepts.size())];
                const auto& col = spec.concepts[stream.below(spec.concepts.size())];
                (void)chip.crud_read(JunctionKey{spec.domain, rel, row, col});
                for (const auto& touched : log)
                    if (touched != spec.domain) ++errors;
            }
        }
        chip.set_access_log(nullptr);
        return ErrorStats::from_counts(trials * 4, errors);
    }

    case Capability::C2: {
        const JunctionKey key{ctx.cascade_domain, ctx.cascade_rel, ctx.expected_chain.at(0),
                              ctx.expected_chain.at(1)};
        const TruthValue states[3] = {TruthValue::holds, TruthValue::undefined,
                                      TruthValue::negated};
        for (std::uint64_t t = 0; t < trials; ++t) {
            chip.set_rng(Rng::stream(seed, t));
            for (TruthValue v : states) {
                chip.force_write(key, v);
                if (chip.crud_read(key) != v) ++errors;
            }
        }
        chip.force_write(key, TruthValue::holds);
        return ErrorStats::from_counts(trials * 3, errors);
    }

    case Capability::C3: {
        for (std::uint64_t t = 0; t < trials; ++t) {
            chip.set_rng(Rng::stream(seed, t));
            chip.resample_plane(ctx.cascade_domain, ctx.cascade_rel);
            try {
                const auto trace =
                    chip.cascade(ctx.cascade_domain, ctx.cascade_rel, ctx.cascade_start);
                if (trace.chain != ctx.expected_chain) ++errors;
            } catch (const CycleFault&) {
                ++errors;
            }
        }
        return ErrorStats::from_counts(trials, errors);
    }

    case Capability::C4: {
        const auto& meta = ctx.topo->meta_states;
        for (std::uint64_t t = 0; t < trials; ++t) {
            chip.set_rng(Rng::stream(seed, t));
            chip.resample_meta();
            for (const auto& [rel, state] : meta) {
                const bool gate_on = chip.read_meta(rel) == TruthValue::holds;
                const bool want_on = state == TruthValue::holds;
                if (gate_on != want_on) ++errors;
            }
        }
        return ErrorStats::from_counts(trials * meta.size(), errors);
    }

    case Capability::C5: {
        const JunctionKey key{ctx.cascade_domain, ctx.cascade_rel, ctx.expected_chain.at(0),
                              ctx.expected_chain.at(1)};
        const Quad contradicting{key.from, key.rel, key.domain, key.to, TruthValue::negated};
        for (std::uint64_t t = 0; t < trials; ++t) {
            chip.set_rng(Rng::stream(seed, t));
            chip.force_write(key, TruthValue::holds); // fresh variability each trial
            const CrudResult r = chip.crud_create(contradicting);
            if (r.committed) {
                ++errors;
                chip.force_write(key, TruthValue::holds);
            }
        }
        return ErrorStats::from_counts(trials, errors);
    }

    case Capability::C6: {
        std::vector<std::pair<std::string, Domain>> keys;
        for (const auto& [key, outs] : ctx.topo->bridge_bank) keys.push_back(key);
        std::vector<Domain> domains(ctx.algebra.domains().begin(), ctx.algebra.domains().end());
        for (std::uint64_t t = 0; t < trials; ++t) {
            Rng stream = Rng::stream(seed, t);
            for (int i = 0; i < 3; ++i) {
                std::string concept_id;
                Domain d;
                if (!keys.empty() && stream.uniform() < 0.75) {
                    const auto& key = keys[stream.below(keys.size())];
                    concept_id = key.first;
                    d = key.second;
                } else {
                    concept_id = "UNLISTED_" + std::to_string(stream.below(1000));
                    d = domains[stream.below(domains.size())];
                }
                std::vector<std::pair<std::string, Domain>> want;
                for (const auto& b : ctx.algebra.bridges())
                    if (b.from_concept == concept_id && b.from_domain == d)
                        want.emplace_back(b.to_concept, b.to_domain);
                if (chip.bridge_lookup(concept_id, d) != want) ++errors;
            }
        }
        return ErrorStats::from_counts(trials * 3, errors);
    }
    }
    throw std::logic_error("unreachable");
}

// -- variability sweep ------------------------------------------------------------

struct SweepRow {
    double sigma_log = 0.0;
    std::map<TruthValue, ErrorStats> per_state;
    ErrorStats cascade;
};

inline std::vector<double> default_sigma_grid() {
    return {0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40, 0.50};
}

/**
 * Per-state decode error and designated-cascade error across a σ_log grid,
 * SNR held constant. Every junction resistance is resampled at the grid σ
 * on every trial; each (σ, column, trial) owns an independent stream.
 */
inline std::vector<SweepRow> variability_sweep(const ExperimentContext& ctx,
                                               const std::vector<double>& sigma_grid,
                                               std::uint64_t trials, std::uint64_t seed) {
    std::vector<SweepRow> rows;
    for (std::size_t s = 0; s < sigma_grid.size(); ++s) {
        SweepRow row;
        row.sigma_log = sigma_grid[s];
        DeviceParams p = ctx.topo->device_params;
        p.sigma_log = sigma_grid[s];

        const TruthValue states[3] = {TruthValue::holds, TruthValue::undefined,
                                      TruthValue::negated};
        for (std::size_t c = 0; c < 3; ++c) {
            const std::uint64_t sub = Rng::stream(seed, (s << 8) | c).next_u64();
            std::uint64_t errors = 0;
            for (std::uint64_t t = 0; t < trials; ++t) {
                Rng stream = Rng::stream(sub, t);
                const DeviceInstance inst = write_junction(states[c], p, stream);
                if (decode(read_current(inst, p, stream), p) != states[c]) ++errors;
            }
            row.per_state[states[c]] = ErrorStats::from_counts(trials, errors);
        }

        {
            const std::uint64_t sub = Rng::stream(seed, (s << 8) | 3).next_u64();
            ChipState chip(ctx.topo, sub, p);
            chip.inherit_pass();
            std::uint64_t errors = 0;
            for (std::uint64_t t = 0; t < trials; ++t) {
                chip.set_rng(Rng::stream(sub, t));
                chip.resample_all();
                try {
                    const auto trace =
                        chip.cascade(ctx.cascade_domain, ctx.cascade_rel, ctx.cascade_start);
                    if (trace.chain != ctx.expected_chain) ++errors;
                } catch (const CycleFault&) {
                    ++errors;
                }
            }
            row.cascade = ErrorStats::from_counts(trials, errors);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

// -- report emission ---------------------------------------------------------------

namespace detail {

inline std::string fmt(const char* format, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), format, v);
    return buf;
}

inline std::string params_comment(const DeviceParams& p, std::uint64_t trials,
                                  std::uint64_t seed) {
    std::string out;
    out += "# seed=" + std::to_string(seed) + " trials=" + std::to_string(trials) + "\n";
    out += "# v_read_volt=" + fmt("%.6g", p.v_read_volt) +
           " snr_db=" + (p.noise_enabled() ? fmt("%.6g", p.snr_db) : std::string("inf")) +
           " sigma_log=" + fmt("%.6g", p.sigma_log) + "\n";
    out += "# r_ohm=[" + fmt("%.6g", p.r_low_ohm) + "," + fmt("%.6g", p.r_mid_ohm) + "," +
           fmt("%.6g", p.r_high_ohm) + "] thresholds_amp=[" +
           fmt("%.6g", p.i_high_threshold_amp) + "," + fmt("%.6g", p.i_low_threshold_amp) +
           "]\n";
    return out;
}

} // namespace detail

/** Plot-ready sweep rows; byte-stable for identical inputs. */
inline std::string sweep_to_csv(const std::vector<SweepRow>& rows, const DeviceParams& params,
                                std::uint64_t trials, std::uint64_t seed) {
    std::string out = "# quadbar sweep v" + std::string(kVersion) + "\n";
    out += detail::params_comment(params, trials, seed);
    out += "sigma_log,err_plus,err_zero,err_minus,err_cascade\n";
    for (const auto& r : rows) {
        out += detail::fmt("%.4f", r.sigma_log);
        out += "," + detail::fmt("%.6e", r.per_state.at(TruthValue::holds).rate);
        out += "," + detail::fmt("%.6e", r.per_state.at(TruthValue::undefined).rate);
        out += "," + detail::fmt("%.6e", r.per_state.at(TruthValue::negated).rate);
        out += "," + detail::fmt("%.6e", r.cascade.rate);
        out += "\n";
    }
    return out;
}

inline nlohmann::ordered_json stats_to_json(const ErrorStats& s) {
    nlohmann::ordered_json j;
    j["trials"] = s.trials;
    j["errors"] = s.errors;
    j["rate"] = s.rate;
    j["ci_low"] = s.ci_low;
    j["ci_high"] = s.ci_high;
    return j;
}

inline nlohmann::ordered_json sweep_to_document(const std::vector<SweepRow>& rows,
                                                const DeviceParams& params, std::uint64_t trials,
                                                std::uint64_t seed) {
    nlohmann::ordered_json j;
    j["report"] = "sweep";
    j["version"] = kVersion;
    j["seed"] = seed;
    j["trials"] = trials;
    j["snr_db"] = params.noise_enabled() ? nlohmann::ordered_json(params.snr_db)
                                         : nlohmann::ordered_json("inf");
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
        nlohmann::ordered_json row;
        row["sigma_log"] = r.sigma_log;
        row["err_plus"] = stats_to_json(r.per_state.at(TruthValue::holds));
        row["err_zero"] = stats_to_json(r.per_state.at(TruthValue::undefined));
        row["err_minus"] = stats_to_json(r.per_state.at(TruthValue::negated));
        row["err_cascade"] = stats_to_json(r.cascade);
        arr.push_back(row);
    }
    j["rows"] = arr;
    return j;
}

inline nlohmann::ordered_json
capability_report(const std::vector<std::pair<std::string, ErrorStats>>& results,
                  const DeviceParams& params, std::uint64_t trials, std::uint64_t seed) {
    nlohmann::ordered_json j;
    j["report"] = "capability";
    j["version"] = kVersion;
    j["seed"] = seed;
    j["trials_requested"] = trials;
    j["sigma_log"] = params.sigma_log;
    j["snr_db"] = params.noise_enabled() ? nlohmann::ordered_json(params.snr_db)
                                         : nlohmann::ordered_json("inf");
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& [name, stats] : results) {
        nlohmann::ordered_json rec;
        rec["test"] = name;
        rec["trials"] = stats.trials;
        rec["errors"] = stats.errors;
        rec["rate"] = stats.rate;
        rec["ci_low"] = stats.ci_low;
        rec["ci_high"] = stats.ci_high;
        arr.push_back(rec);
    }
    j["results"] = arr;
    return j;
}

/** CSV flavor of the capability report. */
inline std::string capability_to_csv(const std::vector<std::pair<std::string, ErrorStats>>& results,
                                     const DeviceParams& params, std::uint64_t trials,
                                     std::uint64_t seed) {
    std::string out = "# quadbar bench v" + std::string(kVersion) + "\n";
    out += detail::params_comment(params, trials, seed);
    out += "test,trials,errors,rate,ci_low,ci_high\n";
    for (const auto& [name, s] : results) {
        out += name;
        out += "," + std::to_string(s.trials);
        out += "," + std::to_string(s.errors);
        out += "," + detail::fmt("%.6e", s.rate);
        out += "," + detail::fmt("%.6e", s.ci_low);
        out += "," + detail::fmt("%.6e", s.ci_high);
        out += "\n";
    }
    return out;
}

} // namespace quadbar
