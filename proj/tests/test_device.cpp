#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "quadbar/device.hpp"
#include "quadbar/rng.hpp"

using namespace quadbar;

TEST_CASE("target resistances are the three nominal levels") {
    const DeviceParams p;
    REQUIRE(target_resistance(TruthValue::holds, p) == 10e3);
    REQUIRE(target_resistance(TruthValue::undefined, p) == 100e3);
    REQUIRE(target_resistance(TruthValue::negated, p) == 1e6);
    REQUIRE_NOTHROW(p.validate());
}

TEST_CASE("thresholds default to the geometric means of the nominal currents") {
    const DeviceParams p;
    REQUIRE_THAT(p.i_high_threshold_amp,
                 Catch::Matchers::WithinRel(std::sqrt(20e-6 * 2e-6), 1e-12));
    REQUIRE_THAT(p.i_low_threshold_amp,
                 Catch::Matchers::WithinRel(std::sqrt(2e-6 * 0.2e-6), 1e-12));
    REQUIRE_THAT(p.i_high_threshold_amp, Catch::Matchers::WithinRel(6.3245553e-6, 1e-6));
    REQUIRE_THAT(p.i_low_threshold_amp, Catch::Matchers::WithinRel(0.63245553e-6, 1e-6));
}

TEST_CASE("zero variance programming hits the target exactly") {
    DeviceParams p;
    p.sigma_log = 0.0;
    Rng rng(1);
    for (TruthValue v : {TruthValue::holds, TruthValue::undefined, TruthValue::negated}) {
        const auto inst = write_junction(v, p, rng);
        REQUIRE(inst.sampled_r_ohm == target_resistance(v, p));
        REQUIRE(inst.target == v);
    }
}

TEST_CASE("programming variability is log-normal with the configured spread") {
    DeviceParams p; // sigma_log = 0.15
    Rng rng(314159);
    const std::size_t n = 1'000'000;
    std::vector<double> log_r(n);
    for (std::size_t i = 0; i < n; ++i)
        log_r[i] = std::log(write_junction(TruthValue::holds, p, rng).sampled_r_ohm);

    std::vector<double> sorted = log_r;
    std::nth_element(sorted.begin(), sorted.begin() + n / 2, sorted.end());
    const double median_r = std::exp(sorted[n / 2]);
    REQUIRE_THAT(median_r, Catch::Matchers::WithinRel(10e3, 0.01));

    double mean = 0.0;
    for (double x : log_r) mean += x;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double x : log_r) var += (x - mean) * (x - mean);
    const double stddev = std::sqrt(var / static_cast<double>(n - 1));
    REQUIRE_THAT(stddev, Catch::Matchers::WithinRel(0.15, 0.02));
}

TEST_CASE("rewriting a junction redraws from the same distribution") {
    DeviceParams p;
    Rng rng(8);
    const auto first = write_junction(TruthValue::holds, p, rng);
    const auto second = write_junction(TruthValue::holds, p, rng);
    REQUIRE(first.target == second.target);
    REQUIRE(first.sampled_r_ohm != second.sampled_r_ohm);
}

TEST_CASE("noiseless reads follow Ohm's law at the nominal currents") {
    DeviceParams p;
    p.snr_db = std::numeric_limits<double>::infinity();
    Rng rng(2);
    REQUIRE_THAT(read_current(DeviceInstance{TruthValue::holds, 10e3}, p, rng),
                 Catch::Matchers::WithinRel(20e-6, 1e-12));
    REQUIRE_THAT(read_current(DeviceInstance{TruthValue::undefined, 100e3}, p, rng),
                 Catch::Matchers::WithinRel(2e-6, 1e-12));
    REQUIRE_THAT(read_current(DeviceInstance{TruthValue::negated, 1e6}, p, rng),
                 Catch::Matchers::WithinRel(0.2e-6, 1e-12));
}

TEST_CASE("read noise scales with the instantaneous signal") {
    DeviceParams p; // 20 dB
    Rng rng(77);
    const DeviceInstance inst{TruthValue::holds, 10e3};
    const std::size_t n = 200'000;
    double mean = 0.0, var = 0.0;
    std::vector<double> xs(n);
    for (auto& x : xs) x = read_current(inst, p, rng);
    for (double x : xs) mean += x;
    mean /= static_cast<double>(n);
    for (double x : xs) var += (x - mean) * (x - mean);
    const double stddev = std::sqrt(var / static_cast<double>(n - 1));
    REQUIRE_THAT(mean, Catch::Matchers::WithinRel(20e-6, 0.001));
    REQUIRE_THAT(stddev, Catch::Matchers::WithinRel(2e-6, 0.02)); // signal / 10
}

TEST_CASE("the comparator decodes the three nominal currents") {
    const DeviceParams p;
    REQUIRE(decode(20e-6, p) == TruthValue::holds);
    REQUIRE(decode(2e-6, p) == TruthValue::undefined);
    REQUIRE(decode(0.2e-6, p) == TruthValue::negated);
    // boundary equality decodes downward
    REQUIRE(decode(p.i_high_threshold_amp, p) == TruthValue::undefined);
    REQUIRE(decode(p.i_low_threshold_amp, p) == TruthValue::negated);
    REQUIRE(decode(-1e-6, p) == TruthValue::negated);
}

TEST_CASE("noiseless write-read-decode round trip is exact") {
    DeviceParams p;
    p.sigma_log = 0.0;
    p.snr_db = std::numeric_limits<double>::infinity();
    Rng rng(3);
    for (TruthValue v : {TruthValue::holds, TruthValue::undefined, TruthValue::negated})
        REQUIRE(decode(read_current(write_junction(v, p, rng), p, rng), p) == v);
}

TEST_CASE("nominal per-state fidelity shows no errors at modest scale") {
    DeviceParams p;
    const std::size_t trials = 20'000;
    std::size_t errors = 0;
    for (TruthValue v : {TruthValue::holds, TruthValue::undefined, TruthValue::negated}) {
        for (std::size_t t = 0; t < trials; ++t) {
            Rng stream = Rng::stream(55, t * 3 + static_cast<std::uint64_t>(to_int(v) + 1));
            const auto inst = write_junction(v, p, stream);
            if (decode(read_current(inst, p, stream), p) != v) ++errors;
        }
    }
    REQUIRE(errors == 0);
}

TEST_CASE("device parameter invariants are enforced") {
    DeviceParams p;
    p.r_mid_ohm = 50e3; // only 5x above r_low
    REQUIRE_THROWS_AS(p.validate(), DeviceError);
    DeviceParams q;
    q.i_low_threshold_amp = q.i_high_threshold_amp + 1.0;
    REQUIRE_THROWS_AS(q.validate(), DeviceError);
}

TEST_CASE("flow operator settles on acyclic planes and its support is reachability") {
    // chain 0 -> 1 -> 2 -> 3 plus an unreachable node 4
    FlowPlane plane = FlowPlane::empty(5);
    plane.at(0, 1) = 1.0;
    plane.at(1, 2) = 1.0;
    plane.at(2, 3) = 1.0;
    std::vector<double> drive{1.0, 0.0, 0.0, 0.0, 0.0};
    const auto result = network_flow_fixed_point(plane, drive);
    REQUIRE(result.converged);

    // reachability oracle: breadth-first over the holds edges
    std::vector<bool> reachable{true, true, true, true, false};
    for (std::size_t i = 0; i < 5; ++i) {
        if (reachable[i])
            REQUIRE(result.state[i] > 0.0);
        else
            REQUIRE(result.state[i] == 0.0);
    }
}

TEST_CASE("flow operator on an empty plane returns the drive immediately") {
    const FlowPlane plane = FlowPlane::empty(4);
    const std::vector<double> drive{0.0, 2.0, 0.0, 1.0};
    const auto result = network_flow_fixed_point(plane, drive);
    REQUIRE(result.converged);
    REQUIRE(result.iterations == 1);
    REQUIRE(result.state == drive);
}

TEST_CASE("a conductive two-cycle never converges") {
    FlowPlane plane = FlowPlane::empty(2);
    plane.at(0, 1) = 1.0;
    plane.at(1, 0) = 1.0;
    const std::vector<double> drive{1.0, 0.0};
    const auto result = network_flow_fixed_point(plane, drive);
    REQUIRE_FALSE(result.converged);
}
