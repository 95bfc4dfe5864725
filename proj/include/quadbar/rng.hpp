#pragma once

#include <cmath>
#include <cstdint>

namespace quadbar {

/**
 * Deterministic random stream (splitmix64 core, Box-Muller normals).
 *
 * The standard-library distributions are implementation-defined, so Monte
 * Carlo results would not be reproducible across toolchains. This generator
 * produces identical sequences for identical seeds everywhere.
 *
 * Trial independence: derive a child stream with Rng::stream(master, index);
 * results are then invariant to execution order and degree of parallelism.
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : state_(seed) {}

    /** Child stream for trial `index` of a run seeded with `master`. */
    static Rng stream(std::uint64_t master, std::uint64_t index) {
        return Rng(mix(mix(master) ^ mix(index + 0x9E3779B97F4A7C15ull)));
    }

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ull;
        return mix_final(state_);
    }

    /** Uniform double in [0, 1). 53-bit resolution. */
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /** Uniform double in [a, b). */
    double uniform(double a, double b) { return a + uniform() * (b - a); }

    /** Uniform integer in [0, n). n must be > 0. */
    std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

    /** Standard normal via Box-Muller. Consumes two uniforms per call. */
    double normal() {
        double u1 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9E3779B97F4A7C15ull;
        return mix_final(z);
    }

    static std::uint64_t mix_final(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
};

} // namespace quadbar
