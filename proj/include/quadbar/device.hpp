#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "quadbar/rng.hpp"
#include "quadbar/truth.hpp"

namespace quadbar {

struct DeviceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/**
 * Behavioral parameters of the 1T1R junction model and the read path.
 *
 * Defaults are the nominal operating point: 10 kΩ / 100 kΩ / 1 MΩ states,
 * 0.2 V reads (nominal currents 20 / 2 / 0.2 μA), geometric-mean comparator
 * thresholds, σ_log = 0.15 programming variability, 20 dB read SNR.
 */
struct DeviceParams {
    double r_low_ohm = 10e3;   // +1, conducts
    double r_mid_ohm = 100e3;  //  0, intermediate
    double r_high_ohm = 1e6;   // -1, blocks
    double v_read_volt = 0.2;
    double i_high_threshold_amp = 0.0; // 0 here = derive geometric-mean defaults
    double i_low_threshold_amp = 0.0;
    double sigma_log = 0.15; // std of ln(R) at programming time
    double snr_db = 20.0;    // per-read sense noise; infinity disables
    // per-cycle stage budgets, in order
    std::vector<std::pair<std::string, double>> cycle_stage_ns = default_stages();
    double register_read_ns = 1.0;

    static std::vector<std::pair<std::string, double>> default_stages() {
        return {{"row_driver", 1.0},
                {"wordline_settle", 2.0},
                {"sense", 5.0},
                {"comparator", 1.0},
                {"latch", 1.0}};
    }

    DeviceParams() { derive_thresholds(); }

    /** Geometric means of adjacent nominal currents. */
    void derive_thresholds() {
        const double i_plus = v_read_volt / r_low_ohm;
        const double i_zero = v_read_volt / r_mid_ohm;
        const double i_minus = v_read_volt / r_high_ohm;
        i_high_threshold_amp = std::sqrt(i_plus * i_zero);
        i_low_threshold_amp = std::sqrt(i_zero * i_minus);
    }

    double cycle_ns() const {
        double total = 0.0;
        for (const auto& [name, ns] : cycle_stage_ns) total += ns;
        return total;
    }

    bool noise_enabled() const { return std::isfinite(snr_db); }

    void validate() const {
        if (!(r_low_ohm > 0) || !(r_mid_ohm > 0) || !(r_high_ohm > 0))
            throw DeviceError("resistances must be positive");
        if (!(r_low_ohm < r_mid_ohm && r_mid_ohm < r_high_ohm))
            throw DeviceError("need r_low < r_mid < r_high");
        if (r_mid_ohm / r_low_ohm < 10.0 || r_high_ohm / r_mid_ohm < 10.0)
            throw DeviceError("adjacent resistance levels need a >=10x ratio");
        if (!(i_low_threshold_amp < i_high_threshold_amp))
            throw DeviceError("need i_low_threshold < i_high_threshold");
        if (sigma_log < 0) throw DeviceError("sigma_log must be >= 0");
    }
};

/** One programmed 1T1R junction: the intended state and what the device got. */
struct DeviceInstance {
    TruthValue target = TruthValue::undefined;
    double sampled_r_ohm = 0.0;
};

inline double target_resistance(TruthValue v, const DeviceParams& p) {
    switch (v) {
    case TruthValue::holds: return p.r_low_ohm;
    case TruthValue::negated: return p.r_high_ohm;
    default: return p.r_mid_ohm;
    }
}

/**
 * Program a junction: log-normal around the target, median at the target,
 * resampled on every write event.
 */
inline DeviceInstance write_junction(TruthValue v, const DeviceParams& p, Rng& rng) {
    const double r = target_resistance(v, p);
    const double sampled = p.sigma_log > 0 ? r * std::exp(rng.normal(0.0, p.sigma_log)) : r;
    return DeviceInstance{v, sampled};
}

/** A pristine, never-programmed cell: exactly nominal mid resistance. */
inline DeviceInstance pristine_junction(const DeviceParams& p) {
    return DeviceInstance{TruthValue::undefined, p.r_mid_ohm};
}

/**
 * Ohm's-law sense with additive Gaussian noise. The noise std scales with
 * the instantaneous ideal current of the sensed junction:
 * std = I_ideal * 10^(−snr_db/20), i.e. signal/10 at 20 dB.
 */
inline double read_current(const DeviceInstance& inst, const DeviceParams& p, Rng& rng) {
    const double ideal = p.v_read_volt / inst.sampled_r_ohm;
    if (!p.noise_enabled()) return ideal;
    const double noise_std = ideal * std::pow(10.0, -p.snr_db / 20.0);
    return ideal + rng.normal(0.0, noise_std);
}

/**
 * Two-threshold comparator. Boundary equality decodes downward: +1 requires
 * strictly more than the high threshold.
 */
inline TruthValue decode(double current_amp, const DeviceParams& p) {
    if (current_amp > p.i_high_threshold_amp) return TruthValue::holds;
    if (current_amp > p.i_low_threshold_amp) return TruthValue::undefined;
    return TruthValue::negated;
}

// -- fixed-point network flow -------------------------------------------------

/**
 * Directed conductance structure of one relation plane, restricted to the
 * holds-state junctions. weight[from * n + to] is the edge gain (sampled
 * conductance normalized to the nominal low-resistance conductance); zero
 * means no conductive path.
 */
struct FlowPlane {
    std::size_t n = 0;
    std::vector<double> weight; // row-major, n*n

    static FlowPlane empty(std::size_t n) { return FlowPlane{n, std::vector<double>(n * n, 0.0)}; }

    double& at(std::size_t from, std::size_t to) { return weight[from * n + to]; }
    double at(std::size_t from, std::size_t to) const { return weight[from * n + to]; }
};

struct FlowResult {
    bool converged = false;
    std::vector<double> state;
    std::size_t iterations = 0;
};

/**
 * Synchronous iteration of the flow operator
 *   x[to] <- drive[to] + Σ_from weight(from, to) * x[from]
 * until the relative change drops below tol. Acyclic planes settle exactly;
 * a conductive cycle keeps re-injecting flow and exhausts max_iter, which is
 * reported as non-convergence (an admissibility escape, not a read result).
 */
inline FlowResult network_flow_fixed_point(const FlowPlane& plane,
                                           const std::vector<double>& drive,
                                           std::size_t max_iter = 0, double tol = 1e-9) {
    const std::size_t n = plane.n;
    if (drive.size() != n) throw DeviceError("drive vector size does not match plane");
    if (max_iter == 0) max_iter = 10 * (n == 0 ? 1 : n);

    std::vector<double> x = drive;
    std::vector<double> next(n, 0.0);
    for (std::size_t iter = 1; iter <= max_iter; ++iter) {
        double scale = 1.0;
        for (std::size_t to = 0; to < n; ++to) {
            double acc = drive[to];
            for (std::size_t from = 0; from < n; ++from) {
                const double w = plane.at(from, to);
                if (w != 0.0) acc += w * x[from];
            }
            next[to] = acc;
        }
        double max_delta = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            max_delta = std::max(max_delta, std::abs(next[i] - x[i]));
            scale = std::max(scale, std::abs(next[i]));
        }
        x.swap(next);
        if (max_delta <= tol * scale) return FlowResult{true, std::move(x), iter};
    }
    return FlowResult{false, std::move(x), max_iter};
}

} // namespace quadbar
