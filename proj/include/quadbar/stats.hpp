#pragma once

#include <cmath>
#include <cstdint>

namespace quadbar {

/**
 * Binomial error tally with a 95% confidence interval: Wilson score for
 * interior counts, exact one-sided bounds at the edges (a zero-error row
 * reports the 1 - 0.025^(1/n) upper bound, ~3.7e-5 at 1e5 trials).
 */
struct ErrorStats {
    std::uint64_t trials = 0;
    std::uint64_t errors = 0;
    double rate = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;

    static ErrorStats from_counts(std::uint64_t trials, std::uint64_t errors) {
        ErrorStats s;
        s.trials = trials;
        s.errors = errors;
        if (trials == 0) return s;
        const double n = static_cast<double>(trials);
        const double p = static_cast<double>(errors) / n;
        s.rate = p;
        if (errors == 0) {
            s.ci_low = 0.0;
            s.ci_high = 1.0 - std::pow(0.025, 1.0 / n);
        } else if (errors == trials) {
            s.ci_low = std::pow(0.025, 1.0 / n);
            s.ci_high = 1.0;
        } else {
            const double z = 1.959963984540054;
            const double z2 = z * z;
            const double denom = 1.0 + z2 / n;
            const double center = (p + z2 / (2.0 * n)) / denom;
            const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
            s.ci_low = center - half;
            s.ci_high = center + half;
        }
        return s;
    }
};

} // namespace quadbar
