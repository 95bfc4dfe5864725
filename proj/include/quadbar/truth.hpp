#pragma once

#include <stdexcept>
#include <string>

namespace quadbar {

/**
 * Ternary truth value of one assertion.
 *
 *   holds     (+1)  the relation holds in this domain
 *   negated   (-1)  the relation is explicitly negated in this domain
 *   undefined ( 0)  the relation is not defined in this domain
 *
 * Undefined is not "unknown": the question has no answer in that domain.
 */
enum class TruthValue : int {
    negated = -1,
    undefined = 0,
    holds = 1,
};

inline int to_int(TruthValue v) { return static_cast<int>(v); }

/** Strict parse: only -1, 0, +1 are valid encodings. */
inline TruthValue truth_from_int(int v) {
    switch (v) {
    case 1: return TruthValue::holds;
    case 0: return TruthValue::undefined;
    case -1: return TruthValue::negated;
    default:
        throw std::invalid_argument("truth value must be one of {1, 0, -1}, got " +
                                    std::to_string(v));
    }
}

inline const char* to_string(TruthValue v) {
    switch (v) {
    case TruthValue::holds: return "+1";
    case TruthValue::negated: return "-1";
    default: return "0";
    }
}

} // namespace quadbar
