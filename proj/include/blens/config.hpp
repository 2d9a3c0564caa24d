#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "scalar.hpp"

namespace blens {

/// Numeric mode for a run: exact rationals or doubles with tolerances.
enum class Numeric { rational, floating };

/// Output format for reports.
enum class Format { text, json };

/// Shared configuration for randomized verification runs.  Two runs with
/// equal configs produce identical reports (wall-clock aside); execution
/// details like thread counts are deliberately *not* part of the config.
struct RunConfig {
    std::uint64_t seed = 42;
    int trials = 1000;
    int max_dim = 6;          // spaces are drawn with 2..max_dim elements
    Numeric numeric = Numeric::rational;
    double tolerance = 1e-9;  // float mode only
    Format format = Format::text;

    void validate() const {
        if (trials < 1) throw std::invalid_argument("config: trials must be >= 1");
        if (max_dim < 2 || max_dim > 16)
            throw std::invalid_argument("config: max_dim must be in [2, 16]");
        if (tolerance <= 0) throw std::invalid_argument("config: tolerance must be > 0");
    }
};

inline const char* numeric_name(Numeric n) {
    return n == Numeric::rational ? "rational" : "float";
}

inline const char* format_name(Format f) {
    return f == Format::text ? "text" : "json";
}

/// The comparison tolerance a run works at: zero in exact mode, the
/// configured tolerance in float mode.
template <class T>
T eps_from_config(const RunConfig& config) {
    if constexpr (scalar_traits<T>::exact)
        return scalar_traits<T>::zero();
    else
        return static_cast<T>(config.tolerance);
}

} // namespace blens
