#pragma once

#include <stdexcept>
#include <string>

namespace leff {

// Input outside the mathematical domain of an operation.
struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Inconsistent grid or solver configuration.
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A requested tolerance could not be met.
struct AccuracyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Symmetry requirement violated (fermionic reconstruction).
struct SymmetryError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Spectral parameter too close to a spectrum.
struct IllConditionedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Field strength below a theorem threshold.
struct BelowThresholdError : std::runtime_error {
    double threshold;
    BelowThresholdError(const std::string& what, double thr)
        : std::runtime_error(what), threshold(thr) {}
};

}  // namespace leff
