#pragma once

#include <stdexcept>

namespace platoon_hinf {

// Structural misuse of a type: empty denominator, mixed continuous/discrete
// operands, degree cap exceeded, and the like.
struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Operation would need a rational representation of a pure delay that the
// operands still carry. Expand delays (Pade or exact sample shift) first.
struct DelayAdditionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Requested evaluation frequency outside the valid range (at or above the
// Nyquist frequency for discrete systems, or not strictly positive).
struct FrequencyRangeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid or inconsistent run configuration.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace platoon_hinf
