#ifndef G2HBT_ERRORS_HPP
#define G2HBT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace g2hbt {

// Base for all recoverable domain failures; CLI maps these to exit code 1.
struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// g2 requested for a state with no photons (vacuum): the defining ratio is 0/0.
struct UndefinedG2 : DomainError {
    using DomainError::DomainError;
};

// optimal_displacement called for a state whose g2(0) has no interior minimum.
struct NoMinimum : DomainError {
    using DomainError::DomainError;
};

// Fock-space truncation too small: the tail coefficient carries real weight.
struct TruncationInsufficient : DomainError {
    using DomainError::DomainError;
};

// decimate would fold out-of-band power into the retained band.
struct AliasingRejected : DomainError {
    using DomainError::DomainError;
};

// Estimator denominator (sum of arm second moments minus 2) at or below threshold.
struct DenominatorVanishing : DomainError {
    using DomainError::DomainError;
};

// Arm-b and arm-c recoveries of the same input parameter disagree beyond 5 SE.
struct CalibrationMismatch : DomainError {
    using DomainError::DomainError;
};

// Requested lag exceeds the usable range of the record.
struct LagOutOfRange : DomainError {
    using DomainError::DomainError;
};

} // namespace g2hbt

#endif
