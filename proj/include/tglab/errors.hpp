#pragma once

#include <stdexcept>
#include <string>

namespace tglab {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid user-facing configuration (bad model parameters, malformed config
/// files, unknown keys).  CLI exit code 2.
struct ConfigError : Error {
    using Error::Error;
};

/// A caller broke a documented precondition.
struct ContractViolation : Error {
    using Error::Error;
};

/// Numerical failure at runtime: eigensolver non-convergence, factorization
/// breakdown, or a violated numeric invariant.  CLI exit code 3.
struct NumericError : Error {
    using Error::Error;
};

/// A computed quantity violated one of the structural invariants the library
/// asserts (interlacing, diamagnetic positivity, norm bounds, ...).
struct InvariantViolation : NumericError {
    using NumericError::NumericError;
};

/// A variational or state construction could not be carried out with the
/// given parameters (empty flat region, empty trap, ...).
struct ConstructionError : Error {
    using Error::Error;
};

/// No orbitals fall below the requested chemical potential.
struct EmptySystemError : ConstructionError {
    using ConstructionError::ConstructionError;
};

/// Decay fit requested on data outside its domain (non-positive bin means).
struct FitDomainError : Error {
    using Error::Error;
};

} // namespace tglab
