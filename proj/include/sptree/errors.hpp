#pragma once

#include <stdexcept>
#include <string>

namespace sptree {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed or out-of-range user parameters.
struct ParamError : Error {
    using Error::Error;
};

/// An index or requested length passes a structural boundary.
struct RangeError : Error {
    using Error::Error;
};

/// Integer or floating-point range exceeded.
struct OverflowError : Error {
    using Error::Error;
};

/// Problem size exceeds the configured dense-solver limit.
struct DenseLimitError : Error {
    using Error::Error;
};

/// Orthogonalization hit a numerically rank-deficient vector.
struct NumericalRankError : Error {
    using Error::Error;
};

/// A factorization pivot collapsed below the representable floor.
struct SingularSolveError : Error {
    using Error::Error;
};

/// The zero vector was passed where a state is required.
struct ZeroStateError : Error {
    using Error::Error;
};

/// Adaptive quadrature could not reach the requested tolerance.
struct QuadratureError : Error {
    using Error::Error;
};

/// Polynomial resolution insufficient for the requested derivative order,
/// or a scaling window sits below the measure's resolution scale.
struct ResolutionError : Error {
    using Error::Error;
};

/// Too few samples (or too narrow a range) for an exponent estimate.
struct InsufficientDataError : Error {
    using Error::Error;
};

/// A time grid violates the validity window of a bound.
struct HypothesisWindowError : Error {
    using Error::Error;
};

/// Invalid run configuration (schema violation, bad field value).
struct ConfigError : Error {
    ConfigError(std::string field_, const std::string& what_)
        : Error(what_), field(std::move(field_)) {}
    std::string field;
};

} // namespace sptree
