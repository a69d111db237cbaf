#ifndef WERNERSIM_ERRORS_HPP
#define WERNERSIM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace wernersim {

// Base class for everything thrown by the library.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Shape/dimension mismatch between operands.
struct DimensionError : Error {
    explicit DimensionError(const std::string& what) : Error(what) {}
};

// A matrix fails the density-matrix contract (hermiticity, trace, positivity).
struct InvalidStateError : Error {
    explicit InvalidStateError(const std::string& what) : Error(what) {}
};

// An operator expected to be invertible has (numerically) a null space.
struct SingularOperatorError : Error {
    explicit SingularOperatorError(const std::string& what) : Error(what) {}
};

// Steady state not uniquely determined by the conserved sectors.
struct DegeneracyError : Error {
    explicit DegeneracyError(const std::string& what) : Error(what) {}
};

// Adaptive step size underflowed; caller should switch to the exact propagator.
struct StiffnessError : Error {
    explicit StiffnessError(const std::string& what) : Error(what) {}
};

// Bad scenario configuration (unknown key, missing field, out-of-range value).
struct ConfigError : Error {
    explicit ConfigError(const std::string& what) : Error(what) {}
};

}  // namespace wernersim

#endif
