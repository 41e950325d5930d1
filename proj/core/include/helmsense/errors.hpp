#pragma once

#include <stdexcept>
#include <string>

namespace helmsense {

// Base for every failure raised by the library. `op` names the operation
// that detected the condition so drivers can report it without unwinding
// context by hand.
class Error : public std::runtime_error {
public:
    Error(std::string op, const std::string& what)
        : std::runtime_error(op + ": " + what), op_(std::move(op)) {}
    const std::string& operation() const noexcept { return op_; }

private:
    std::string op_;
};

// Bad user input: invalid mesh size, malformed config, unknown preset.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Geometry/meshing failures (hole too close to the boundary, degenerate
// element, unsupported hole shape).
class MeshError : public Error {
public:
    using Error::Error;
};

// Point handed to a field evaluation lies outside the meshed region.
class EvalError : public Error {
public:
    using Error::Error;
};

// Generic numerical failure (residual too large, iteration stalled).
class NumericalError : public Error {
public:
    using Error::Error;
};

// k^2 sits within discretization tolerance of a Dirichlet-Laplacian
// eigenvalue: the Helmholtz form loses injectivity on this mesh.
class ResonanceError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

// det(I + s DV) vanished at an evaluation point; the transport is not
// invertible at this s.
class SingularJacobianError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace helmsense
