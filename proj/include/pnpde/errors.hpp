#pragma once

#include <stdexcept>
#include <string>

namespace pnpde {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Matérn index outside the supported set {0, 1, 2, 3}.
class UnsupportedSmoothness : public Error {
public:
    using Error::Error;
};

/// A derivative was requested beyond the order at which the kernel is differentiable.
class InsufficientSmoothness : public Error {
public:
    using Error::Error;
};

/// Cholesky extension failed even after the maximum jitter.
class IllConditionedAssimilation : public Error {
public:
    using Error::Error;
};

/// f, g or h returned NaN or infinity.
class NonFiniteEvaluation : public Error {
public:
    using Error::Error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

/// A tridiagonal finite-difference system had a vanishing pivot.
class SingularSystem : public Error {
public:
    using Error::Error;
};

/// The Richardson self-check of a reference solution did not meet its tolerance.
class ReferenceNotConverged : public Error {
public:
    using Error::Error;
};

}  // namespace pnpde
