#pragma once

#include <stdexcept>
#include <string>

namespace elastica {

// Base class for all numerical/validation failures raised by the library.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct PoleEvaluation : Error {
    using Error::Error;
};
struct LogarithmRequired : Error {
    using Error::Error;
};
struct UnsupportedProduct : Error {
    using Error::Error;
};
struct WrongZeroOrder : Error {
    using Error::Error;
};
struct MissingZero : Error {
    using Error::Error;
};
struct BranchPoint : Error {
    using Error::Error;
};
struct DomainViolation : Error {
    using Error::Error;
};
struct DegenerateRadii : Error {
    using Error::Error;
};
struct NoRealRoots : Error {
    using Error::Error;
};
struct DegenerateTriangle : Error {
    using Error::Error;
};
struct VariationOnBoundary : Error {
    using Error::Error;
};
struct LineSearchFailure : Error {
    using Error::Error;
};
struct NonFiniteEnergy : Error {
    using Error::Error;
};
struct MeshFormatError : Error {
    using Error::Error;
};

} // namespace elastica
