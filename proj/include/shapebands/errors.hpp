#pragma once

#include <stdexcept>
#include <string>

namespace shapebands {

// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Argument outside its mathematical domain.
struct DomainError : Error {
    using Error::Error;
};

// Bandwidth for which every kernel weight vanishes (convex lower side, d = 1).
struct DegenerateBandwidth : Error {
    using Error::Error;
};

// Requested window does not fit inside the observation interval.
struct WindowOutOfRange : Error {
    using Error::Error;
};

// A multiscale scan found no admissible (bandwidth, location) pair.
struct NoAdmissiblePairs : Error {
    using Error::Error;
};

// Operation applied to the wrong shape class.
struct ShapeMismatch : Error {
    using Error::Error;
};

// Input data violates the shape-class constraint.
struct InvalidShape : Error {
    using Error::Error;
};

// Malformed input file.
struct ParseError : Error {
    using Error::Error;
};

// Filesystem failure while reading or writing results.
struct IoError : Error {
    using Error::Error;
};

}  // namespace shapebands
