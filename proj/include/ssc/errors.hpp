#pragma once

#include <stdexcept>
#include <string>

namespace ssc {

/// Base class for every error thrown by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// File could not be read, parsed, or did not match its byte format.
class IoError : public Error {
public:
    using Error::Error;
};

/// A point at the sensor origin has no defined polar angle.
class DegeneratePointError : public Error {
public:
    using Error::Error;
};

/// No cyclic shift produced a jointly occupied ring slot.
class NoOverlapError : public Error {
public:
    using Error::Error;
};

/// An ICP iteration found zero label-matched correspondences.
class NoCorrespondenceError : public Error {
public:
    NoCorrespondenceError(const std::string& msg, int iteration)
        : Error(msg), iteration_(iteration) {}
    int iteration() const { return iteration_; }

private:
    int iteration_;
};

/// Descriptor dimensions do not match.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Pair sampling found no positive pairs.
class EmptyPositivesError : public Error {
public:
    using Error::Error;
};

}  // namespace ssc
