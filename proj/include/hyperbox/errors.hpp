#ifndef HYPERBOX_ERRORS_HPP
#define HYPERBOX_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace hyperbox {

// Root of every error raised by the library. Callers that only need to
// report a failure can catch this one type.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DivisionByIntervalContainingZero : public Error {
public:
    DivisionByIntervalContainingZero() : Error("division by an interval containing zero") {}
};

class DomainError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

class ParameterOutOfRange : public Error {
public:
    using Error::Error;
};

class EmptyGraph : public Error {
public:
    EmptyGraph() : Error("no box survived pruning") {}
};

class DepthLimitExceeded : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class ZeroMultiplier : public Error {
public:
    using Error::Error;
};

class HandicapRangeError : public Error {
public:
    using Error::Error;
};

} // namespace hyperbox

#endif
