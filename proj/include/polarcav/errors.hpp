#pragma once

#include <stdexcept>
#include <string>

namespace polarcav {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NoCrossingFound : public Error {
public:
    using Error::Error;
};

class UnsupportedParameter : public Error {
public:
    using Error::Error;
};

/// An energy denominator fell below the degeneracy tolerance; the
/// perturbative expansion is not valid at this parameter point.
class NearDegeneracy : public Error {
public:
    using Error::Error;
};

class DivergentShift : public Error {
public:
    using Error::Error;
};

class DivisionByZeroChannel : public Error {
public:
    using Error::Error;
};

class CutoffTooSmall : public Error {
public:
    using Error::Error;
};

class SolverFailure : public Error {
public:
    using Error::Error;
};

class AmbiguousMatch : public Error {
public:
    using Error::Error;
};

}  // namespace polarcav
