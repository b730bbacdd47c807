#pragma once

#include <stdexcept>
#include <string>

namespace thinopt {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad input data: malformed files, out-of-range wavelengths, invalid configs.
class InputError : public Error {
public:
    using Error::Error;
};

// Training diverged (non-finite loss or parameters).
class TrainingError : public Error {
public:
    using Error::Error;
};

// A design search could not produce a result.
class SearchError : public Error {
public:
    using Error::Error;
};

} // namespace thinopt
