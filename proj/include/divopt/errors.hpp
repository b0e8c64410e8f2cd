#pragma once

#include <stdexcept>
#include <string>

namespace divopt {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid argument or parameter outside the admissible domain.
class DomainError : public Error {
public:
    using Error::Error;
};

// Target value not attained on the supplied bracket.
class RangeError : public Error {
public:
    using Error::Error;
};

// Builder or formula used outside the parameter regime it applies to.
class RegimeError : public Error {
public:
    using Error::Error;
};

class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what) : Error(what) {}
    NumericalError(const std::string& what, double abscissa)
        : Error(what + " at x=" + std::to_string(abscissa)), abscissa_(abscissa), has_abscissa_(true) {}

    double abscissa() const { return abscissa_; }
    bool has_abscissa() const { return has_abscissa_; }

private:
    double abscissa_ = 0.0;
    bool has_abscissa_ = false;
};

class BracketError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace divopt
