#pragma once

#include <stdexcept>
#include <string>

namespace fracalc {

// Precondition violations. The CLI maps these to exit code 2.
class DomainError : public std::invalid_argument {
public:
    explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

class PoleError : public DomainError {
public:
    using DomainError::DomainError;
};

class DivergentTailError : public DomainError {
public:
    using DomainError::DomainError;
};

class RangeError : public DomainError {
public:
    using DomainError::DomainError;
};

// Numerical failures on valid input. The CLI maps these to exit code 1.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

class NonConvergenceError : public NumericError {
public:
    using NumericError::NumericError;
};

class StabilityError : public NumericError {
public:
    using NumericError::NumericError;
};

inline void require(bool ok, const std::string& what)
{
    if (!ok) throw DomainError(what);
}

} // namespace fracalc
