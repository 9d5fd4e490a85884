#pragma once

#include <stdexcept>
#include <string>

namespace nle {

/// Invalid user input: bad grid, shape outside the box, malformed config.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Fields defined on different grids were combined.
class GridMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The numerics cannot proceed: CFL violation, front reaching the collar.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class CflError : public NumericalError {
public:
    CflError(const std::string& what, double admissible_dt) : NumericalError(what), admissible_dt_(admissible_dt) {}
    double admissible_dt() const { return admissible_dt_; }

private:
    double admissible_dt_;
};

class DomainTooSmall : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace nle
