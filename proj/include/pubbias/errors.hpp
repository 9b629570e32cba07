#pragma once

#include <stdexcept>
#include <string>

namespace pubbias {

// Input outside a function's mathematical domain (sd <= 0, p outside (0,1), ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Numeric routine failed to converge. Carries the best estimate reached.
class NumericError : public std::runtime_error {
public:
    NumericError(const std::string& what, double best_estimate)
        : std::runtime_error(what), best_estimate_(best_estimate) {}

    double best_estimate() const noexcept { return best_estimate_; }

private:
    double best_estimate_;
};

// Too few usable samples for estimation.
class InsufficientData : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Moment equation has no solution for the observed data.
class NoSolution : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed or inconsistent user data (bad CSV row, duplicate key, ...).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace pubbias
