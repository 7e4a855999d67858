#pragma once

#include <stdexcept>
#include <string>

namespace coarq {

// Argument outside the mathematical domain of an operation (negative SNR,
// reversed interval, probability outside (0,1), ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// A numerical procedure (quadrature, root bracketing) failed to converge.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Nested-sum evaluation would exceed the configured term budget.
class BudgetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Every S-D mode has zero probability, so the conditional averages are 0/0.
class AllOutageError : public std::runtime_error {
public:
    AllOutageError() : std::runtime_error("all probability mass is in the outage mode") {}
};

// No candidate in a design search satisfies the loss constraint.
class InfeasibleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace coarq

namespace coarq {

class QuadratureError : public NumericalError {
public:
    QuadratureError(const std::string& what, double partial, double estimate)
        : NumericalError(what), partial_value(partial), error_estimate(estimate)
    {
    }

    double partial_value;
    double error_estimate;
};

}  // namespace coarq
