// errors.hpp: exception types shared by the stepeq library

#pragma once

#include <stdexcept>
#include <string>

namespace stepeq {

// Input failed a structural check (non-Hermitian matrix, mismatched dimensions).
struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Argument outside the mathematical domain of an operation.
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// A Gibbs state lost full rank (population underflow).
struct DegenerateStateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Quadrature or iterative refinement did not reach the requested tolerance.
struct ToleranceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Problem size exceeds what a brute-force routine supports.
struct ResourceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Noise recursion parameters describe an explosive process.
struct InstabilityError : std::domain_error {
    using std::domain_error::domain_error;
};

} // namespace stepeq
