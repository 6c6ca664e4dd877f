#pragma once

#include <stdexcept>
#include <string>

namespace memstate {

// Input or file content violates a documented contract.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A numerical procedure failed (overflow, degenerate operating point,
// non-convergence).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace memstate
