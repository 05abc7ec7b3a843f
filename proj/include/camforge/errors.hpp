#pragma once

#include <stdexcept>
#include <string>

namespace camforge {

// I/O failures carry the offending path in the message.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failures (non-PSD matrices, non-convergence, non-finite loss).
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace camforge
