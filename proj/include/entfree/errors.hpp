#pragma once

#include <stdexcept>
#include <string>

namespace entfree {

// Violated numerical precondition: bad dimensions, non-Hermitian input,
// step size too large, unnormalised state and so on.
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Malformed or incomplete scenario configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
    if (!condition) throw PreconditionError(message);
}

}  // namespace entfree
