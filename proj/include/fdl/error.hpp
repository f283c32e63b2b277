#pragma once

#include <stdexcept>
#include <string>

namespace fdl {

// Error taxonomy shared by the whole library. The CLI maps these onto its
// exit-code contract: validation/config -> 1, I/O -> 2, internal check -> 3.

struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct StateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised when an internal self-check (oracle suite) fails.
struct CheckError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace fdl
