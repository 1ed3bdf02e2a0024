#pragma once

#include <stdexcept>
#include <string>

namespace liouville {

// Error taxonomy mirrors the CLI exit-code contract:
//   validation_error -> 1, config_error -> 2, numeric_error -> 3.

struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct validation_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr double pi = 3.14159265358979323846;

}  // namespace liouville
