#pragma once

#include <stdexcept>
#include <string>

namespace dreco {

// Bad run configuration or unusable CLI arguments. Exit code 1.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Unreadable or inconsistent dataset / cache / checkpoint contents. Exit code 2.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// NaN/Inf or other numeric breakdown detected at runtime. Exit code 3.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace dreco
