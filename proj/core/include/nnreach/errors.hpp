#pragma once

#include <stdexcept>
#include <string>

namespace nnreach {

struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DegenerateError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct InfeasibleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UnboundedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct AmbiguousLabelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace nnreach
