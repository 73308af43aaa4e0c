#pragma once

#include <stdexcept>
#include <string>

namespace chd {

// Configuration / validation failures (CLI exit code 2).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Linear-solver non-convergence or a diverged/unstable run (CLI exit code 3).
struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// File-format or filesystem failures (CLI exit code 5).
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Interface probe left the domain or had nothing to measure.
struct ProbeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace chd
