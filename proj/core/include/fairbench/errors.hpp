#pragma once

#include <stdexcept>
#include <string>

namespace fairbench {

// A fairness metric could not be evaluated because a conditioning cell is
// empty (e.g. a group with no positive predictions). The harness catches
// this and records the metric as undefined instead of aborting.
struct MetricUndefinedError : std::runtime_error {
    explicit MetricUndefinedError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed or missing input data (files, rows, unknown codes).
struct DataError : std::runtime_error {
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Invalid experiment configuration (bad fractions, unknown keys, ...).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fairbench
