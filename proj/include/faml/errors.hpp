#pragma once

#include <stdexcept>
#include <string>

namespace faml {

// Shape/length disagreements between vectors, matrices or views.
class DimensionError : public std::invalid_argument {
public:
    explicit DimensionError(const std::string& what) : std::invalid_argument(what) {}
};

// NaN/inf inputs, domain violations of special functions, diverging losses.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// Bad configuration values or unparseable config files.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Missing/malformed dataset files, row misalignment, labels out of range.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// API called in the wrong order (e.g. backward without a cached forward).
class StateError : public std::logic_error {
public:
    explicit StateError(const std::string& what) : std::logic_error(what) {}
};

} // namespace faml
