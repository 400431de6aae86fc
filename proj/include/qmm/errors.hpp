#pragma once

#include <stdexcept>
#include <string>

namespace qmm {

// Bad configuration or malformed input. CLI maps this to exit code 2.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// The requested step size cannot hold the unitarity tolerance. Exit code 3.
class AccuracyError : public std::runtime_error {
public:
    explicit AccuracyError(const std::string& what) : std::runtime_error(what) {}
};

// A series is too short for the requested analysis.
class InsufficientData : public std::runtime_error {
public:
    explicit InsufficientData(const std::string& what) : std::runtime_error(what) {}
};

} // namespace qmm
