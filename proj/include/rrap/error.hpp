#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rrap {

// Bad or inconsistent configuration (geometry, presets, unit strings).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed trace or report input. line is 1-based, 0 when unknown.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line = 0)
        : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

// Well-formed input that violates a semantic rule (e.g. per-core cycle regression).
class ValidationError : public ParseError {
public:
    using ParseError::ParseError;
};

// Write current at or below the critical current: thermal-activation region,
// outside what the switching model describes.
class RegimeError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Internal consistency violation in the simulator state machine.
class SimulationError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

} // namespace rrap
