#pragma once

#include <stdexcept>
#include <string>

namespace fractlab {

// Error taxonomy shared by the library and the CLI driver. Each class carries
// the process exit code the CLI maps it to, so library code can fail with the
// precise failure kind and the driver stays a thin translator.
class Error : public std::runtime_error {
public:
    Error(std::string msg, int exit_code)
        : std::runtime_error(std::move(msg)), exit_code_(exit_code) {}
    int exit_code() const noexcept { return exit_code_; }

private:
    int exit_code_;
};

// Malformed or inconsistent configuration input.
class ConfigError : public Error {
public:
    explicit ConfigError(std::string m) : Error(std::move(m), 2) {}
};

// A requested tolerance or statistical reliability gate cannot be met.
class PrecisionError : public Error {
public:
    explicit PrecisionError(std::string m) : Error(std::move(m), 3) {}
};

// An enumeration or allocation would exceed a configured cap.
class ResourceError : public Error {
public:
    explicit ResourceError(std::string m) : Error(std::move(m), 4) {}
};

// A structural invariant of the mathematical objects failed.
class InvariantError : public Error {
public:
    explicit InvariantError(std::string m) : Error(std::move(m), 5) {}
};

// Caller broke a precondition (orientation mismatch, bad index, missing
// certificate). Shares the invariant exit code.
class ContractError : public InvariantError {
public:
    using InvariantError::InvariantError;
};

// A point or parameter left the domain the maps are defined on.
class DomainError : public InvariantError {
public:
    using InvariantError::InvariantError;
};

} // namespace fractlab
