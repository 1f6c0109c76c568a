#pragma once

#include <stdexcept>
#include <string>

namespace subpa {

// Error hierarchy shared by the library and the CLI.  Exit codes:
// 0 ok, 2 configuration, 3 numeric/tolerance, 4 model.
class Error : public std::runtime_error {
public:
    Error(const std::string& msg, int exit_code)
        : std::runtime_error(msg), exit_code_(exit_code) {}
    int exit_code() const noexcept { return exit_code_; }

private:
    int exit_code_;
};

// Invalid user input: parameter domains, malformed config keys, bad files.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg, 2) {}
};

// A numeric procedure could not reach its requested tolerance
// (series cap hit, integrator stall, power iteration stall).
class ToleranceError : public Error {
public:
    explicit ToleranceError(const std::string& msg) : Error(msg, 3) {}
};

// The model itself is inconsistent with the requested computation,
// e.g. a fixed-point bracket that never closes.
class ModelError : public Error {
public:
    explicit ModelError(const std::string& msg) : Error(msg, 4) {}
};

}  // namespace subpa
