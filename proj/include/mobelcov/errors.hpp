#pragma once

#include <stdexcept>
#include <string>

namespace mobelcov {

/// Invalid or inconsistent configuration (parameter files, dates, shapes).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// A runtime input violated an operation's precondition (e.g. action outside [0,1]^3).
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mobelcov
