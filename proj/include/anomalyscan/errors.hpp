#pragma once

#include <stdexcept>
#include <string>

namespace anomalyscan {

// Bad or inconsistent input: files, schemas, configuration. CLI exit code 1.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input was well-formed but the requested computation is not defined on it.
// CLI exit code 2.
class ComputationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DegenerateInputError : public ComputationError {
public:
    using ComputationError::ComputationError;
};

class RankDeficiencyError : public ComputationError {
public:
    RankDeficiencyError(std::string column, const std::string& what)
        : ComputationError(what), column_(std::move(column)) {}

    const std::string& column() const noexcept { return column_; }

private:
    std::string column_;
};

class InsufficientDataError : public ComputationError {
public:
    using ComputationError::ComputationError;
};

} // namespace anomalyscan
