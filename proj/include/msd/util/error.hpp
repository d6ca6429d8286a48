#pragma once

#include <stdexcept>
#include <string>

namespace msd {

// Errors caused by bad user input (CLI args, malformed configs/files).
// The CLI maps these to exit code 1; everything else is internal (2).
class UserError : public std::runtime_error {
public:
    explicit UserError(const std::string& msg) : std::runtime_error(msg) {}
};

class DataError : public UserError {
public:
    explicit DataError(const std::string& msg) : UserError(msg) {}
};

class ConfigError : public UserError {
public:
    explicit ConfigError(const std::string& msg) : UserError(msg) {}
};

// Numerical failure (NaN loss, eigensolver non-convergence, ...).
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// Ill-conditioned eigenvector basis; metrics catch this and count a skip.
class IllConditionedError : public NumericError {
public:
    explicit IllConditionedError(const std::string& msg) : NumericError(msg) {}
};

// Remote judge wire-protocol violations (timeouts, bad labels, non-200).
class ProtocolError : public std::runtime_error {
public:
    explicit ProtocolError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace msd
