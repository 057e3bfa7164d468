#pragma once

#include <stdexcept>
#include <string>

namespace georeg {

// Base class for all toolkit errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input file. Carries 1-based line and column of the offending token.
class ParseError : public Error {
public:
    ParseError(std::string file, int line, int column, const std::string& msg)
        : Error(file + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + msg),
          file_(std::move(file)), line_(line), column_(column) {}

    const std::string& file() const { return file_; }
    int line() const { return line_; }
    int column() const { return column_; }

private:
    std::string file_;
    int line_ = 0;
    int column_ = 0;
};

// Structural problem in a graph or data stream: missing vertex, wrong vertex
// type, unsorted timestamps, underconstrained gauge.
class StructureError : public Error {
public:
    using Error::Error;
};

// Numerical failure: indefinite normal equations, Cholesky breakdown,
// singular innovation covariance, degenerate alignment.
class NumericalError : public Error {
public:
    using Error::Error;
};

// Invalid configuration value. Names the offending key.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace georeg
