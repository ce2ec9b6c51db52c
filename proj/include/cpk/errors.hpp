#pragma once

#include <stdexcept>
#include <string>

namespace cpk {

// Bad input: a constraint on a parameter or file was violated.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public ValidationError {
public:
    ParseError(const std::string& msg, int line, int column)
        : ValidationError(msg), line_(line), column_(column) {}
    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

class InsufficientDataError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

// Valid input, but the computation itself failed.
class ComputationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IntegrationError : public ComputationError {
public:
    IntegrationError(const std::string& msg, double t) : ComputationError(msg), time_(t) {}
    double time() const { return time_; }

private:
    double time_;
};

class IntegrityError : public ComputationError {
public:
    using ComputationError::ComputationError;
};

}  // namespace cpk
