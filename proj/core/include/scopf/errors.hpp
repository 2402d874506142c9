#pragma once

#include <stdexcept>
#include <string>

namespace scopf {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A circuit element or model parameter outside its admissible range.
class InvalidElement : public Error {
public:
    using Error::Error;
};

/// Malformed solution file or a state whose dimensions do not match the network.
class FormatError : public Error {
public:
    using Error::Error;
};

/// Instance text that is not valid structured text. Carries a 1-based line/column.
class SyntaxError : public Error {
public:
    SyntaxError(const std::string& what, std::size_t line, std::size_t column)
        : Error(what + " (line " + std::to_string(line) + ", column " + std::to_string(column) + ")"),
          line_(line), column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

/// Well-formed instance text describing a network that breaks a model invariant.
class SemanticError : public Error {
public:
    using Error::Error;
};

/// Caller violated a documented precondition (bad ordering, unknown element, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

}  // namespace scopf
