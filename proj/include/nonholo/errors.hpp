#pragma once

#include <stdexcept>
#include <string>

namespace nonholo {

// Base class for everything thrown by the symbolic layer.
struct SymbolicError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised by the expression parser; `pos` is a 0-based byte offset into the
// input text pointing at the offending token.
struct ParseError : SymbolicError {
    ParseError(const std::string& what, std::size_t pos)
        : SymbolicError(what + " (at position " + std::to_string(pos) + ")"),
          pos(pos) {}
    std::size_t pos;
};

// A symbol name was used that the active symbol table does not declare.
struct UndeclaredSymbolError : ParseError {
    UndeclaredSymbolError(const std::string& name, std::size_t pos)
        : ParseError("undeclared symbol '" + name + "'", pos) {}
};

// Construction of a rational expression with an identically-zero denominator,
// or division by an expression that expands to the zero polynomial.
struct ZeroDenominatorError : SymbolicError {
    using SymbolicError::SymbolicError;
};

// Numeric evaluation hit a point where a denominator vanishes (|den| below
// the hard floor), or an integrator ran into the Delta = 0 locus.
struct SingularPointError : SymbolicError {
    using SymbolicError::SymbolicError;
};

// An operation was asked to do something outside its contract, e.g.
// differentiate with respect to a parameter symbol.
struct DomainError : SymbolicError {
    using SymbolicError::SymbolicError;
};

} // namespace nonholo
