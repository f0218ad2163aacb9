#pragma once

#include "nonholo/rational.hpp"

#include <string>

namespace nonholo {

// Canonical text form: terms in descending graded-lex order, explicit '*'
// between coefficient and symbols, '^' only for exponents > 1.  The output is
// valid input to parse_expr and round-trips to an equal expression.
std::string to_string(const Polynomial& p);

// "num" when the denominator is 1, "(num)/(den)" otherwise.
std::string to_string(const RationalExpr& e);

} // namespace nonholo
