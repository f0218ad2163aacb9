#pragma once

#include "nonholo/rational.hpp"

#include <string_view>

namespace nonholo {

// Parses the expression grammar (see docs/grammar.ebnf):
//
//   expression = term { ("+"|"-") term }
//   term       = factor { ("*"|"/") factor }
//   factor     = { "+"|"-" } power
//   power      = atom [ "^" natural ]
//   atom       = natural | symbol | "(" expression ")"
//
// '^' binds tighter than a unary sign, so -x^2 is -(x^2).  Symbols must be
// declared in `context`.  Throws ParseError (with position) on syntax errors,
// UndeclaredSymbolError for unknown names, and ParseError for division by an
// expression that expands to the zero polynomial.
RationalExpr parse_expr(std::string_view text, const SymbolTablePtr& context);

} // namespace nonholo
