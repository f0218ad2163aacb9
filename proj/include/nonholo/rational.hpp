#pragma once

#include "nonholo/polynomial.hpp"

#include <optional>

namespace nonholo {

// Exact quotient of two polynomials.  There is deliberately no GCD
// cancellation anywhere: equality and zero tests go through cross-multiplied
// numerator expansion, which is exact and cheap at the degrees that occur
// here.  What the class does normalize:
//   - a zero numerator collapses to 0/1;
//   - a constant denominator is folded into the numerator (den becomes 1);
//   - the denominator's leading coefficient is made positive;
//   - sums over denominators that are constant multiples of each other reuse
//     the common denominator instead of multiplying them together (this is a
//     structural check, not a GCD - it is what keeps connection coefficients
//     over Delta and curvature components over Delta^2).
class RationalExpr {
public:
    explicit RationalExpr(Polynomial num);           // num / 1
    RationalExpr(Polynomial num, Polynomial den);    // throws ZeroDenominatorError

    // One deliberate exception to the nonzero-denominator invariant:
    // substitution may drive a denominator to the zero polynomial (1/y with
    // y <- 0).  The result is kept as a symbolic husk whose error surfaces at
    // evaluation (SingularPointError) or on any further arithmetic
    // (ZeroDenominatorError), rather than at substitution time.
    bool valid() const { return !den_.is_zero(); }

    static RationalExpr constant(SymbolTablePtr table, mpq_class c);
    static RationalExpr variable(SymbolTablePtr table, const std::string& name);

    const Polynomial& num() const { return num_; }
    const Polynomial& den() const { return den_; }
    const SymbolTablePtr& table() const { return num_.table(); }

    bool den_is_one() const;

    RationalExpr operator-() const;
    RationalExpr operator+(const RationalExpr& o) const;
    RationalExpr operator-(const RationalExpr& o) const;
    RationalExpr operator*(const RationalExpr& o) const;
    RationalExpr operator/(const RationalExpr& o) const;  // throws on zero divisor

    RationalExpr differentiate(std::size_t var) const;
    RationalExpr differentiate(const std::string& coord) const;

    // True iff the (expanded) numerator has no terms.
    bool is_zero() const { return num_.is_zero(); }

    // Cross-multiplication equality: expand(num1*den2 - num2*den1) == 0.
    bool equals(const RationalExpr& o) const;

    // IEEE double value at a point (indexed like the table); throws
    // SingularPointError when |den| < 1e-300.
    double evaluate(std::span<const double> values) const;

    // Exact capture-free substitution of one symbol by an expression.
    RationalExpr substitute(std::size_t var, const RationalExpr& r) const;
    RationalExpr substitute(const std::string& name, const RationalExpr& r) const;

    RationalExpr relabel(SymbolTablePtr to, const std::vector<std::size_t>& index_map) const;

private:
    Polynomial num_, den_;

    struct raw_tag {};
    RationalExpr(Polynomial num, Polynomial den, raw_tag)
        : num_(std::move(num)), den_(std::move(den)) {}

    void normalize();
    void ensure_valid() const;
};

// If b == c*a for a rational constant c, returns c.  Structural comparison of
// the two term maps; used by RationalExpr addition to keep denominators shared.
std::optional<mpq_class> proportionality_constant(const Polynomial& a, const Polynomial& b);

// Substitution of a symbol inside a bare polynomial by a rational expression;
// the result is rational in general.
RationalExpr substitute(const Polynomial& p, std::size_t var, const RationalExpr& r);

} // namespace nonholo
