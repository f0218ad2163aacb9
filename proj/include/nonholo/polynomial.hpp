#pragma once

#include "nonholo/symbols.hpp"

#include <gmpxx.h>

#include <cstdint>
#include <map>
#include <span>
#include <vector>

namespace nonholo {

// Exponent vector, one entry per symbol of the owning table.  Exponents are
// capped at 2^16 - 1; arithmetic that would exceed the cap throws.
using Monomial = std::vector<std::uint32_t>;

constexpr std::uint32_t kMaxExponent = (1u << 16) - 1;

inline std::uint64_t total_degree(const Monomial& m) {
    std::uint64_t d = 0;
    for (auto e : m)
        d += e;
    return d;
}

// Canonical term order: descending by total degree, ties broken
// lexicographically with earlier symbols dominating.  A std::map with this
// comparator iterates terms in exactly the order they are printed.
struct TermOrder {
    bool operator()(const Monomial& a, const Monomial& b) const {
        auto da = total_degree(a), db = total_degree(b);
        if (da != db)
            return da > db;
        return a > b;
    }
};

// Exact multivariate polynomial: a term map from exponent vectors to
// arbitrary-precision rational coefficients.  Zero coefficients are never
// stored, so the representation (and hence printing) is canonical.
class Polynomial {
public:
    using Terms = std::map<Monomial, mpq_class, TermOrder>;

    explicit Polynomial(SymbolTablePtr table);       // zero polynomial
    Polynomial(SymbolTablePtr table, mpq_class c);   // constant

    static Polynomial variable(SymbolTablePtr table, std::size_t index);
    static Polynomial variable(SymbolTablePtr table, const std::string& name);

    const SymbolTablePtr& table() const { return table_; }
    const Terms& terms() const { return terms_; }

    bool is_zero() const { return terms_.empty(); }
    bool is_constant() const;
    // The constant value of a constant polynomial (0 for the zero polynomial).
    mpq_class constant_value() const;

    std::uint64_t degree() const;                    // total degree, 0 for zero poly
    std::uint32_t degree_in(std::size_t var) const;  // max exponent of one symbol

    Polynomial operator-() const;
    Polynomial& operator+=(const Polynomial& o);
    Polynomial& operator-=(const Polynomial& o);
    Polynomial operator*(const Polynomial& o) const;
    Polynomial operator*(const mpq_class& c) const;
    Polynomial pow(std::uint32_t e) const;

    friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
    friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }

    // Structural equality; on canonical representations this is also
    // mathematical equality of polynomials.
    bool operator==(const Polynomial& o) const { return terms_ == o.terms_; }

    Polynomial differentiate(std::size_t var) const;

    // Plain double-precision evaluation; `values` is indexed like the table.
    double evaluate(std::span<const double> values) const;

    // Adds a single term (used by the parser and constructors); enforces the
    // exponent cap and the no-zero-coefficient invariant.
    void add_term(const Monomial& m, const mpq_class& c);

    // Rewrites the polynomial over a different table; `index_map[i]` is the
    // position of this table's i-th symbol in `to`.  Used to lift base-space
    // expressions into the extended 6-coordinate space.
    Polynomial relabel(SymbolTablePtr to, const std::vector<std::size_t>& index_map) const;

    // Splits into coefficient polynomials of powers of one symbol:
    // result[e] is the coefficient of var^e (a polynomial not involving var).
    std::vector<Polynomial> coefficients_in(std::size_t var) const;

private:
    SymbolTablePtr table_;
    Terms terms_;

    void check_compatible(const Polynomial& o) const;
};

Polynomial operator*(const mpq_class& c, const Polynomial& p);

} // namespace nonholo
