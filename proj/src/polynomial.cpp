#include "nonholo/polynomial.hpp"

#include "nonholo/errors.hpp"

#include <cmath>

namespace nonholo {

Polynomial::Polynomial(SymbolTablePtr table) : table_(std::move(table)) {}

Polynomial::Polynomial(SymbolTablePtr table, mpq_class c) : table_(std::move(table)) {
    c.canonicalize();
    if (c != 0)
        terms_.emplace(Monomial(table_->size(), 0), std::move(c));
}

Polynomial Polynomial::variable(SymbolTablePtr table, std::size_t index) {
    Polynomial p(table);
    Monomial m(table->size(), 0);
    m.at(index) = 1;
    p.terms_.emplace(std::move(m), mpq_class(1));
    return p;
}

Polynomial Polynomial::variable(SymbolTablePtr table, const std::string& name) {
    auto idx = table->index_of(name);
    return variable(std::move(table), idx);
}

bool Polynomial::is_constant() const {
    if (terms_.empty())
        return true;
    return terms_.size() == 1 && total_degree(terms_.begin()->first) == 0;
}

mpq_class Polynomial::constant_value() const {
    if (terms_.empty())
        return 0;
    if (!is_constant())
        throw DomainError("constant_value() on a non-constant polynomial");
    return terms_.begin()->second;
}

std::uint64_t Polynomial::degree() const {
    // Terms are kept in descending graded order, so the first term is maximal.
    return terms_.empty() ? 0 : total_degree(terms_.begin()->first);
}

std::uint32_t Polynomial::degree_in(std::size_t var) const {
    std::uint32_t d = 0;
    for (const auto& [m, c] : terms_)
        d = std::max(d, m.at(var));
    return d;
}

void Polynomial::check_compatible(const Polynomial& o) const {
    if (!table_->compatible(*o.table_))
        throw DomainError("polynomial arithmetic across different symbol tables");
}

void Polynomial::add_term(const Monomial& m, const mpq_class& c) {
    if (c == 0)
        return;
    for (auto e : m)
        if (e > kMaxExponent)
            throw DomainError("exponent exceeds 2^16 bound");
    auto [it, inserted] = terms_.emplace(m, c);
    if (!inserted) {
        it->second += c;
        if (it->second == 0)
            terms_.erase(it);
    }
}

Polynomial Polynomial::operator-() const {
    Polynomial r(table_);
    for (const auto& [m, c] : terms_)
        r.terms_.emplace(m, -c);
    return r;
}

Polynomial& Polynomial::operator+=(const Polynomial& o) {
    check_compatible(o);
    for (const auto& [m, c] : o.terms_)
        add_term(m, c);
    return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& o) {
    check_compatible(o);
    for (const auto& [m, c] : o.terms_)
        add_term(m, -c);
    return *this;
}

Polynomial Polynomial::operator*(const Polynomial& o) const {
    check_compatible(o);
    Polynomial r(table_);
    const std::size_t n = table_->size();
    Monomial prod(n, 0);
    for (const auto& [ma, ca] : terms_) {
        for (const auto& [mb, cb] : o.terms_) {
            for (std::size_t i = 0; i < n; ++i) {
                std::uint64_t e = std::uint64_t(ma[i]) + mb[i];
                if (e > kMaxExponent)
                    throw DomainError("exponent exceeds 2^16 bound in product");
                prod[i] = std::uint32_t(e);
            }
            r.add_term(prod, ca * cb);
        }
    }
    return r;
}

Polynomial Polynomial::operator*(const mpq_class& c) const {
    Polynomial r(table_);
    if (c == 0)
        return r;
    for (const auto& [m, k] : terms_)
        r.terms_.emplace(m, k * c);
    return r;
}

Polynomial operator*(const mpq_class& c, const Polynomial& p) { return p * c; }

Polynomial Polynomial::pow(std::uint32_t e) const {
    Polynomial r(table_, mpq_class(1));
    Polynomial base = *this;
    // Square-and-multiply; exponents in practice stay in single digits.
    while (e) {
        if (e & 1u)
            r = r * base;
        e >>= 1u;
        if (e)
            base = base * base;
    }
    return r;
}

Polynomial Polynomial::differentiate(std::size_t var) const {
    if (!table_->is_coordinate(var))
        throw DomainError("cannot differentiate with respect to parameter '" +
                          table_->at(var).name + "'");
    Polynomial r(table_);
    for (const auto& [m, c] : terms_) {
        auto e = m.at(var);
        if (e == 0)
            continue;
        Monomial d = m;
        d[var] = e - 1;
        r.add_term(d, c * e);
    }
    return r;
}

double Polynomial::evaluate(std::span<const double> values) const {
    if (values.size() != table_->size())
        throw DomainError("evaluation point has wrong dimension");
    double acc = 0.0;
    for (const auto& [m, c] : terms_) {
        double t = c.get_d();
        for (std::size_t i = 0; i < m.size(); ++i) {
            switch (m[i]) {
            case 0: break;
            case 1: t *= values[i]; break;
            case 2: t *= values[i] * values[i]; break;
            default: t *= std::pow(values[i], double(m[i])); break;
            }
        }
        acc += t;
    }
    return acc;
}

Polynomial Polynomial::relabel(SymbolTablePtr to, const std::vector<std::size_t>& index_map) const {
    if (index_map.size() != table_->size())
        throw DomainError("relabel index map has wrong size");
    Polynomial r(to);
    Monomial m2(to->size(), 0);
    for (const auto& [m, c] : terms_) {
        std::fill(m2.begin(), m2.end(), 0u);
        for (std::size_t i = 0; i < m.size(); ++i)
            m2.at(index_map[i]) = m[i];
        r.add_term(m2, c);
    }
    return r;
}

std::vector<Polynomial> Polynomial::coefficients_in(std::size_t var) const {
    std::vector<Polynomial> out(std::size_t(degree_in(var)) + 1, Polynomial(table_));
    for (const auto& [m, c] : terms_) {
        Monomial rest = m;
        auto e = rest[var];
        rest[var] = 0;
        out[e].add_term(rest, c);
    }
    return out;
}

} // namespace nonholo
