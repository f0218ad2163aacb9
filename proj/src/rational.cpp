#include "nonholo/rational.hpp"

#include "nonholo/errors.hpp"

#include <cmath>

namespace nonholo {

RationalExpr::RationalExpr(Polynomial num)
    : num_(std::move(num)), den_(num_.table(), mpq_class(1)) {}

RationalExpr::RationalExpr(Polynomial num, Polynomial den)
    : num_(std::move(num)), den_(std::move(den)) {
    if (den_.is_zero())
        throw ZeroDenominatorError("rational expression with zero denominator");
    if (!num_.table()->compatible(*den_.table()))
        throw DomainError("numerator and denominator over different symbol tables");
    normalize();
}

RationalExpr RationalExpr::constant(SymbolTablePtr table, mpq_class c) {
    return RationalExpr(Polynomial(std::move(table), std::move(c)));
}

RationalExpr RationalExpr::variable(SymbolTablePtr table, const std::string& name) {
    return RationalExpr(Polynomial::variable(std::move(table), name));
}

bool RationalExpr::den_is_one() const {
    return den_.is_constant() && den_.constant_value() == 1;
}

void RationalExpr::normalize() {
    if (num_.is_zero()) {
        den_ = Polynomial(num_.table(), mpq_class(1));
        return;
    }
    if (den_.is_constant()) {
        // Fold a constant denominator into the coefficients.
        mpq_class c = den_.constant_value();
        if (c != 1) {
            num_ = num_ * mpq_class(1 / c);
            den_ = Polynomial(num_.table(), mpq_class(1));
        }
        return;
    }
    // Leading denominator coefficient positive, so that n/d and (-n)/(-d)
    // have one representation.
    if (den_.terms().begin()->second < 0) {
        num_ = -num_;
        den_ = -den_;
    }
}

std::optional<mpq_class> proportionality_constant(const Polynomial& a, const Polynomial& b) {
    const auto& ta = a.terms();
    const auto& tb = b.terms();
    if (ta.size() != tb.size() || ta.empty())
        return std::nullopt;
    auto ia = ta.begin();
    auto ib = tb.begin();
    mpq_class ratio = ib->second / ia->second;
    for (; ia != ta.end(); ++ia, ++ib) {
        if (ia->first != ib->first)
            return std::nullopt;
        if (ib->second != ratio * ia->second)
            return std::nullopt;
    }
    return ratio;
}

void RationalExpr::ensure_valid() const {
    if (den_.is_zero())
        throw ZeroDenominatorError("arithmetic on an expression whose denominator "
                                   "collapsed to zero under substitution");
}

RationalExpr RationalExpr::operator-() const {
    RationalExpr r = *this;
    r.num_ = -r.num_;
    return r;
}

RationalExpr RationalExpr::operator+(const RationalExpr& o) const {
    ensure_valid();
    o.ensure_valid();
    if (den_ == o.den_)
        return RationalExpr(num_ + o.num_, den_);
    if (auto c = proportionality_constant(den_, o.den_))
        // this + o = (c*num + o.num) / (c*den) when o.den == c*den.
        return RationalExpr(num_ * *c + o.num_, o.den_);
    if (auto c = proportionality_constant(o.den_, den_))
        return RationalExpr(num_ + o.num_ * *c, den_);
    return RationalExpr(num_ * o.den_ + o.num_ * den_, den_ * o.den_);
}

RationalExpr RationalExpr::operator-(const RationalExpr& o) const {
    return *this + (-o);
}

RationalExpr RationalExpr::operator*(const RationalExpr& o) const {
    ensure_valid();
    o.ensure_valid();
    return RationalExpr(num_ * o.num_, den_ * o.den_);
}

RationalExpr RationalExpr::operator/(const RationalExpr& o) const {
    ensure_valid();
    o.ensure_valid();
    if (o.num_.is_zero())
        throw ZeroDenominatorError("division by an expression that expands to zero");
    return RationalExpr(num_ * o.den_, den_ * o.num_);
}

RationalExpr RationalExpr::differentiate(std::size_t var) const {
    ensure_valid();
    Polynomial dn = num_.differentiate(var);
    if (den_is_one())
        return RationalExpr(std::move(dn));
    Polynomial dd = den_.differentiate(var);
    if (dd.is_zero())
        return RationalExpr(std::move(dn), den_);
    // Quotient rule without reduction: (n'd - nd') / d^2.
    return RationalExpr(dn * den_ - num_ * dd, den_ * den_);
}

RationalExpr RationalExpr::differentiate(const std::string& coord) const {
    return differentiate(table()->index_of(coord));
}

bool RationalExpr::equals(const RationalExpr& o) const {
    // Identical denominators reduce equality to the numerators; this keeps
    // comparisons of curvature-scale quotients (shared Delta powers) cheap.
    if (den_ == o.den_)
        return (num_ - o.num_).is_zero();
    return (num_ * o.den_ - o.num_ * den_).is_zero();
}

double RationalExpr::evaluate(std::span<const double> values) const {
    double d = den_.evaluate(values);
    if (std::abs(d) < 1e-300)
        throw SingularPointError("denominator vanishes at evaluation point");
    return num_.evaluate(values) / d;
}

RationalExpr substitute(const Polynomial& p, std::size_t var, const RationalExpr& r) {
    // Write p = sum_e p_e * var^e, then p(var <- rn/rd) has the common
    // denominator rd^E:  sum_e p_e * rn^e * rd^(E-e)  /  rd^E.
    auto coeffs = p.coefficients_in(var);
    const auto table = p.table();
    const std::size_t E = coeffs.size() - 1;

    // r's numerator/denominator may live over a different (compatible) table;
    // arithmetic below requires exact table agreement at the polynomial level.
    if (!table->compatible(*r.table()))
        throw DomainError("substitute: replacement over a different symbol table");

    std::vector<Polynomial> rn_pow, rd_pow;
    rn_pow.reserve(E + 1);
    rd_pow.reserve(E + 1);
    Polynomial one(table, mpq_class(1));
    rn_pow.push_back(one);
    rd_pow.push_back(one);
    for (std::size_t e = 1; e <= E; ++e) {
        rn_pow.push_back(rn_pow.back() * r.num());
        rd_pow.push_back(rd_pow.back() * r.den());
    }

    Polynomial acc(table);
    for (std::size_t e = 0; e <= E; ++e) {
        if (coeffs[e].is_zero())
            continue;
        acc += coeffs[e] * rn_pow[e] * rd_pow[E - e];
    }
    return RationalExpr(std::move(acc), rd_pow[E]);
}

RationalExpr RationalExpr::substitute(std::size_t var, const RationalExpr& r) const {
    ensure_valid();
    r.ensure_valid();
    RationalExpr n = nonholo::substitute(num_, var, r);
    RationalExpr d = nonholo::substitute(den_, var, r);
    // d may legitimately expand to zero (e.g. 1/y with y <- 0).  The result
    // then stays a symbolic husk and the error is deferred to evaluation.
    Polynomial rnum = n.num() * d.den();
    Polynomial rden = n.den() * d.num();
    if (rden.is_zero())
        return RationalExpr(std::move(rnum), std::move(rden), raw_tag{});
    return RationalExpr(std::move(rnum), std::move(rden));
}

RationalExpr RationalExpr::substitute(const std::string& name, const RationalExpr& r) const {
    return substitute(table()->index_of(name), r);
}

RationalExpr RationalExpr::relabel(SymbolTablePtr to, const std::vector<std::size_t>& index_map) const {
    auto n = num_.relabel(to, index_map);
    auto d = den_.relabel(std::move(to), index_map);
    return RationalExpr(std::move(n), std::move(d));
}

} // namespace nonholo
