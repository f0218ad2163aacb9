#include "nonholo/compiled.hpp"

#include "nonholo/errors.hpp"

#include <cmath>

namespace nonholo {

CompiledPoly::CompiledPoly(const Polynomial& p) {
    terms_.reserve(p.terms().size());
    for (const auto& [m, c] : p.terms()) {
        Term t;
        t.coeff = c.get_d();
        t.first = std::uint32_t(factors_.size());
        t.count = 0;
        for (std::size_t i = 0; i < m.size(); ++i) {
            if (m[i] == 0)
                continue;
            factors_.push_back({std::uint32_t(i), m[i]});
            ++t.count;
        }
        terms_.push_back(t);
    }
}

double CompiledPoly::eval(const double* values) const {
    double acc = 0.0;
    for (const auto& t : terms_) {
        double v = t.coeff;
        const Factor* f = factors_.data() + t.first;
        for (std::uint32_t k = 0; k < t.count; ++k, ++f) {
            double x = values[f->index];
            switch (f->exponent) {
            case 1: v *= x; break;
            case 2: v *= x * x; break;
            case 3: v *= x * x * x; break;
            case 4: { double x2 = x * x; v *= x2 * x2; break; }
            default: v *= std::pow(x, double(f->exponent)); break;
            }
        }
        acc += v;
    }
    return acc;
}

CompiledExpr::CompiledExpr(const RationalExpr& e)
    : num_(e.num()), den_(e.den()), den_is_one_(e.den_is_one()) {}

double CompiledExpr::eval(const double* values) const {
    double n = num_.eval(values);
    if (den_is_one_)
        return n;
    double d = den_.eval(values);
    if (std::abs(d) < 1e-300)
        throw SingularPointError("denominator vanishes at evaluation point");
    return n / d;
}

} // namespace nonholo
