#pragma once

#include "nonholo/rational.hpp"

#include <cstdint>
#include <vector>

namespace nonholo {

// Flattened double-precision form of a polynomial for tight evaluation loops
// inside the integrators.  Exact coefficients are rounded to binary64 once,
// at compile time; the symbolic layer stays exact.
class CompiledPoly {
public:
    CompiledPoly() = default;
    explicit CompiledPoly(const Polynomial& p);

    double eval(const double* values) const;

    bool empty() const { return terms_.empty(); }

private:
    struct Factor {
        std::uint32_t index;
        std::uint32_t exponent;
    };
    struct Term {
        double coeff;
        std::uint32_t first;  // range into factors_
        std::uint32_t count;
    };
    std::vector<Term> terms_;
    std::vector<Factor> factors_;
};

class CompiledExpr {
public:
    CompiledExpr() = default;
    explicit CompiledExpr(const RationalExpr& e);

    // Throws SingularPointError when the denominator magnitude falls under
    // 1e-300, same contract as the symbolic evaluate.
    double eval(const double* values) const;

    // Denominator value alone (for singularity guards that want the raw Delta).
    double eval_den(const double* values) const { return den_.eval(values); }
    double eval_num(const double* values) const { return num_.eval(values); }

private:
    CompiledPoly num_, den_;
    bool den_is_one_ = true;
};

} // namespace nonholo
