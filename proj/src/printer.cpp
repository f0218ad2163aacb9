#include "nonholo/printer.hpp"

namespace nonholo {

namespace {

// |c| as "a" or "a/b"; the sign is handled by the term joiner.
std::string abs_coeff_string(const mpq_class& c) {
    mpq_class a = c < 0 ? mpq_class(-c) : c;
    return a.get_str();
}

std::string monomial_string(const Monomial& m, const SymbolTable& tab) {
    std::string out;
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (m[i] == 0)
            continue;
        if (!out.empty())
            out += "*";
        out += tab.at(i).name;
        if (m[i] > 1)
            out += "^" + std::to_string(m[i]);
    }
    return out;
}

} // namespace

std::string to_string(const Polynomial& p) {
    if (p.is_zero())
        return "0";
    std::string out;
    bool first = true;
    for (const auto& [m, c] : p.terms()) {
        const bool neg = c < 0;
        if (first)
            out += neg ? "-" : "";
        else
            out += neg ? " - " : " + ";
        first = false;

        std::string mono = monomial_string(m, *p.table());
        std::string coeff = abs_coeff_string(c);
        if (mono.empty())
            out += coeff;
        else if (coeff == "1")
            out += mono;
        else
            out += coeff + "*" + mono;
    }
    return out;
}

std::string to_string(const RationalExpr& e) {
    if (e.den_is_one())
        return to_string(e.num());
    return "(" + to_string(e.num()) + ")/(" + to_string(e.den()) + ")";
}

} // namespace nonholo
