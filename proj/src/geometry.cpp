#include "nonholo/geometry.hpp"

#include "nonholo/errors.hpp"
#include "nonholo/parser.hpp"

#include <cmath>

namespace nonholo {

namespace {

RationalExpr zero_expr(const SymbolTablePtr& tab) {
    return RationalExpr{Polynomial(tab)};
}

RationalExpr half_of(const RationalExpr& e) {
    return e * RationalExpr::constant(e.table(), mpq_class(1, 2));
}

// S_jk = (d_j N_k + d_k N_j) / 2, the symmetrized Jacobian of the field.
std::vector<RationalExpr> symmetrized_jacobian(const VectorField3& f) {
    const auto& tab = f.table();
    std::size_t ci[3] = {tab->index_of("x"), tab->index_of("y"), tab->index_of("z")};
    std::vector<RationalExpr> s;
    s.reserve(9);
    for (std::size_t j = 0; j < 3; ++j)
        for (std::size_t k = 0; k < 3; ++k) {
            if (k < j) {
                s.push_back(s[k * 3 + j]);
                continue;
            }
            auto d = f.component(k).differentiate(ci[j]) +
                     f.component(j).differentiate(ci[k]);
            s.push_back(half_of(std::move(d)));
        }
    return s;
}

} // namespace

Connection3 build_connection(const VectorField3& f) {
    const auto& tab = f.table();
    RationalExpr delta = f.P * f.P + f.Q * f.Q + f.R * f.R;
    if (delta.is_zero())
        throw DomainError("connection undefined: field is identically zero");

    auto s = symmetrized_jacobian(f);
    std::vector<RationalExpr> coeffs;
    coeffs.reserve(27);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            for (std::size_t k = 0; k < 3; ++k) {
                if (k < j) {
                    coeffs.push_back(coeffs[(i * 3 + k) * 3 + j]);
                    continue;
                }
                coeffs.push_back(f.component(i) * s[j * 3 + k] / delta);
            }
    return {std::move(delta), std::move(coeffs)};
}

std::array<double, 3> geodesic_rhs(const Connection3& c,
                                   std::array<double, 3> pos,
                                   std::array<double, 3> vel,
                                   const std::map<std::string, double>& params) {
    auto vals = assemble_point(c.table(), pos, params);
    if (std::abs(c.delta.evaluate(vals)) < 1e-300)
        throw SingularPointError("geodesic acceleration undefined: Delta vanishes");
    std::array<double, 3> acc{0, 0, 0};
    for (std::size_t i = 0; i < 3; ++i) {
        double sum = 0;
        for (std::size_t j = 0; j < 3; ++j)
            for (std::size_t k = 0; k < 3; ++k)
                sum += c.pi(i, j, k).evaluate(vals) * vel[j] * vel[k];
        acc[i] = -sum;
    }
    return acc;
}

std::array<double, 3> geodesic_rhs_direct(const VectorField3& f,
                                          std::array<double, 3> pos,
                                          std::array<double, 3> vel,
                                          const std::map<std::string, double>& params) {
    const auto& tab = f.table();
    auto vals = assemble_point(tab, pos, params);
    std::size_t ci[3] = {tab->index_of("x"), tab->index_of("y"), tab->index_of("z")};

    double n[3], dnds[3];
    for (std::size_t k = 0; k < 3; ++k) {
        n[k] = f.component(k).evaluate(vals);
        dnds[k] = 0;
        for (std::size_t j = 0; j < 3; ++j)
            dnds[k] += f.component(k).differentiate(ci[j]).evaluate(vals) * vel[j];
    }
    double delta = n[0] * n[0] + n[1] * n[1] + n[2] * n[2];
    if (std::abs(delta) < 1e-300)
        throw SingularPointError("geodesic acceleration undefined: Delta vanishes");
    double t = dnds[0] * vel[0] + dnds[1] * vel[1] + dnds[2] * vel[2];
    return {-n[0] * t / delta, -n[1] * t / delta, -n[2] * t / delta};
}

CurvatureTensor3 curvature_tensor(const Connection3& c) {
    const auto& tab = c.table();
    std::size_t ci[3] = {tab->index_of("x"), tab->index_of("y"), tab->index_of("z")};

    // d_j pi(l,i,k), indexed [l][i][k][j].
    std::vector<RationalExpr> dpi;
    dpi.reserve(81);
    for (std::size_t l = 0; l < 3; ++l)
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t k = 0; k < 3; ++k)
                for (std::size_t j = 0; j < 3; ++j)
                    dpi.push_back(c.pi(l, i, k).differentiate(ci[j]));
    auto dp = [&](std::size_t l, std::size_t i, std::size_t k, std::size_t j)
        -> const RationalExpr& { return dpi[((l * 3 + i) * 3 + k) * 3 + j]; };

    std::vector<RationalExpr> comps;
    comps.reserve(81);
    for (std::size_t l = 0; l < 3; ++l)
        for (std::size_t k = 0; k < 3; ++k)
            for (std::size_t j = 0; j < 3; ++j)
                for (std::size_t i = 0; i < 3; ++i) {
                    auto e = dp(l, i, k, j) - dp(l, j, k, i);
                    for (std::size_t m = 0; m < 3; ++m)
                        e = std::move(e) + c.pi(l, j, m) * c.pi(m, i, k) -
                            c.pi(l, i, m) * c.pi(m, j, k);
                    comps.push_back(std::move(e));
                }
    return {std::move(comps)};
}

ExprMat3 ricci(const CurvatureTensor3& t) {
    std::vector<RationalExpr> entries;
    entries.reserve(9);
    for (std::size_t k = 0; k < 3; ++k)
        for (std::size_t i = 0; i < 3; ++i) {
            auto e = t.riem(0, k, 0, i);
            for (std::size_t l = 1; l < 3; ++l)
                e = std::move(e) + t.riem(l, k, l, i);
            entries.push_back(std::move(e));
        }
    return {std::move(entries)};
}

ExprMat3 ricci(const Connection3& c) { return ricci(curvature_tensor(c)); }

DirectionForm asymptotic_form(const VectorField3& f) {
    return {{f.P, f.Q, f.R}, symmetrized_jacobian(f)};
}

RationalExpr curvature_line_form(const VectorField3& f) {
    const auto& tab = f.table();
    for (const char* d : {"dx", "dy", "dz"})
        if (tab->find(d))
            throw DomainError(std::string("table already declares '") + d + "'");

    std::vector<std::string> coords, params{"dx", "dy", "dz"};
    for (const auto& sym : tab->symbols())
        (sym.kind == SymbolKind::coordinate ? coords : params).push_back(sym.name);
    auto ext = SymbolTable::make(std::move(coords), std::move(params));

    std::vector<std::size_t> to_ext(tab->size());
    for (std::size_t i = 0; i < tab->size(); ++i)
        to_ext[i] = ext->index_of(tab->at(i).name);

    auto s = symmetrized_jacobian(f);
    std::vector<RationalExpr> col, n, d;
    for (std::size_t k = 0; k < 3; ++k) {
        n.push_back(f.component(k).relabel(ext, to_ext));
        d.push_back(RationalExpr::variable(ext, k == 0 ? "dx" : k == 1 ? "dy" : "dz"));
    }
    auto two = RationalExpr::constant(ext, 2);
    for (std::size_t k = 0; k < 3; ++k) {
        auto e = zero_expr(ext);
        for (std::size_t j = 0; j < 3; ++j)
            e = std::move(e) + two * s[k * 3 + j].relabel(ext, to_ext) * d[j];
        col.push_back(std::move(e));
    }

    // det [ col | n | d ] by cofactors along the first column.
    auto minor = [&](std::size_t r) {
        std::size_t a = (r + 1) % 3, b = (r + 2) % 3;
        return n[a] * d[b] - n[b] * d[a];
    };
    return col[0] * minor(0) + col[1] * minor(1) + col[2] * minor(2);
}

RationalExpr chern_simons_density(const Connection3& c, DerivMode mode) {
    const auto& tab = c.table();
    std::size_t ci[3] = {tab->index_of("x"), tab->index_of("y"), tab->index_of("z")};

    std::vector<RationalExpr> dpi;
    dpi.reserve(81);
    for (std::size_t q = 0; q < 3; ++q)
        for (std::size_t k = 0; k < 3; ++k)
            for (std::size_t p = 0; p < 3; ++p)
                for (std::size_t j = 0; j < 3; ++j)
                    dpi.push_back(c.pi(q, k, p).differentiate(ci[j]));
    auto dp = [&](std::size_t q, std::size_t k, std::size_t p, std::size_t j)
        -> const RationalExpr& { return dpi[((q * 3 + k) * 3 + p) * 3 + j]; };

    static constexpr struct {
        std::size_t i, j, k;
        int sign;
    } perms[6] = {{0, 1, 2, +1}, {1, 2, 0, +1}, {2, 0, 1, +1},
                  {0, 2, 1, -1}, {2, 1, 0, -1}, {1, 0, 2, -1}};

    auto total = zero_expr(tab);
    auto cubic = zero_expr(tab);
    for (const auto& perm : perms) {
        auto i = perm.i, j = perm.j, k = perm.k;
        auto sgn = RationalExpr::constant(tab, perm.sign);
        for (std::size_t p = 0; p < 3; ++p)
            for (std::size_t q = 0; q < 3; ++q) {
                auto deriv = dp(q, k, p, j);
                if (mode == DerivMode::covariant)
                    for (std::size_t m = 0; m < 3; ++m)
                        deriv = std::move(deriv) + c.pi(q, j, m) * c.pi(m, k, p) -
                                c.pi(m, j, k) * c.pi(q, m, p) -
                                c.pi(m, j, p) * c.pi(q, k, m);
                total = std::move(total) + sgn * (c.pi(p, i, q) * std::move(deriv));
                for (std::size_t r = 0; r < 3; ++r)
                    cubic = std::move(cubic) +
                            sgn * (c.pi(p, i, q) * c.pi(q, j, r) * c.pi(r, k, p));
            }
    }
    return std::move(total) + RationalExpr::constant(tab, mpq_class(2, 3)) * std::move(cubic);
}

RationalExpr lorenz_cs_reference(const SymbolTablePtr& table) {
    for (const char* s : {"x", "y", "z", "sigma", "r", "b"})
        if (!table->find(s))
            throw DomainError(std::string("reference density needs symbol '") + s + "'");

    auto L = parse_expr(
        "(2*b + 2 - 2*sigma)*x^2*y^2"
        " + (3*sigma^2 + 4*sigma*r - 4*r*b - 2*b*sigma - 4*r)*z*x^2"
        " + (2*b + 2 - 2*sigma)*z^2*x^2"
        " + (-3*r*sigma^2 + 4*sigma^2*b - 5*sigma^3 + 2*b*sigma*r - 2*sigma*r^2"
        "    + 4*sigma^2 + 2*b*r^2 + 2*r^2)*x^2"
        " + (-2*r*b - 4*r + 9*sigma^3 + 2*r*sigma^2)*y*x"
        " + (-2*sigma + 4 - 2*sigma^2 - 2*sigma*r + 2*b*sigma - 4*b^2)*z*y*x"
        " - ((b*sigma*r + 2*sigma^2 + sigma^2*b - sigma*z^2 - 2*sigma*r - sigma*r^2)*y"
        "    - sigma*y^3)*x"
        " + (-2*sigma*b^2 + 2*b^3 - 2*b^2)*z^2"
        " + (-4*sigma^3 - sigma^2*b + 2 - 2*b - sigma^2 + sigma*r"
        "    + (-sigma + b*sigma)*z - b*sigma*r - 2*sigma)*y^2"
        " + (-2*sigma*b^2 + 2*r*b^2 + 2*b^2*r*sigma - 2*b^2*sigma^2)*z",
        table);
    auto M = parse_expr(
        "(x^2 + b^2)*z^2 + ((-2*b + 2)*x*y - 2*r*x^2)*z + (sigma^2 + 1 + x^2)*y^2"
        " + (-2*sigma^2 - 2*r)*x*y + (sigma^2 + r^2)*x^2",
        table);
    return L / (RationalExpr::constant(table, 2) * M * M);
}

} // namespace nonholo
