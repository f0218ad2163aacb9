#include "nonholo/field.hpp"

#include "nonholo/errors.hpp"
#include "nonholo/parser.hpp"

#include <cmath>

namespace nonholo {

VectorField3 curl(const VectorField3& f) {
    const auto& tab = f.table();
    auto x = tab->index_of("x"), y = tab->index_of("y"), z = tab->index_of("z");
    return {
        f.R.differentiate(y) - f.Q.differentiate(z),
        f.P.differentiate(z) - f.R.differentiate(x),
        f.Q.differentiate(x) - f.P.differentiate(y),
    };
}

RationalExpr holonomicity(const VectorField3& f) {
    VectorField3 c = curl(f);
    return f.P * c.P + f.Q * c.Q + f.R * c.R;
}

std::array<RationalExpr, 3> exactness_residuals(const VectorField3& f) {
    const auto& tab = f.table();
    auto x = tab->index_of("x"), y = tab->index_of("y"), z = tab->index_of("z");
    return {
        f.P.differentiate(y) - f.Q.differentiate(x),
        f.Q.differentiate(z) - f.R.differentiate(y),
        f.R.differentiate(x) - f.P.differentiate(z),
    };
}

std::vector<double> assemble_point(const SymbolTablePtr& table,
                                   std::span<const double> coords,
                                   const std::map<std::string, double>& params) {
    if (coords.size() != table->coordinate_count())
        throw DomainError("coordinate vector has wrong dimension");
    for (const auto& [k, v] : params) {
        auto idx = table->find(k);
        if (!idx || table->is_coordinate(*idx))
            throw DomainError("unknown parameter '" + k + "'");
    }
    std::vector<double> vals(table->size(), 0.0);
    for (std::size_t i = 0; i < coords.size(); ++i)
        vals[i] = coords[i];
    for (std::size_t i = coords.size(); i < table->size(); ++i) {
        auto it = params.find(table->at(i).name);
        if (it == params.end())
            throw DomainError("missing value for parameter '" + table->at(i).name + "'");
        vals[i] = it->second;
    }
    return vals;
}

PlaneEquation tangent_plane(const VectorField3& f, std::array<double, 3> pt,
                            const std::map<std::string, double>& params) {
    auto vals = assemble_point(f.table(), pt, params);
    PlaneEquation plane;
    plane.point = pt;
    plane.normal = {f.P.evaluate(vals), f.Q.evaluate(vals), f.R.evaluate(vals)};
    double mag = std::abs(plane.normal[0]) + std::abs(plane.normal[1]) + std::abs(plane.normal[2]);
    if (mag == 0.0)
        throw SingularPointError("tangent plane undefined: field vanishes at the point");
    return plane;
}

RationalExpr euler_contraction(const VectorField3& f) {
    const auto& tab = f.table();
    auto X = RationalExpr::variable(tab, "x");
    auto Y = RationalExpr::variable(tab, "y");
    auto Z = RationalExpr::variable(tab, "z");
    return X * f.P + Y * f.Q + Z * f.R;
}

PlanarPolySystem::PlanarPolySystem(Polynomial p_, Polynomial q_)
    : p(std::move(p_)), q(std::move(q_)) {
    const auto& tab = p.table();
    for (std::size_t i = 0; i < tab->size(); ++i) {
        if (!tab->is_coordinate(i))
            continue;
        const auto& name = tab->at(i).name;
        if (name == "x" || name == "y")
            continue;
        if (p.degree_in(i) > 0 || q.degree_in(i) > 0)
            throw DomainError("planar system must involve only x and y");
    }
}

namespace {

// Degree in the coordinates alone; parameter exponents (mu^2*y and the like)
// must not influence the homogenization.
std::uint64_t coordinate_degree(const Polynomial& p) {
    std::uint64_t d = 0;
    const auto& tab = p.table();
    for (const auto& [m, c] : p.terms()) {
        std::uint64_t t = 0;
        for (std::size_t i = 0; i < m.size(); ++i)
            if (tab->is_coordinate(i))
                t += m[i];
        d = std::max(d, t);
    }
    return d;
}

// z^(d - coordinate degree) padding applied termwise.
Polynomial homogenize(const Polynomial& p, std::uint64_t d, std::size_t z_index) {
    const auto& tab = p.table();
    Polynomial out(tab);
    for (const auto& [m, c] : p.terms()) {
        std::uint64_t t = 0;
        for (std::size_t i = 0; i < m.size(); ++i)
            if (tab->is_coordinate(i))
                t += m[i];
        Monomial h = m;
        h[z_index] += std::uint32_t(d - t);
        out.add_term(h, c);
    }
    return out;
}

} // namespace

std::uint64_t PlanarPolySystem::degree() const {
    return std::max(coordinate_degree(p), coordinate_degree(q));
}

VectorField3 projective_extension(const PlanarPolySystem& s) {
    const auto& tab = s.p.table();
    std::uint64_t d = s.degree();
    if (d == 0)
        throw DomainError("projective extension needs a system of positive degree");
    auto zi = tab->index_of("z");
    RationalExpr Ptil{homogenize(s.p, d, zi)};
    RationalExpr Qtil{homogenize(s.q, d, zi)};
    auto X = RationalExpr::variable(tab, "x");
    auto Y = RationalExpr::variable(tab, "y");
    auto Z = RationalExpr::variable(tab, "z");
    return {-(Z * Qtil), Z * Ptil, X * Qtil - Y * Ptil};
}

namespace {

struct CatalogDef {
    CatalogEntry meta;
    // Either a direct component triple or a planar system to extend.
    std::array<const char*, 3> components{nullptr, nullptr, nullptr};
    std::array<const char*, 2> planar{nullptr, nullptr};
};

const std::vector<CatalogDef>& defs() {
    static const std::vector<CatalogDef> table = {
        {{"lorenz", {"sigma", "r", "b"}, "classic convection-roll flow"},
         {"sigma*(y - x)", "r*x - y - z*x", "x*y - b*z"},
         {}},
        {{"rossler", {"a", "b", "c"}, "banded chaotic flow"},
         {"-y - z", "x + a*y", "b + x*z - c*z"},
         {}},
        {{"triple_product", {"a", "b", "c"}, "surface-free constraint a*y*z, b*x*z, c*x*y"},
         {"a*y*z", "b*x*z", "c*x*y"},
         {}},
        {{"vdp_projective", {"mu"}, "projective extension of the relaxation oscillator"},
         {},
         {"y", "-x - x^2*y + mu^2*y"}},
        {{"quadratic10", {"k", "l", "m", "n", "a", "b", "c", "e", "f", "h"},
          "general quadratic planar system, projectively extended"},
         {},
         {"k*x + l*y + a*x^2 + b*x*y + c*y^2", "m*x + n*y + e*x^2 + f*x*y + h*y^2"}},
        {{"cubic_node", {"a", "b"}, "cubic system with a node at the circle, extended"},
         {},
         {"-y + a*x*(x^2 + y^2 - 1)", "x + b*y*(x^2 + y^2 - 1)"}},
        {{"quartic_center", {"A", "a"}, "quartic center/limit-cycle system, extended"},
         {},
         {"-A*y + y*x^2 - x^4", "a*x - x^3"}},
    };
    return table;
}

} // namespace

const std::vector<CatalogEntry>& catalog_entries() {
    static const std::vector<CatalogEntry> list = [] {
        std::vector<CatalogEntry> out;
        for (const auto& d : defs())
            out.push_back(d.meta);
        return out;
    }();
    return list;
}

VectorField3 catalog(const std::string& name, const std::map<std::string, mpq_class>& params) {
    const CatalogDef* def = nullptr;
    for (const auto& d : defs())
        if (d.meta.name == name)
            def = &d;
    if (!def)
        throw DomainError("unknown catalog entry '" + name + "'");

    for (const auto& [k, v] : params) {
        bool known = false;
        for (const auto& p : def->meta.param_names)
            known |= (p == k);
        if (!known)
            throw DomainError("catalog entry '" + name + "' has no parameter '" + k + "'");
    }

    auto tab = make_table_xyz(def->meta.param_names);
    VectorField3 f = [&] {
        if (def->components[0]) {
            return VectorField3{parse_expr(def->components[0], tab),
                                parse_expr(def->components[1], tab),
                                parse_expr(def->components[2], tab)};
        }
        PlanarPolySystem s(parse_expr(def->planar[0], tab).num(),
                           parse_expr(def->planar[1], tab).num());
        return projective_extension(s);
    }();

    for (const auto& [k, v] : params) {
        auto c = RationalExpr::constant(tab, v);
        f.P = f.P.substitute(k, c);
        f.Q = f.Q.substitute(k, c);
        f.R = f.R.substitute(k, c);
    }
    return f;
}

} // namespace nonholo
