#include "nonholo/extension.hpp"

#include "nonholo/errors.hpp"

#include <cmath>

namespace nonholo {

namespace {

RationalExpr zero_expr(const SymbolTablePtr& tab) {
    return RationalExpr{Polynomial(tab)};
}

// d_j pi(l,i,k) for all 81 index choices, layout [((l*3+i)*3+k)*3+j].
std::vector<RationalExpr> connection_gradient(const std::vector<RationalExpr>& pi,
                                              const std::size_t ci[3]) {
    std::vector<RationalExpr> dpi;
    dpi.reserve(81);
    for (std::size_t l = 0; l < 3; ++l)
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t k = 0; k < 3; ++k)
                for (std::size_t j = 0; j < 3; ++j)
                    dpi.push_back(pi[(l * 3 + i) * 3 + k].differentiate(ci[j]));
    return dpi;
}

} // namespace

ExtendedMetric6 build_extension(const Connection3& c) {
    const auto& base_tab = c.table();
    if (base_tab->coordinate_count() != 3)
        throw DomainError("extension needs a 3-coordinate base table");
    for (const char* psi : {"psi1", "psi2", "psi3"})
        if (base_tab->find(psi))
            throw DomainError(std::string("cannot extend: base table already declares ") + psi);

    std::vector<std::string> coords;
    for (std::size_t i = 0; i < base_tab->coordinate_count(); ++i)
        coords.push_back(base_tab->at(i).name);
    coords.insert(coords.end(), {"psi1", "psi2", "psi3"});
    std::vector<std::string> params;
    for (std::size_t i = base_tab->coordinate_count(); i < base_tab->size(); ++i)
        params.push_back(base_tab->at(i).name);
    auto tab6 = SymbolTable::make(std::move(coords), std::move(params));

    std::vector<std::size_t> index_map(base_tab->size());
    for (std::size_t i = 0; i < base_tab->size(); ++i)
        index_map[i] = tab6->index_of(base_tab->at(i).name);

    std::vector<RationalExpr> pi6;
    pi6.reserve(27);
    for (const auto& e : c.coeffs)
        pi6.push_back(e.relabel(tab6, index_map));
    auto p6 = [&](std::size_t i, std::size_t j, std::size_t k) -> const RationalExpr& {
        return pi6[(i * 3 + j) * 3 + k];
    };

    RationalExpr psi[3] = {
        RationalExpr::variable(tab6, "psi1"),
        RationalExpr::variable(tab6, "psi2"),
        RationalExpr::variable(tab6, "psi3"),
    };
    auto minus_two = RationalExpr::constant(tab6, mpq_class(-2));
    auto one = RationalExpr::constant(tab6, mpq_class(1));

    std::vector<RationalExpr> g;
    g.reserve(36);
    for (std::size_t a = 0; a < 6; ++a)
        for (std::size_t b = 0; b < 6; ++b) {
            if (a < 3 && b < 3) {
                if (b < a) {  // symmetric: reuse the transpose entry
                    g.push_back(g[b * 6 + a]);
                    continue;
                }
                auto sum = zero_expr(tab6);
                for (std::size_t k = 0; k < 3; ++k)
                    sum = sum + p6(k, a, b) * psi[k];
                g.push_back(minus_two * sum);
            } else if (a >= 3 && b >= 3) {
                g.push_back(zero_expr(tab6));
            } else {
                std::size_t i = a < 3 ? a : b;      // base index
                std::size_t l = a < 3 ? b - 3 : a - 3;  // fiber index
                g.push_back(i == l ? one : zero_expr(tab6));
            }
        }
    return {std::move(tab6), c, std::move(pi6), std::move(g)};
}

namespace {

// Laplace expansion over the still-active rows/columns, always along the row
// with the fewest nonzero entries so the identity blocks collapse first.
RationalExpr laplace_det(const ExtendedMetric6& m, std::vector<std::size_t> rows,
                         std::vector<std::size_t> cols) {
    if (rows.size() == 1)
        return m.at(rows[0], cols[0]);

    std::size_t best = 0, best_count = cols.size() + 1;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        std::size_t count = 0;
        for (std::size_t c : cols)
            if (!m.at(rows[r], c).is_zero()) ++count;
        if (count < best_count) {
            best_count = count;
            best = r;
        }
    }

    auto sub_rows = rows;
    sub_rows.erase(sub_rows.begin() + static_cast<std::ptrdiff_t>(best));
    auto det = zero_expr(m.table6);
    for (std::size_t c = 0; c < cols.size(); ++c) {
        const auto& entry = m.at(rows[best], cols[c]);
        if (entry.is_zero()) continue;
        auto sub_cols = cols;
        sub_cols.erase(sub_cols.begin() + static_cast<std::ptrdiff_t>(c));
        auto minor = laplace_det(m, sub_rows, sub_cols);
        auto term = entry * minor;
        det = ((best + c) % 2 == 0) ? det + term : det - term;
    }
    return det;
}

} // namespace

RationalExpr metric_determinant(const ExtendedMetric6& m) {
    return laplace_det(m, {0, 1, 2, 3, 4, 5}, {0, 1, 2, 3, 4, 5});
}

std::vector<RationalExpr> metric_inverse(const ExtendedMetric6& m) {
    auto one = RationalExpr::constant(m.table6, mpq_class(1));
    std::vector<RationalExpr> inv;
    inv.reserve(36);
    for (std::size_t a = 0; a < 6; ++a)
        for (std::size_t b = 0; b < 6; ++b) {
            if (a < 3 && b < 3)
                inv.push_back(zero_expr(m.table6));
            else if (a >= 3 && b >= 3)
                inv.push_back(-m.at(a - 3, b - 3));
            else
                inv.push_back((a < 3 ? a : b) == (a < 3 ? b - 3 : a - 3)
                                  ? one
                                  : zero_expr(m.table6));
        }
    return inv;
}

std::vector<RationalExpr> fiber_christoffel(const ExtendedMetric6& m) {
    const auto& tab = m.table6;
    std::size_t ci[3] = {tab->index_of("x"), tab->index_of("y"), tab->index_of("z")};
    auto dpi = connection_gradient(m.pi6, ci);
    auto dp = [&](std::size_t l, std::size_t i, std::size_t k, std::size_t j)
        -> const RationalExpr& { return dpi[((l * 3 + i) * 3 + k) * 3 + j]; };
    auto p6 = [&](std::size_t i, std::size_t j, std::size_t k) -> const RationalExpr& {
        return m.pi6[(i * 3 + j) * 3 + k];
    };
    RationalExpr psi[3] = {
        RationalExpr::variable(tab, "psi1"),
        RationalExpr::variable(tab, "psi2"),
        RationalExpr::variable(tab, "psi3"),
    };
    auto two = RationalExpr::constant(tab, mpq_class(2));

    std::vector<RationalExpr> out;
    out.reserve(27);
    for (std::size_t k = 0; k < 3; ++k)
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j) {
                if (j < i) {  // symmetric in (i,j)
                    out.push_back(out[(k * 3 + j) * 3 + i]);
                    continue;
                }
                auto sum = zero_expr(tab);
                for (std::size_t mm = 0; mm < 3; ++mm) {
                    auto coeff = -(dp(mm, k, j, i) + dp(mm, i, k, j) - dp(mm, i, j, k));
                    auto quad = zero_expr(tab);
                    for (std::size_t l = 0; l < 3; ++l)
                        quad = quad + p6(mm, k, l) * p6(l, i, j);
                    coeff = coeff + two * quad;
                    sum = sum + coeff * psi[mm];
                }
                out.push_back(std::move(sum));
            }
    return out;
}

std::array<double, 6> extended_geodesic_rhs(const ExtendedMetric6& m,
                                            const std::vector<RationalExpr>& fiber,
                                            std::array<double, 6> pos,
                                            std::array<double, 6> vel,
                                            const std::map<std::string, double>& params) {
    auto vals = assemble_point(m.table6, pos, params);
    std::array<double, 3> base{pos[0], pos[1], pos[2]};
    auto base_vals = assemble_point(m.base.table(), base, params);
    if (std::abs(m.base.delta.evaluate(base_vals)) < 1e-300)
        throw SingularPointError("extended geodesic undefined: Delta vanishes");

    double pv[27];
    for (std::size_t i = 0; i < 27; ++i)
        pv[i] = m.pi6[i].evaluate(vals);

    std::array<double, 6> acc{};
    for (std::size_t i = 0; i < 3; ++i) {
        double sum = 0;
        for (std::size_t j = 0; j < 3; ++j)
            for (std::size_t k = 0; k < 3; ++k)
                sum += pv[(i * 3 + j) * 3 + k] * vel[j] * vel[k];
        acc[i] = -sum;
    }
    for (std::size_t k = 0; k < 3; ++k) {
        double sum = 0;
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j)
                sum += fiber[(k * 3 + i) * 3 + j].evaluate(vals) * vel[i] * vel[j];
        double coupling = 0;
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t l = 0; l < 3; ++l)
                coupling += pv[(l * 3 + i) * 3 + k] * vel[i] * vel[3 + l];
        acc[3 + k] = -sum + 2 * coupling;
    }
    return acc;
}

// ---- evaluation kernels -------------------------------------------------

namespace {

inline double pi_at(const double* pi, std::size_t i, std::size_t j, std::size_t k) {
    return pi[(i * 3 + j) * 3 + k];
}
inline double dpi_at(const double* dpi, std::size_t l, std::size_t i, std::size_t k,
                     std::size_t j) {
    return dpi[((l * 3 + i) * 3 + k) * 3 + j];
}
inline double riem_at(const double* riem, std::size_t l, std::size_t k, std::size_t j,
                      std::size_t i) {
    return riem[((l * 3 + k) * 3 + j) * 3 + i];
}

} // namespace

std::array<double, 3> fiber_acc_from_blocks(const double* pi, const double* dpi,
                                            const double* vel, const double* psi,
                                            const double* psidot) {
    std::array<double, 3> acc{};
    for (std::size_t k = 0; k < 3; ++k) {
        double quad = 0;
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j) {
                double gam = 0;
                for (std::size_t m = 0; m < 3; ++m) {
                    double c = -(dpi_at(dpi, m, k, j, i) + dpi_at(dpi, m, i, k, j) -
                                 dpi_at(dpi, m, i, j, k));
                    double q = 0;
                    for (std::size_t l = 0; l < 3; ++l)
                        q += pi_at(pi, m, k, l) * pi_at(pi, l, i, j);
                    gam += (c + 2 * q) * psi[m];
                }
                quad += gam * vel[i] * vel[j];
            }
        double coupling = 0;
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t l = 0; l < 3; ++l)
                coupling += pi_at(pi, l, i, k) * vel[i] * psidot[l];
        acc[k] = -quad + 2 * coupling;
    }
    return acc;
}

std::array<double, 3> fiber_acc_expanded(const double* pi, const double* dpi,
                                         const double* riem, const double* vel,
                                         const double* psi, const double* psidot) {
    double xdd[3];
    for (std::size_t i = 0; i < 3; ++i) {
        double s = 0;
        for (std::size_t p = 0; p < 3; ++p)
            for (std::size_t q = 0; q < 3; ++q)
                s += pi_at(pi, i, p, q) * vel[p] * vel[q];
        xdd[i] = -s;
    }

    std::array<double, 3> acc{};
    for (std::size_t k = 0; k < 3; ++k) {
        double s = 0;
        for (std::size_t m = 0; m < 3; ++m)
            for (std::size_t i = 0; i < 3; ++i) {
                for (std::size_t j = 0; j < 3; ++j)
                    s += dpi_at(dpi, m, i, k, j) * vel[j] * vel[i] * psi[m];
                s += pi_at(pi, m, i, k) * xdd[i] * psi[m];
                s += 2 * pi_at(pi, m, i, k) * vel[i] * psidot[m];
                for (std::size_t j = 0; j < 3; ++j)
                    for (std::size_t r = 0; r < 3; ++r)
                        s -= pi_at(pi, m, i, k) * pi_at(pi, r, j, m) * vel[i] * vel[j] *
                             psi[r];
            }
        for (std::size_t l = 0; l < 3; ++l)
            for (std::size_t j = 0; j < 3; ++j)
                for (std::size_t i = 0; i < 3; ++i)
                    s -= riem_at(riem, l, j, k, i) * vel[j] * vel[i] * psi[l];
        acc[k] = s;
    }
    return acc;
}

void psi_matrices_kernel(const double* pi, const double* dpi, const double* riem,
                         const double* vel, double* A, double* B) {
    double piv[3];  // pi(i,p,q) xdot^p xdot^q
    for (std::size_t i = 0; i < 3; ++i) {
        double s = 0;
        for (std::size_t p = 0; p < 3; ++p)
            for (std::size_t q = 0; q < 3; ++q)
                s += pi_at(pi, i, p, q) * vel[p] * vel[q];
        piv[i] = s;
    }
    for (std::size_t k = 0; k < 3; ++k)
        for (std::size_t l = 0; l < 3; ++l) {
            double a = 0, b = 0;
            for (std::size_t i = 0; i < 3; ++i) {
                a += pi_at(pi, l, i, k) * vel[i];
                b += pi_at(pi, l, i, k) * piv[i];
                for (std::size_t j = 0; j < 3; ++j) {
                    b -= dpi_at(dpi, l, i, k, j) * vel[j] * vel[i];
                    b += riem_at(riem, l, j, k, i) * vel[j] * vel[i];
                    for (std::size_t m = 0; m < 3; ++m)
                        b += pi_at(pi, m, i, k) * pi_at(pi, l, j, m) * vel[i] * vel[j];
                }
            }
            A[k * 3 + l] = -2 * a;
            B[k * 3 + l] = b;
        }
}

void psi_matrices_at(const Connection3& c, const CurvatureTensor3& r,
                     std::array<double, 3> pos, std::array<double, 3> vel,
                     double* A, double* B,
                     const std::map<std::string, double>& params) {
    const auto& tab = c.table();
    auto vals = assemble_point(tab, pos, params);
    if (std::abs(c.delta.evaluate(vals)) < 1e-300)
        throw SingularPointError("transport matrices undefined: Delta vanishes");
    std::size_t ci[3] = {tab->index_of("x"), tab->index_of("y"), tab->index_of("z")};
    auto dpi = connection_gradient(c.coeffs, ci);

    double pv[27], dv[81], rv[81];
    for (std::size_t i = 0; i < 27; ++i) pv[i] = c.coeffs[i].evaluate(vals);
    for (std::size_t i = 0; i < 81; ++i) dv[i] = dpi[i].evaluate(vals);
    for (std::size_t i = 0; i < 81; ++i) rv[i] = r.comps[i].evaluate(vals);
    psi_matrices_kernel(pv, dv, rv, vel.data(), A, B);
}

JacobiSystem psi_system_matrices(const Connection3& c, const CurvatureTensor3& r,
                                 const Trajectory& traj,
                                 const std::map<std::string, double>& params) {
    const auto& tab = c.table();
    std::size_t ci[3] = {tab->index_of("x"), tab->index_of("y"), tab->index_of("z")};
    auto dpi = connection_gradient(c.coeffs, ci);

    JacobiSystem out;
    out.s = traj.s;
    out.A.reserve(traj.size());
    out.B.reserve(traj.size());
    for (std::size_t n = 0; n < traj.size(); ++n) {
        const auto& st = traj.states[n];
        if (st.size() < 6)
            throw DomainError("transport matrices need (position, velocity) states");
        std::array<double, 3> pos{st[0], st[1], st[2]};
        auto vals = assemble_point(tab, pos, params);
        if (std::abs(c.delta.evaluate(vals)) < 1e-300)
            throw SingularPointError("transport matrices undefined: Delta vanishes");

        double pv[27], dv[81], rv[81];
        for (std::size_t i = 0; i < 27; ++i) pv[i] = c.coeffs[i].evaluate(vals);
        for (std::size_t i = 0; i < 81; ++i) dv[i] = dpi[i].evaluate(vals);
        for (std::size_t i = 0; i < 81; ++i) rv[i] = r.comps[i].evaluate(vals);

        std::array<double, 9> A{}, B{};
        psi_matrices_kernel(pv, dv, rv, &st[3], A.data(), B.data());
        out.A.push_back(A);
        out.B.push_back(B);
    }
    return out;
}

InvariantE invariant_E(const JacobiSystem& sys) {
    std::size_t n = sys.s.size();
    if (n < 3)
        throw DomainError("derivative of A needs at least three samples");
    if (sys.A.size() != n || sys.B.size() != n)
        throw DomainError("matrix series lengths disagree with the grid");

    InvariantE out;
    out.s = sys.s;
    out.E.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        // Three-point Lagrange stencil: centered inside, shifted at the ends.
        std::size_t i1 = i == 0 ? 1 : (i == n - 1 ? n - 2 : i);
        std::size_t i0 = i1 - 1, i2 = i1 + 1;
        double t = sys.s[i], t0 = sys.s[i0], t1 = sys.s[i1], t2 = sys.s[i2];
        double w0 = (2 * t - t1 - t2) / ((t0 - t1) * (t0 - t2));
        double w1 = (2 * t - t0 - t2) / ((t1 - t0) * (t1 - t2));
        double w2 = (2 * t - t0 - t1) / ((t2 - t0) * (t2 - t1));

        std::array<double, 9> E{};
        const auto &A = sys.A[i], &B = sys.B[i];
        for (std::size_t r = 0; r < 3; ++r)
            for (std::size_t c = 0; c < 3; ++c) {
                std::size_t e = r * 3 + c;
                double aprime = w0 * sys.A[i0][e] + w1 * sys.A[i1][e] + w2 * sys.A[i2][e];
                double asq = 0;
                for (std::size_t m = 0; m < 3; ++m)
                    asq += A[r * 3 + m] * A[m * 3 + c];
                E[e] = B[e] - aprime / 2 - asq / 4;
            }
        out.E.push_back(E);
    }
    return out;
}

} // namespace nonholo
