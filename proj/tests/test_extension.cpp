#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nonholo/errors.hpp"
#include "nonholo/extension.hpp"
#include "nonholo/parser.hpp"

#include <cmath>
#include <random>

using namespace nonholo;

namespace {

const std::map<std::string, mpq_class> kLorenzExact{
    {"sigma", 10}, {"r", 28}, {"b", mpq_class(8, 3)}};
// Pinning substitutes the values but keeps the symbols declared, so point
// assembly still wants numbers for them (which no expression reads anymore).
const std::map<std::string, double> kLorenzVals{
    {"sigma", 10.0}, {"r", 28.0}, {"b", 8.0 / 3.0}};

VectorField3 constant_field() {
    auto tab = make_table_xyz();
    return {parse_expr("1", tab), parse_expr("2", tab), parse_expr("3", tab)};
}

// Evaluates the 27 connection coefficients, their 81 coordinate derivatives,
// and the 81 curvature components at one base point.
struct EvalPack {
    std::vector<RationalExpr> dpi;  // [((l*3+i)*3+k)*3+j] = d_j pi(l,i,k)
    const Connection3& c;
    CurvatureTensor3 r;

    explicit EvalPack(const Connection3& conn) : c(conn), r(curvature_tensor(conn)) {
        auto tab = conn.table();
        std::size_t ci[3] = {tab->index_of("x"), tab->index_of("y"),
                             tab->index_of("z")};
        dpi.reserve(81);
        for (std::size_t l = 0; l < 3; ++l)
            for (std::size_t i = 0; i < 3; ++i)
                for (std::size_t k = 0; k < 3; ++k)
                    for (std::size_t j = 0; j < 3; ++j)
                        dpi.push_back(conn.pi(l, i, k).differentiate(ci[j]));
    }

    void at(const std::vector<double>& vals, double* pv, double* dv, double* rv) const {
        for (std::size_t i = 0; i < 27; ++i) pv[i] = c.coeffs[i].evaluate(vals);
        for (std::size_t i = 0; i < 81; ++i) dv[i] = dpi[i].evaluate(vals);
        for (std::size_t i = 0; i < 81; ++i) rv[i] = r.comps[i].evaluate(vals);
    }
};

// Solves the 6x6 system M x = rhs by Gaussian elimination with partial
// pivoting; used to invert the evaluated metric without its closed form.
std::array<double, 6> solve6(std::array<std::array<double, 6>, 6> M,
                             std::array<double, 6> rhs) {
    for (std::size_t col = 0; col < 6; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < 6; ++r)
            if (std::abs(M[r][col]) > std::abs(M[piv][col])) piv = r;
        std::swap(M[col], M[piv]);
        std::swap(rhs[col], rhs[piv]);
        for (std::size_t r = 0; r < 6; ++r) {
            if (r == col) continue;
            double f = M[r][col] / M[col][col];
            for (std::size_t cc = col; cc < 6; ++cc) M[r][cc] -= f * M[col][cc];
            rhs[r] -= f * rhs[col];
        }
    }
    std::array<double, 6> x{};
    for (std::size_t i = 0; i < 6; ++i) x[i] = rhs[i] / M[i][i];
    return x;
}

bool close_rel(double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

} // namespace

TEST_CASE("flat base lifts to the constant block metric") {
    auto m = build_extension(build_connection(constant_field()));
    auto one = RationalExpr::constant(m.table6, 1);
    for (std::size_t a = 0; a < 6; ++a)
        for (std::size_t b = 0; b < 6; ++b) {
            bool identity = (a < 3 && b == a + 3) || (b < 3 && a == b + 3);
            if (identity)
                CHECK(m.at(a, b).equals(one));
            else
                CHECK(m.at(a, b).is_zero());
        }
    CHECK(metric_determinant(m).equals(RationalExpr::constant(m.table6, -1)));

    auto fiber = fiber_christoffel(m);
    for (const auto& e : fiber)
        CHECK(e.is_zero());

    const std::array<double, 6> pos{0.3, -1.2, 2.0, 0.5, -0.7, 0.1};
    const std::array<double, 6> vel{1.0, 2.0, -1.0, 0.4, 0.0, -0.9};
    auto acc = extended_geodesic_rhs(m, fiber, pos, vel);
    for (double a : acc)
        CHECK(a == 0.0);
}

TEST_CASE("base block is the connection contracted with the fiber point") {
    auto m = build_extension(build_connection(catalog("lorenz")));

    CHECK(m.table6->index_of("psi1") == 3);
    CHECK(m.table6->index_of("psi2") == 4);
    CHECK(m.table6->index_of("psi3") == 5);
    CHECK(m.table6->find("sigma").has_value());

    auto one = RationalExpr::constant(m.table6, 1);
    for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t b = 0; b < 3; ++b) {
            CHECK(m.at(a, b).equals(m.at(b, a)));
            CHECK(m.at(a, b + 3).equals(a == b ? one : RationalExpr::constant(m.table6, 0)));
            CHECK(m.at(a + 3, b + 3).is_zero());
        }

    // Pinned parameters, point (1,2,1), psi = (1,0,0): the xx entry is
    // -2 * P * P_x / Delta = -2 * 10 * (-10) / (6529/9) = 1800/6529.
    auto mp = build_extension(build_connection(catalog("lorenz", kLorenzExact)));
    const std::array<double, 6> pt{1.0, 2.0, 1.0, 1.0, 0.0, 0.0};
    auto vals = assemble_point(mp.table6, pt, kLorenzVals);
    CHECK(mp.at(0, 0).evaluate(vals) == doctest::Approx(1800.0 / 6529.0).epsilon(1e-14));

    // Relabeling kept the base coefficients intact: pi(1,0,0) at (1,1,1).
    const std::array<double, 6> unit{1.0, 1.0, 1.0, 0.0, 0.0, 0.0};
    auto uvals = assemble_point(mp.table6, unit, kLorenzVals);
    CHECK(mp.pi6[(1 * 3 + 0) * 3 + 0].evaluate(uvals) ==
          doctest::Approx(-2340.0 / 6109.0).epsilon(1e-14));
}

TEST_CASE("determinant is -1 for every catalog entry") {
    for (const auto& entry : catalog_entries()) {
        auto m = build_extension(build_connection(catalog(entry.name)));
        auto det = metric_determinant(m);
        CHECK_MESSAGE(det.equals(RationalExpr::constant(m.table6, -1)), entry.name);
    }
}

TEST_CASE("inverse blocks multiply back to the identity") {
    for (const char* name : {"lorenz", "triple_product"}) {
        auto m = build_extension(build_connection(catalog(name)));
        auto inv = metric_inverse(m);
        auto one = RationalExpr::constant(m.table6, 1);
        for (std::size_t a = 0; a < 6; ++a)
            for (std::size_t b = 0; b < 6; ++b) {
                auto sum = RationalExpr::constant(m.table6, 0);
                for (std::size_t c = 0; c < 6; ++c)
                    sum = sum + m.at(a, c) * inv[c * 6 + b];
                CHECK(sum.equals(a == b ? one : RationalExpr::constant(m.table6, 0)));
            }
    }
}

TEST_CASE("fiber Christoffel block is linear in the fiber point") {
    auto m = build_extension(build_connection(catalog("lorenz", kLorenzExact)));
    auto fiber = fiber_christoffel(m);

    const std::array<double, 6> p1{1.1, 0.7, -0.4, 0.3, -0.8, 0.5};
    std::array<double, 6> p2 = p1;
    for (std::size_t i = 3; i < 6; ++i) p2[i] *= 2.0;
    auto v1 = assemble_point(m.table6, p1, kLorenzVals);
    auto v2 = assemble_point(m.table6, p2, kLorenzVals);
    for (const auto& e : fiber)
        CHECK(e.evaluate(v2) == doctest::Approx(2.0 * e.evaluate(v1)).epsilon(1e-12));
}

TEST_CASE("extension rejects tables already carrying fiber symbols") {
    auto tab = make_table_xyz({"psi1"});
    VectorField3 f{parse_expr("x + psi1", tab), parse_expr("y", tab),
                   parse_expr("1", tab)};
    auto c = build_connection(f);
    CHECK_THROWS_AS(build_extension(c), DomainError);
}

TEST_CASE("extended acceleration: base half matches the 3-space geodesic") {
    auto c = build_connection(catalog("lorenz", kLorenzExact));
    auto m = build_extension(c);
    auto fiber = fiber_christoffel(m);

    std::mt19937 rng(911);
    std::uniform_real_distribution<double> coord(0.6, 1.4), comp(-1.0, 1.0);
    for (int n = 0; n < 100; ++n) {
        std::array<double, 6> pos{coord(rng), coord(rng), coord(rng),
                                  comp(rng), comp(rng), comp(rng)};
        std::array<double, 6> vel{comp(rng), comp(rng), comp(rng),
                                  comp(rng), comp(rng), comp(rng)};
        auto acc = extended_geodesic_rhs(m, fiber, pos, vel, kLorenzVals);
        auto base = geodesic_rhs(c, {pos[0], pos[1], pos[2]},
                                 {vel[0], vel[1], vel[2]}, kLorenzVals);
        for (std::size_t i = 0; i < 3; ++i)
            CHECK(close_rel(acc[i], base[i], 1e-12));
    }
}

TEST_CASE("fiber half agrees with the expanded transport law") {
    auto c = build_connection(catalog("lorenz", kLorenzExact));
    auto m = build_extension(c);
    auto fiber = fiber_christoffel(m);
    EvalPack pack(c);

    std::mt19937 rng(912);
    std::uniform_real_distribution<double> coord(0.6, 1.4), comp(-1.0, 1.0);
    for (int n = 0; n < 100; ++n) {
        std::array<double, 6> pos{coord(rng), coord(rng), coord(rng),
                                  comp(rng), comp(rng), comp(rng)};
        std::array<double, 6> vel{comp(rng), comp(rng), comp(rng),
                                  comp(rng), comp(rng), comp(rng)};
        auto acc = extended_geodesic_rhs(m, fiber, pos, vel, kLorenzVals);

        std::array<double, 3> base{pos[0], pos[1], pos[2]};
        auto vals = assemble_point(c.table(), base, kLorenzVals);
        double pv[27], dv[81], rv[81];
        pack.at(vals, pv, dv, rv);

        auto expanded = fiber_acc_expanded(pv, dv, rv, vel.data(), &pos[3], &vel[3]);
        auto blocks = fiber_acc_from_blocks(pv, dv, vel.data(), &pos[3], &vel[3]);
        for (std::size_t k = 0; k < 3; ++k) {
            CHECK(close_rel(acc[3 + k], expanded[k], 1e-9));
            CHECK(close_rel(acc[3 + k], blocks[k], 1e-9));
        }
    }
}

TEST_CASE("accelerations follow from the metric") {
    // Finite differences of the raw metric entries, a numerically inverted
    // metric, and the Christoffel definition; no closed-form blocks anywhere.
    auto m = build_extension(build_connection(catalog("lorenz", kLorenzExact)));
    auto fiber = fiber_christoffel(m);

    std::mt19937 rng(913);
    std::uniform_real_distribution<double> coord(0.7, 1.3), comp(-1.0, 1.0);
    const double h = 1e-5;
    for (int n = 0; n < 5; ++n) {
        std::array<double, 6> pos{coord(rng), coord(rng), coord(rng),
                                  comp(rng), comp(rng), comp(rng)};
        std::array<double, 6> vel{comp(rng), comp(rng), comp(rng),
                                  comp(rng), comp(rng), comp(rng)};

        double dg[6][6][6];  // dg[b][d][c] = d_b g_dc
        for (std::size_t b = 0; b < 6; ++b) {
            auto hi = pos, lo = pos;
            hi[b] += h;
            lo[b] -= h;
            auto vh = assemble_point(m.table6, hi, kLorenzVals);
            auto vl = assemble_point(m.table6, lo, kLorenzVals);
            for (std::size_t d = 0; d < 6; ++d)
                for (std::size_t cc = 0; cc < 6; ++cc)
                    dg[b][d][cc] =
                        (m.at(d, cc).evaluate(vh) - m.at(d, cc).evaluate(vl)) / (2 * h);
        }

        auto vals = assemble_point(m.table6, pos, kLorenzVals);
        std::array<std::array<double, 6>, 6> gval{};
        for (std::size_t a = 0; a < 6; ++a)
            for (std::size_t b = 0; b < 6; ++b)
                gval[a][b] = m.at(a, b).evaluate(vals);

        std::array<double, 6> acc_fd{};
        for (std::size_t b = 0; b < 6; ++b)
            for (std::size_t cc = 0; cc < 6; ++cc) {
                std::array<double, 6> rhs{};
                for (std::size_t d = 0; d < 6; ++d)
                    rhs[d] = 0.5 * (dg[b][d][cc] + dg[cc][b][d] - dg[d][b][cc]);
                auto gamma = solve6(gval, rhs);  // Gamma^a_{bc} over a
                for (std::size_t a = 0; a < 6; ++a)
                    acc_fd[a] -= gamma[a] * vel[b] * vel[cc];
            }

        auto acc = extended_geodesic_rhs(m, fiber, pos, vel, kLorenzVals);
        for (std::size_t a = 0; a < 6; ++a)
            CHECK(close_rel(acc[a], acc_fd[a], 1e-5));
    }
}

TEST_CASE("transport matrices vanish on a flat field") {
    auto c = build_connection(constant_field());
    auto r = curvature_tensor(c);
    double A[9], B[9];
    psi_matrices_at(c, r, {0.4, -1.0, 2.5}, {1.0, -2.0, 0.5}, A, B);
    for (int i = 0; i < 9; ++i) {
        CHECK(A[i] == 0.0);
        CHECK(B[i] == 0.0);
    }
}

TEST_CASE("matrix form agrees with the expanded law") {
    auto c = build_connection(catalog("lorenz", kLorenzExact));
    auto r = curvature_tensor(c);
    EvalPack pack(c);

    std::mt19937 rng(914);
    std::uniform_real_distribution<double> coord(0.6, 1.4), comp(-1.0, 1.0);

    Trajectory fake;
    std::vector<std::array<double, 6>> psis;
    for (int n = 0; n < 50; ++n) {
        fake.s.push_back(n * 0.1);
        fake.states.push_back({coord(rng), coord(rng), coord(rng),
                               comp(rng), comp(rng), comp(rng)});
        psis.push_back({comp(rng), comp(rng), comp(rng),
                        comp(rng), comp(rng), comp(rng)});
    }

    auto sys = psi_system_matrices(c, r, fake, kLorenzVals);
    REQUIRE(sys.s.size() == 50);
    for (std::size_t n = 0; n < 50; ++n) {
        const auto& st = fake.states[n];
        std::array<double, 3> pos{st[0], st[1], st[2]};
        auto vals = assemble_point(c.table(), pos, kLorenzVals);
        double pv[27], dv[81], rv[81];
        pack.at(vals, pv, dv, rv);

        const double* psi = psis[n].data();
        const double* psidot = psis[n].data() + 3;
        auto expanded = fiber_acc_expanded(pv, dv, rv, &st[3], psi, psidot);

        for (std::size_t k = 0; k < 3; ++k) {
            double lhs = 0;
            for (std::size_t l = 0; l < 3; ++l)
                lhs -= sys.A[n][k * 3 + l] * psidot[l] + sys.B[n][k * 3 + l] * psi[l];
            CHECK(close_rel(lhs, expanded[k], 1e-10));
        }
    }
}

TEST_CASE("invariant E: vanishing A reduces to B") {
    JacobiSystem sys;
    std::mt19937 rng(915);
    std::uniform_real_distribution<double> comp(-2.0, 2.0);
    for (int n = 0; n < 7; ++n) {
        sys.s.push_back(0.25 * n);
        sys.A.push_back({});
        std::array<double, 9> B{};
        for (auto& b : B) b = comp(rng);
        sys.B.push_back(B);
    }
    auto inv = invariant_E(sys);
    REQUIRE(inv.s.size() == 7);
    for (std::size_t n = 0; n < 7; ++n)
        for (int e = 0; e < 9; ++e)
            CHECK(inv.E[n][e] == sys.B[n][e]);
}

TEST_CASE("invariant E: constant A has no derivative term") {
    std::array<double, 9> A{1.0, -0.5, 2.0, 0.0, 3.0, -1.0, 0.5, 0.25, -2.0};
    std::array<double, 9> Asq{};
    for (std::size_t r = 0; r < 3; ++r)
        for (std::size_t c = 0; c < 3; ++c)
            for (std::size_t m = 0; m < 3; ++m)
                Asq[r * 3 + c] += A[r * 3 + m] * A[m * 3 + c];

    JacobiSystem sys;
    for (int n = 0; n < 5; ++n) {
        sys.s.push_back(0.3 * n);
        sys.A.push_back(A);
        sys.B.push_back({});
    }
    auto inv = invariant_E(sys);
    for (std::size_t n = 0; n < 5; ++n)
        for (int e = 0; e < 9; ++e)
            CHECK(inv.E[n][e] == doctest::Approx(-Asq[e] / 4.0).epsilon(1e-12));
}

TEST_CASE("invariant E: linear A is differentiated exactly on uneven grids") {
    std::array<double, 9> A0{0.3, 1.0, -2.0, 0.7, 0.0, 1.5, -0.4, 2.0, 0.9};
    std::array<double, 9> A1{1.2, -0.8, 0.5, 0.0, 2.0, -1.0, 0.6, 0.1, -0.3};
    std::vector<double> grid{0.0, 0.1, 0.25, 0.45, 0.5};

    JacobiSystem sys;
    for (double t : grid) {
        sys.s.push_back(t);
        std::array<double, 9> A{}, B{};
        for (int e = 0; e < 9; ++e) {
            A[e] = A0[e] + t * A1[e];
            B[e] = 0.5 * e - t;  // arbitrary but varying
        }
        sys.A.push_back(A);
        sys.B.push_back(B);
    }

    auto inv = invariant_E(sys);
    for (std::size_t n = 0; n < grid.size(); ++n) {
        double t = grid[n];
        std::array<double, 9> A{}, Asq{};
        for (int e = 0; e < 9; ++e) A[e] = A0[e] + t * A1[e];
        for (std::size_t r = 0; r < 3; ++r)
            for (std::size_t c = 0; c < 3; ++c)
                for (std::size_t m = 0; m < 3; ++m)
                    Asq[r * 3 + c] += A[r * 3 + m] * A[m * 3 + c];
        for (int e = 0; e < 9; ++e) {
            double expect = sys.B[n][e] - A1[e] / 2.0 - Asq[e] / 4.0;
            CHECK(inv.E[n][e] == doctest::Approx(expect).epsilon(1e-11));
        }
    }
}

TEST_CASE("invariant E input validation") {
    JacobiSystem sys;
    sys.s = {0.0, 0.1};
    sys.A = {{}, {}};
    sys.B = {{}, {}};
    CHECK_THROWS_AS(invariant_E(sys), DomainError);

    sys.s = {0.0, 0.1, 0.2};
    CHECK_THROWS_AS(invariant_E(sys), DomainError);  // A, B still length 2
}

TEST_CASE("transport matrices reject understuffed states") {
    auto c = build_connection(catalog("lorenz", kLorenzExact));
    auto r = curvature_tensor(c);
    Trajectory fake;
    fake.s = {0.0};
    fake.states = {{1.0, 1.0, 1.0}};  // position only
    CHECK_THROWS_AS(psi_system_matrices(c, r, fake), DomainError);
}
