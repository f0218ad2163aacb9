#pragma once

#include "nonholo/field.hpp"

#include <array>

namespace nonholo {

// The torsion-free affine connection a constraint field induces on 3-space:
//
//   pi(i,j,k) = N_i * S_jk / Delta,   S_jk = (d_j N_k + d_k N_j) / 2,
//   Delta = P^2 + Q^2 + R^2,
//
// with N = (P,Q,R).  Because every coefficient is N_i times the same
// symmetric form, the three "rows" are proportional with ratios P : Q : R,
// and every denominator is exactly Delta.
struct Connection3 {
    RationalExpr delta;
    std::vector<RationalExpr> coeffs;  // 27 = [i][j][k] row-major, symmetric in (j,k)

    const RationalExpr& pi(std::size_t i, std::size_t j, std::size_t k) const {
        return coeffs[(i * 3 + j) * 3 + k];
    }
    const SymbolTablePtr& table() const { return delta.table(); }
};

// riem(l,k,j,i) = d_j pi(l,i,k) - d_i pi(l,j,k)
//              + sum_m [ pi(l,j,m) pi(m,i,k) - pi(l,i,m) pi(m,j,k) ],
// antisymmetric in (j,i) by construction.  The first lower slot (j) is the
// differentiated one; ricci contracts the upper index against it.
struct CurvatureTensor3 {
    std::vector<RationalExpr> comps;  // 81 = [l][k][j][i] row-major

    const RationalExpr& riem(std::size_t l, std::size_t k, std::size_t j,
                             std::size_t i) const {
        return comps[((l * 3 + k) * 3 + j) * 3 + i];
    }
};

// 3x3 matrix of expressions, row-major.
struct ExprMat3 {
    std::vector<RationalExpr> entries;  // 9

    const RationalExpr& at(std::size_t r, std::size_t c) const {
        return entries[r * 3 + c];
    }
};

// A direction condition split into its two layers: the tangency constraint
// linear in (xdot, ydot, zdot) and a quadratic form on those directions.
struct DirectionForm {
    std::vector<RationalExpr> linear;     // 3: coefficients of xdot, ydot, zdot
    std::vector<RationalExpr> quadratic;  // 9, row-major, symmetric

    const RationalExpr& quad(std::size_t i, std::size_t j) const {
        return quadratic[i * 3 + j];
    }
};

// Builds the 18 distinct coefficients; throws DomainError when Delta is the
// zero expression (only possible for an identically zero field).
Connection3 build_connection(const VectorField3& f);

// Acceleration of the connection's autoparallel curves at one state:
// xddot^i = -sum pi(i,j,k) xdot^j xdot^k.  Throws SingularPointError when
// Delta vanishes at the point.
std::array<double, 3> geodesic_rhs(const Connection3& c,
                                   std::array<double, 3> pos,
                                   std::array<double, 3> vel,
                                   const std::map<std::string, double>& params = {});

// The same acceleration computed without the connection: the normal's chain
// rule derivative contracted with the velocity,
//   xddot = -N * (dN/ds . xdot) / Delta,  dN_k/ds = sum_j d_j N_k xdot^j.
// Kept as an independent formulation; the two must agree to rounding.
std::array<double, 3> geodesic_rhs_direct(const VectorField3& f,
                                          std::array<double, 3> pos,
                                          std::array<double, 3> vel,
                                          const std::map<std::string, double>& params = {});

CurvatureTensor3 curvature_tensor(const Connection3& c);

// ricci(k,i) = sum_l riem(l,k,l,i).
ExprMat3 ricci(const CurvatureTensor3& t);
ExprMat3 ricci(const Connection3& c);

// Tangency layer (P,Q,R) plus the symmetrized-Jacobian quadratic layer; a
// direction at a point is asymptotic when both vanish on it.
DirectionForm asymptotic_form(const VectorField3& f);

// Expansion of det [ 2*S*d | N | d ] with d = (dx,dy,dz): a quadratic form in
// the differentials whose zero set picks out the curvature-line directions.
// The result lives on a copy of the field's table extended by parameter
// symbols dx, dy, dz.
RationalExpr curvature_line_form(const VectorField3& f);

enum class DerivMode { partial, covariant };

// eps^{ijk} ( pi(p,i,q) D_j pi(q,k,p) + (2/3) pi(p,i,q) pi(q,j,r) pi(r,k,p) )
// with eps the plain permutation symbol.  D_j is the bare partial in
// mode=partial; in mode=covariant it is the full connection derivative of a
// (1,2)-valence object.  For rank-one connections the two agree: every
// correction term cancels under the eps contraction.
RationalExpr chern_simons_density(const Connection3& c, DerivMode mode);

// Known closed-form density for the convection-roll field, as a quotient
// L / (2 M^2) of fixed polynomials; `table` must declare x, y, z and the
// parameters sigma, r, b.
RationalExpr lorenz_cs_reference(const SymbolTablePtr& table);

} // namespace nonholo
