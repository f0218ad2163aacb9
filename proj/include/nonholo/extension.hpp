#pragma once

#include "nonholo/geometry.hpp"
#include "nonholo/trajectory.hpp"

namespace nonholo {

// The 6-space carrying the lifted geometry: base coordinates x, y, z plus
// fiber coordinates psi1, psi2, psi3, with the metric in block form
//
//   g = [ C  I ]        C_ij = -2 * sum_k pi(k,i,j) * psi_k,
//       [ I  0 ]
//
// so the base block is the connection contracted with the fiber point and the
// off-diagonal blocks are identities.  det g = -1 identically (the C block
// never survives the expansion), and the inverse is [[0, I], [I, -C]].
struct ExtendedMetric6 {
    SymbolTablePtr table6;            // coords x,y,z,psi1,psi2,psi3 + base params
    Connection3 base;                 // over the original 3-coordinate table
    std::vector<RationalExpr> pi6;    // base connection relabeled onto table6
    std::vector<RationalExpr> g;      // 36, row-major, symmetric

    const RationalExpr& at(std::size_t a, std::size_t b) const {
        return g[a * 6 + b];
    }
};

// Lifts a base connection; throws DomainError if the base table already
// declares one of psi1, psi2, psi3.
ExtendedMetric6 build_extension(const Connection3& c);

// Laplace expansion with zero pruning; reduces to the constant -1 here.
RationalExpr metric_determinant(const ExtendedMetric6& m);

// Closed block form [[0, I], [I, -C]]; 36 entries, row-major.
std::vector<RationalExpr> metric_inverse(const ExtendedMetric6& m);

// Fiber Christoffel data of the lifted metric.  The base block of the 6-space
// connection is pi itself, the mixed block Gam^{3+k}_{i,3+l} = -pi(l,i,k), the
// fiber-fiber block vanishes, and the remaining block is linear in psi:
//
//   Gam^{3+k}_{ij} = sum_m [ -(d_i pi(m,k,j) + d_j pi(m,i,k) - d_k pi(m,i,j))
//                            + 2 sum_l pi(m,k,l) pi(l,i,j) ] * psi_m.
//
// Returned as 27 expressions over table6, layout [k][i][j], symmetric in (i,j).
std::vector<RationalExpr> fiber_christoffel(const ExtendedMetric6& m);

// Geodesic acceleration of the lifted metric at one 6-space state.  The base
// half is the ordinary autoparallel acceleration; the fiber half couples to
// psi and psidot through the blocks above:
//
//   psiddot_k = -sum_ij Gam^{3+k}_{ij} xdot^i xdot^j
//               + 2 sum_{i,l} pi(l,i,k) xdot^i psidot_l.
//
// `fiber` is the result of fiber_christoffel(m), passed in so repeated calls
// do not rebuild it.  Throws SingularPointError when Delta vanishes.
std::array<double, 6> extended_geodesic_rhs(const ExtendedMetric6& m,
                                            const std::vector<RationalExpr>& fiber,
                                            std::array<double, 6> pos,
                                            std::array<double, 6> vel,
                                            const std::map<std::string, double>& params = {});

// ---- evaluation kernels -------------------------------------------------
//
// The transport laws below are plain index arithmetic once pi, its gradient,
// and the curvature are numbers.  The kernels take those numeric arrays so
// the spot-check path (symbolic evaluation) and the integrator path (compiled
// expressions) share one implementation of the contractions.
//
// Array layouts match the symbolic accessors:
//   pi  [(i*3+j)*3+k]           = pi(i,j,k)
//   dpi [((l*3+i)*3+k)*3+j]     = d_j pi(l,i,k)
//   riem[((l*3+k)*3+j)*3+i]     = riem(l,k,j,i)

// Fiber acceleration via the Christoffel blocks (psi enters through
// Gam^{3+k}_{ij}); the closed-form route used by the 6-space integrator.
std::array<double, 3> fiber_acc_from_blocks(const double* pi, const double* dpi,
                                            const double* vel, const double* psi,
                                            const double* psidot);

// The same acceleration via the direct expansion of the transport law, with
// the base acceleration xddot^i = -pi(i,p,q) xdot^p xdot^q substituted:
//
//   psiddot_k = (d_j pi(m,i,k)) xdot^j xdot^i psi_m + pi(m,i,k) xddot^i psi_m
//               + 2 pi(m,i,k) xdot^i psidot_m
//               - pi(m,i,k) pi(r,j,m) xdot^i xdot^j psi_r
//               - riem(l,j,k,i) xdot^j xdot^i psi_l.
//
// Algebraically equal to fiber_acc_from_blocks; kept as the independent
// arrangement the tests compare against.
std::array<double, 3> fiber_acc_expanded(const double* pi, const double* dpi,
                                         const double* riem, const double* vel,
                                         const double* psi, const double* psidot);

// Coefficient matrices of the transport law written as
// psiddot + A psidot + B psi = 0 (row-major 3x3, row = equation index k):
//
//   A_kl = -2 pi(l,i,k) xdot^i
//   B_kl = -(d_j pi(l,i,k)) xdot^j xdot^i + pi(l,i,k) pi(i,p,q) xdot^p xdot^q
//          + pi(m,i,k) pi(l,j,m) xdot^i xdot^j + riem(l,j,k,i) xdot^j xdot^i.
void psi_matrices_kernel(const double* pi, const double* dpi, const double* riem,
                         const double* vel, double* A, double* B);

// A and B evaluated at one base state (position + velocity), by symbolic
// evaluation of the connection and curvature.
void psi_matrices_at(const Connection3& c, const CurvatureTensor3& r,
                     std::array<double, 3> pos, std::array<double, 3> vel,
                     double* A, double* B,
                     const std::map<std::string, double>& params = {});

// A(s), B(s) sampled along a base trajectory whose states are
// (x, y, z, xdot, ydot, zdot).
struct JacobiSystem {
    std::vector<double> s;
    std::vector<std::array<double, 9>> A, B;  // row-major 3x3 per sample
};

JacobiSystem psi_system_matrices(const Connection3& c, const CurvatureTensor3& r,
                                 const Trajectory& traj,
                                 const std::map<std::string, double>& params = {});

// E = B - A'/2 - A^2/4, the coefficient left after removing the first-order
// term from the transport law.  A' uses three-point differences (centered in
// the interior, one-sided at the ends), so the grid need not be uniform.
// Throws DomainError for fewer than three samples.
struct InvariantE {
    std::vector<double> s;
    std::vector<std::array<double, 9>> E;
};

InvariantE invariant_E(const JacobiSystem& sys);

} // namespace nonholo
