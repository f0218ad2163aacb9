#pragma once

#include "nonholo/extension.hpp"

#include <iosfwd>

namespace nonholo {

// Integral curves of dx/ds = P, dy/ds = Q, dz/ds = R.  States are (x,y,z).
Trajectory integrate_flow(const VectorField3& f, std::array<double, 3> init,
                          const IntegratorConfig& cfg,
                          const std::map<std::string, double>& params = {});

// Autoparallel curves of the connection, states (x,y,z,xdot,ydot,zdot), with
// the monitor "pfaff_contraction" = P xdot + Q ydot + R zdot recorded at
// every sample (an initial zero stays zero along exact solutions).  The
// singularity guard is relative: integration stops with singular_point when
// |Delta| falls under 1e-12 times the largest magnitude it has reached on
// this curve (or 1, whichever is bigger).
Trajectory integrate_geodesic(const Connection3& c, const VectorField3& f,
                              std::array<double, 3> pos, std::array<double, 3> vel,
                              const IntegratorConfig& cfg,
                              const std::map<std::string, double>& params = {});

// One root of the direction system at a point: unit vector in the constraint
// plane on which the quadratic layer vanishes.
struct AsymptoticDirection {
    std::array<double, 3> direction;
    int branch = 0;  // 0 or 1, the order the roots are returned in
    double discriminant = 0.0;
};

struct DirectionSet {
    std::vector<AsymptoticDirection> directions;  // 0, 1, or 2 entries
    bool all_directions = false;  // quadratic layer vanishes identically here
    double discriminant = 0.0;
};

// Solves both layers at a point: parametrize the plane {u : N.u = 0} by an
// orthonormal basis (e1,e2), restrict the quadratic form S to alpha e1 +
// beta e2 giving q = a alpha^2 + 2b alpha beta + c beta^2, and return its real
// projective roots; discriminant = b^2 - ac.  A discriminant within
// 1e-10 * max(|a|,|b|,|c|)^2 of zero counts as a double root (one entry), so
// fields whose restricted form is a perfect square everywhere report their
// single family stably instead of flickering between zero and two roots on
// roundoff.  Directions are unit vectors with the largest-magnitude component
// positive.  Throws SingularPointError when the field vanishes at the point
// (no constraint plane).
DirectionSet asymptotic_directions(const VectorField3& f, std::array<double, 3> point,
                                   const std::map<std::string, double>& params = {});

// Unit-speed continuation of the direction field: each stage re-solves the
// candidate roots and follows the one with the largest dot product against
// the direction the step started with; the carried direction is refreshed
// after every step.  States are (x,y,z,ux,uy,uz) and the monitor
// "discriminant" records b^2 - ac.  Stops with branch_loss when no real root
// exists, or when the branches collide into a double root that no longer
// tracks the carried direction (best alignment under cos 60 degrees) -- a
// merged root that stays aligned is a continuous selection and is followed.
// The continuation always uses the fixed-step scheme with cfg.step.  The
// initial direction is snapped to the nearest root at the starting point.
Trajectory integrate_asymptotic(const VectorField3& f, std::array<double, 3> point,
                                std::array<double, 3> direction,
                                const IntegratorConfig& cfg,
                                const std::map<std::string, double>& params = {});

Trajectory integrate_asymptotic(const VectorField3& f, std::array<double, 3> point,
                                const AsymptoticDirection& dir,
                                const IntegratorConfig& cfg,
                                const std::map<std::string, double>& params = {});

// Geodesics of the lifted 6-space metric.  States are
// (x,y,z,psi1,psi2,psi3, xdot,ydot,zdot,psi1dot,psi2dot,psi3dot); the monitor
// "metric_norm" records g(xdot,xdot), a constant of the motion.
Trajectory integrate_extended(const ExtendedMetric6& m, std::array<double, 6> pos,
                              std::array<double, 6> vel, const IntegratorConfig& cfg,
                              const std::map<std::string, double>& params = {});

// The fiber transport integrated directly from its two written forms: the
// expanded law (fiber_acc_expanded) or the matrix form psiddot = -A psidot
// - B psi (psi_matrices_kernel), in both cases riding on the base geodesic.
// base_init = (position, velocity), psi_init = (psi, psidot); the state
// layout matches integrate_extended so trajectories compare componentwise.
enum class TransportForm { expanded, matrices };

Trajectory integrate_psi_transport(const Connection3& c, const CurvatureTensor3& r,
                                   TransportForm form, std::array<double, 6> base_init,
                                   std::array<double, 6> psi_init,
                                   const IntegratorConfig& cfg,
                                   const std::map<std::string, double>& params = {});

// Header row (s, state columns, monitor columns), one data row per sample,
// and a trailing "# termination: ..." comment line.
void write_trajectory_csv(std::ostream& os, const Trajectory& t);

} // namespace nonholo
