#pragma once

#include "nonholo/rational.hpp"

#include <array>
#include <map>
#include <span>
#include <vector>

namespace nonholo {

// A triple of rational expressions over one symbol table.  The same datum
// serves as a flow field (dx/ds = P, ...) and as the coefficient vector of
// the constraint P dx + Q dy + R dz = 0.
struct VectorField3 {
    RationalExpr P, Q, R;

    const SymbolTablePtr& table() const { return P.table(); }

    const RationalExpr& component(std::size_t i) const {
        switch (i) {
        case 0: return P;
        case 1: return Q;
        default: return R;
        }
    }
};

// (R_y - Q_z, P_z - R_x, Q_x - P_y).  This pairing is the one sign convention
// used throughout; the integrability residuals below are its companions.
VectorField3 curl(const VectorField3& f);

// P*(curl f)_1 + Q*(curl f)_2 + R*(curl f)_3; identically zero exactly when
// the constraint admits integral surfaces.
RationalExpr holonomicity(const VectorField3& f);

// (P_y - Q_x, Q_z - R_y, R_x - P_z); all three vanish iff the form is closed.
std::array<RationalExpr, 3> exactness_residuals(const VectorField3& f);

struct PlaneEquation {
    std::array<double, 3> normal;  // field value at the base point
    std::array<double, 3> point;
};

// Builds the full evaluation vector for `table`: coordinate slots from
// `coords` (in coordinate order), parameter slots from `params`.  Throws
// DomainError when a parameter is missing or unknown.
std::vector<double> assemble_point(const SymbolTablePtr& table,
                                   std::span<const double> coords,
                                   const std::map<std::string, double>& params);

// Plane through `pt` with normal (P,Q,R)(pt); throws SingularPointError when
// all three components vanish there.
PlaneEquation tangent_plane(const VectorField3& f, std::array<double, 3> pt,
                            const std::map<std::string, double>& params = {});

// x*P + y*Q + z*R; identically zero for every projectively extended planar
// system (the structural radial-degeneracy check).
RationalExpr euler_contraction(const VectorField3& f);

// A planar polynomial system dx/ds = p(x,y), dy/ds = q(x,y); p and q must not
// involve z (nor any further coordinate).
struct PlanarPolySystem {
    PlanarPolySystem(Polynomial p, Polynomial q);
    Polynomial p, q;
    std::uint64_t degree() const;  // max degree of p, q in the coordinates
};

// Embeds the planar system into 3-space: with Ptil, Qtil the degree-d
// homogenizations of p, q in z (d = max degree), the result is
//   ( -z*Qtil,  z*Ptil,  x*Qtil - y*Ptil ),
// whose integral surfaces are cones over plane solution curves.
VectorField3 projective_extension(const PlanarPolySystem& s);

// Named systems with symbolic parameters; `params` may pin any subset of
// them to exact rationals (unknown names are rejected).
VectorField3 catalog(const std::string& name,
                     const std::map<std::string, mpq_class>& params = {});

struct CatalogEntry {
    std::string name;
    std::vector<std::string> param_names;
    std::string description;
};
const std::vector<CatalogEntry>& catalog_entries();

} // namespace nonholo
