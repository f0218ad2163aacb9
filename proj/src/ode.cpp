#include "nonholo/ode.hpp"

#include "nonholo/compiled.hpp"
#include "nonholo/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <ostream>

namespace nonholo {

namespace {

using RhsFn = std::function<void(const double*, double*)>;
using MonitorFn = std::function<double(const double*)>;
// Called after every accepted step; may adjust the committed state (the
// direction continuation refreshes its carried direction here).
using PostStepFn = std::function<void(std::vector<double>&)>;

struct NamedMonitor {
    std::string name;
    MonitorFn fn;
};

// Internal signal: the tracked direction branch ceased to exist.
struct BranchLossSignal {};

void validate(const IntegratorConfig& cfg) {
    if (!(cfg.s_end > 0))
        throw DomainError("s_end must be positive");
    if (cfg.max_steps < 1)
        throw DomainError("max_steps must be at least 1");
    if (!(cfg.step > 0))
        throw DomainError("step must be positive");
    if (cfg.method == IntegratorConfig::Method::rkf45 &&
        (!(cfg.rel_tol > 0) || !(cfg.abs_tol > 0)))
        throw DomainError("tolerances must be positive");
}

void rk4_step(const RhsFn& rhs, const std::vector<double>& y, double h,
              std::vector<double>& out, std::vector<double>& k1,
              std::vector<double>& k2, std::vector<double>& k3,
              std::vector<double>& k4, std::vector<double>& tmp) {
    const std::size_t n = y.size();
    rhs(y.data(), k1.data());
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
    rhs(tmp.data(), k2.data());
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
    rhs(tmp.data(), k3.data());
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * k3[i];
    rhs(tmp.data(), k4.data());
    for (std::size_t i = 0; i < n; ++i)
        out[i] = y[i] + h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
}

// Classical Fehlberg 4(5) tableau.  Nodes 0, 1/4, 3/8, 12/13, 1, 1/2; the
// fifth-order weights (16/135, 0, 6656/12825, 28561/56430, -9/50, 2/55) give
// the propagated solution, the fourth-order ones (25/216, 0, 1408/2565,
// 2197/4104, -1/5, 0) only the error estimate.
double rkf45_step(const RhsFn& rhs, const std::vector<double>& y, double h,
                  std::vector<double>& out, double rel_tol, double abs_tol,
                  std::vector<std::vector<double>>& k, std::vector<double>& tmp) {
    const std::size_t n = y.size();
    static constexpr double a21 = 1.0 / 4;
    static constexpr double a31 = 3.0 / 32, a32 = 9.0 / 32;
    static constexpr double a41 = 1932.0 / 2197, a42 = -7200.0 / 2197,
                            a43 = 7296.0 / 2197;
    static constexpr double a51 = 439.0 / 216, a52 = -8.0, a53 = 3680.0 / 513,
                            a54 = -845.0 / 4104;
    static constexpr double a61 = -8.0 / 27, a62 = 2.0, a63 = -3544.0 / 2565,
                            a64 = 1859.0 / 4104, a65 = -11.0 / 40;
    static constexpr double b51 = 16.0 / 135, b53 = 6656.0 / 12825,
                            b54 = 28561.0 / 56430, b55 = -9.0 / 50, b56 = 2.0 / 55;
    static constexpr double b41 = 25.0 / 216, b43 = 1408.0 / 2565,
                            b44 = 2197.0 / 4104, b45 = -1.0 / 5;

    rhs(y.data(), k[0].data());
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * a21 * k[0][i];
    rhs(tmp.data(), k[1].data());
    for (std::size_t i = 0; i < n; ++i)
        tmp[i] = y[i] + h * (a31 * k[0][i] + a32 * k[1][i]);
    rhs(tmp.data(), k[2].data());
    for (std::size_t i = 0; i < n; ++i)
        tmp[i] = y[i] + h * (a41 * k[0][i] + a42 * k[1][i] + a43 * k[2][i]);
    rhs(tmp.data(), k[3].data());
    for (std::size_t i = 0; i < n; ++i)
        tmp[i] = y[i] +
                 h * (a51 * k[0][i] + a52 * k[1][i] + a53 * k[2][i] + a54 * k[3][i]);
    rhs(tmp.data(), k[4].data());
    for (std::size_t i = 0; i < n; ++i)
        tmp[i] = y[i] + h * (a61 * k[0][i] + a62 * k[1][i] + a63 * k[2][i] +
                             a64 * k[3][i] + a65 * k[4][i]);
    rhs(tmp.data(), k[5].data());

    double ratio = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double y5 = y[i] + h * (b51 * k[0][i] + b53 * k[2][i] + b54 * k[3][i] +
                                b55 * k[4][i] + b56 * k[5][i]);
        double y4 = y[i] + h * (b41 * k[0][i] + b43 * k[2][i] + b44 * k[3][i] +
                                b45 * k[4][i]);
        out[i] = y5;
        double scale = abs_tol + rel_tol * std::max(std::abs(y[i]), std::abs(y5));
        ratio = std::max(ratio, std::abs(y5 - y4) / scale);
    }
    return ratio;
}

Trajectory run_ode(std::vector<double> y, const IntegratorConfig& cfg,
                   const RhsFn& rhs, const std::vector<NamedMonitor>& monitors,
                   std::vector<std::string> state_names,
                   const PostStepFn& post_step = {}) {
    validate(cfg);
    const std::size_t dim = y.size();

    Trajectory out;
    out.state_names = std::move(state_names);
    out.monitor_values.resize(monitors.size());
    for (const auto& m : monitors) out.monitor_names.push_back(m.name);

    // Monitor values are computed before anything is pushed, so a throwing
    // monitor never leaves ragged series behind.
    auto record = [&](double s, const std::vector<double>& st) {
        std::vector<double> mv(monitors.size());
        for (std::size_t i = 0; i < monitors.size(); ++i) mv[i] = monitors[i].fn(st.data());
        out.s.push_back(s);
        out.states.push_back(st);
        for (std::size_t i = 0; i < monitors.size(); ++i)
            out.monitor_values[i].push_back(mv[i]);
    };

    record(0.0, y);  // throws here = precondition failure at the initial point

    const bool adaptive = cfg.method == IntegratorConfig::Method::rkf45;
    const double floor_h = 1e-14 * std::max(1.0, cfg.s_end);
    const double end_eps = 1e-12 * cfg.s_end;

    std::vector<double> k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim), ynew(dim);
    std::vector<std::vector<double>> kk(6, std::vector<double>(dim));

    double s = 0.0;
    double h = cfg.step;
    std::size_t steps = 0;
    std::size_t next_target = 1;
    auto target_s = [&](std::size_t j) {
        return cfg.s_end * static_cast<double>(j) / static_cast<double>(cfg.samples);
    };

    Termination term = Termination::completed;
    try {
        while (s < cfg.s_end - end_eps) {
            if (steps >= cfg.max_steps) {
                term = Termination::step_limit;
                break;
            }
            double stop = cfg.samples ? target_s(next_target) : cfg.s_end;
            double htry = std::min(adaptive ? h : cfg.step, stop - s);

            bool accepted = true;
            if (adaptive) {
                double ratio =
                    rkf45_step(rhs, y, htry, ynew, cfg.rel_tol, cfg.abs_tol, kk, tmp);
                double factor = ratio > 0
                                    ? std::clamp(0.9 * std::pow(ratio, -0.2), 0.2, 5.0)
                                    : 5.0;
                accepted = ratio <= 1.0;
                h = htry * factor;
                if (!accepted && h < floor_h)
                    throw SingularPointError("step size underflow: local error will not settle");
            } else {
                rk4_step(rhs, y, htry, ynew, k1, k2, k3, k4, tmp);
            }
            ++steps;
            if (!accepted) continue;

            bool finite = true;
            for (double v : ynew)
                if (!std::isfinite(v)) finite = false;
            if (!finite) {
                term = Termination::singular_point;
                break;
            }

            s += htry;
            y = ynew;
            if (post_step) post_step(y);

            if (cfg.samples) {
                if (s >= stop - end_eps) {
                    s = stop;
                    record(s, y);
                    ++next_target;
                }
            } else {
                record(s, y);
            }
        }
    } catch (const SingularPointError&) {
        term = Termination::singular_point;
    } catch (const BranchLossSignal&) {
        term = Termination::branch_loss;
    }

    // On early termination keep the last good state so callers see where the
    // run stopped; skipped silently if the monitors cannot be evaluated there.
    if (term != Termination::completed && !out.s.empty() && s > out.s.back() + 1e-300) {
        try {
            record(s, y);
        } catch (...) {
        }
    }
    out.termination = term;
    return out;
}

// Relative singularity guard: Delta is compared against the largest scale it
// has reached along this curve, so the threshold tracks the field's own size.
struct DeltaGuard {
    double peak = 1.0;
    void check(double delta) {
        double mag = std::abs(delta);
        peak = std::max(peak, mag);
        if (mag < 1e-12 * peak)
            throw SingularPointError("Delta vanished along the curve");
    }
};

void coord_indices(const SymbolTablePtr& tab, std::size_t ci[3]) {
    ci[0] = tab->index_of("x");
    ci[1] = tab->index_of("y");
    ci[2] = tab->index_of("z");
}

} // namespace

Trajectory integrate_flow(const VectorField3& f, std::array<double, 3> init,
                          const IntegratorConfig& cfg,
                          const std::map<std::string, double>& params) {
    auto tab = f.table();
    std::size_t ci[3];
    coord_indices(tab, ci);
    auto vals = assemble_point(tab, init, params);
    CompiledExpr comp[3] = {CompiledExpr(f.P), CompiledExpr(f.Q), CompiledExpr(f.R)};

    auto rhs = [&, vals](const double* y, double* dy) mutable {
        for (std::size_t i = 0; i < 3; ++i) vals[ci[i]] = y[i];
        for (std::size_t i = 0; i < 3; ++i) dy[i] = comp[i].eval(vals.data());
    };
    return run_ode({init[0], init[1], init[2]}, cfg, rhs, {}, {"x", "y", "z"});
}

Trajectory integrate_geodesic(const Connection3& c, const VectorField3& f,
                              std::array<double, 3> pos, std::array<double, 3> vel,
                              const IntegratorConfig& cfg,
                              const std::map<std::string, double>& params) {
    auto tab = c.table();
    if (!tab->compatible(*f.table()))
        throw DomainError("connection and field disagree on their symbols");
    std::size_t ci[3];
    coord_indices(tab, ci);
    auto vals = assemble_point(tab, pos, params);

    std::vector<CompiledExpr> pi;
    pi.reserve(27);
    for (const auto& e : c.coeffs) pi.emplace_back(e);
    CompiledExpr delta(c.delta);
    CompiledExpr comp[3] = {CompiledExpr(f.P), CompiledExpr(f.Q), CompiledExpr(f.R)};

    DeltaGuard guard;
    guard.check(delta.eval(vals.data()));  // a singular start throws, it is not a trajectory outcome
    auto rhs = [&, vals](const double* y, double* dy) mutable {
        for (std::size_t i = 0; i < 3; ++i) vals[ci[i]] = y[i];
        guard.check(delta.eval(vals.data()));
        double pv[27];
        for (std::size_t i = 0; i < 27; ++i) pv[i] = pi[i].eval(vals.data());
        for (std::size_t i = 0; i < 3; ++i) {
            dy[i] = y[3 + i];
            double sum = 0;
            for (std::size_t j = 0; j < 3; ++j)
                for (std::size_t kk = 0; kk < 3; ++kk)
                    sum += pv[(i * 3 + j) * 3 + kk] * y[3 + j] * y[3 + kk];
            dy[3 + i] = -sum;
        }
    };
    auto contraction = [&, vals](const double* y) mutable {
        for (std::size_t i = 0; i < 3; ++i) vals[ci[i]] = y[i];
        double sum = 0;
        for (std::size_t i = 0; i < 3; ++i) sum += comp[i].eval(vals.data()) * y[3 + i];
        return sum;
    };

    return run_ode({pos[0], pos[1], pos[2], vel[0], vel[1], vel[2]}, cfg, rhs,
                   {{"pfaff_contraction", contraction}},
                   {"x", "y", "z", "xdot", "ydot", "zdot"});
}

namespace {

// Roots of the restricted quadratic at one point, from the numeric field
// value n and symmetrized Jacobian S (row-major).  `guard` is consulted so
// continuation applies its running scale; the public entry point uses a
// fresh guard (pointwise check only).
DirectionSet directions_from(const double n[3], const double S[9], DeltaGuard& guard) {
    DirectionSet set;
    double delta = n[0] * n[0] + n[1] * n[1] + n[2] * n[2];
    guard.check(delta);

    // Orthonormal basis of the constraint plane, seeded from the axis least
    // aligned with n.
    std::size_t least = 0;
    for (std::size_t i = 1; i < 3; ++i)
        if (std::abs(n[i]) < std::abs(n[least])) least = i;
    double axis[3] = {0, 0, 0};
    axis[least] = 1.0;
    double e1[3] = {axis[1] * n[2] - axis[2] * n[1], axis[2] * n[0] - axis[0] * n[2],
                    axis[0] * n[1] - axis[1] * n[0]};
    double norm1 = std::sqrt(e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]);
    for (double& v : e1) v /= norm1;
    double e2[3] = {n[1] * e1[2] - n[2] * e1[1], n[2] * e1[0] - n[0] * e1[2],
                    n[0] * e1[1] - n[1] * e1[0]};
    double norm2 = std::sqrt(e2[0] * e2[0] + e2[1] * e2[1] + e2[2] * e2[2]);
    for (double& v : e2) v /= norm2;

    auto form = [&](const double* u, const double* v) {
        double sum = 0;
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j) sum += u[i] * S[i * 3 + j] * v[j];
        return sum;
    };
    double a = form(e1, e1), b = form(e1, e2), cc = form(e2, e2);

    double smag = 0;
    for (std::size_t i = 0; i < 9; ++i) smag = std::max(smag, std::abs(S[i]));
    if (smag == 0 ||
        std::max({std::abs(a), std::abs(b), std::abs(cc)}) <= 1e-12 * smag) {
        set.all_directions = true;
        return set;
    }

    set.discriminant = b * b - a * cc;

    // Classify against a tangency window that scales with the form itself:
    // a parabolic (double-root) form evaluates to discriminant zero only up
    // to roundoff, and the sign of that noise must not flip the root count.
    double coeff_scale = std::max({std::abs(a), std::abs(b), std::abs(cc)});
    double window = 1e-10 * coeff_scale * coeff_scale;
    if (set.discriminant < -window) return set;  // elliptic: no real roots

    // Projective roots (alpha, beta) of a alpha^2 + 2b alpha beta + c beta^2,
    // solved in whichever affine chart has the larger leading coefficient.
    std::vector<std::array<double, 2>> roots;
    if (std::abs(set.discriminant) <= window) {
        // Double root.  Here max(|a|,|c|) >= |b| up to the window, so the
        // chosen chart is well conditioned.
        if (std::abs(a) >= std::abs(cc))
            roots.push_back({-b / a, 1.0});
        else
            roots.push_back({1.0, -b / cc});
    } else if (a == 0 && cc == 0) {
        roots = {{1.0, 0.0}, {0.0, 1.0}};
    } else if (std::abs(a) >= std::abs(cc)) {
        double sq = std::sqrt(set.discriminant);
        roots.push_back({(-b + sq) / a, 1.0});
        roots.push_back({(-b - sq) / a, 1.0});
    } else {
        double sq = std::sqrt(set.discriminant);
        roots.push_back({1.0, (-b + sq) / cc});
        roots.push_back({1.0, (-b - sq) / cc});
    }

    int branch = 0;
    for (const auto& ab : roots) {
        std::array<double, 3> u{};
        for (std::size_t i = 0; i < 3; ++i) u[i] = ab[0] * e1[i] + ab[1] * e2[i];
        double norm = std::sqrt(u[0] * u[0] + u[1] * u[1] + u[2] * u[2]);
        for (double& v : u) v /= norm;
        std::size_t big = 0;
        for (std::size_t i = 1; i < 3; ++i)
            if (std::abs(u[i]) > std::abs(u[big])) big = i;
        if (u[big] < 0)
            for (double& v : u) v = -v;
        set.directions.push_back({u, branch++, set.discriminant});
    }
    return set;
}

// Compiled evaluator for the two layers at arbitrary points.
struct DirectionSolver {
    std::vector<double> vals;
    std::size_t ci[3];
    CompiledExpr comp[3];
    std::vector<CompiledExpr> S;  // 9 entries, row-major
    DeltaGuard guard;

    DirectionSolver(const VectorField3& f, std::array<double, 3> point,
                    const std::map<std::string, double>& params) {
        auto tab = f.table();
        coord_indices(tab, ci);
        vals = assemble_point(tab, point, params);
        for (std::size_t i = 0; i < 3; ++i) comp[i] = CompiledExpr(f.component(i));
        auto df = asymptotic_form(f);
        S.reserve(9);
        for (const auto& e : df.quadratic) S.emplace_back(e);
    }

    DirectionSet at(const double* pos) {
        for (std::size_t i = 0; i < 3; ++i) vals[ci[i]] = pos[i];
        double n[3], sv[9];
        for (std::size_t i = 0; i < 3; ++i) n[i] = comp[i].eval(vals.data());
        for (std::size_t i = 0; i < 9; ++i) sv[i] = S[i].eval(vals.data());
        return directions_from(n, sv, guard);
    }
};

} // namespace

DirectionSet asymptotic_directions(const VectorField3& f, std::array<double, 3> point,
                                   const std::map<std::string, double>& params) {
    DirectionSolver solver(f, point, params);
    return solver.at(point.data());
}

Trajectory integrate_asymptotic(const VectorField3& f, std::array<double, 3> point,
                                std::array<double, 3> direction,
                                const IntegratorConfig& cfg,
                                const std::map<std::string, double>& params) {
    double dn = std::sqrt(direction[0] * direction[0] + direction[1] * direction[1] +
                          direction[2] * direction[2]);
    if (!(dn > 0))
        throw DomainError("initial direction must be nonzero");
    for (double& v : direction) v /= dn;

    auto solver = std::make_shared<DirectionSolver>(f, point, params);

    auto select = [solver](const double* pos, const double* ref) {
        auto set = solver->at(pos);
        if (set.all_directions)
            return std::array<double, 3>{ref[0], ref[1], ref[2]};
        if (set.directions.empty())
            throw BranchLossSignal{};
        double best = -1.0;
        std::array<double, 3> pick{};
        for (const auto& d : set.directions) {
            double dot = d.direction[0] * ref[0] + d.direction[1] * ref[1] +
                         d.direction[2] * ref[2];
            if (std::abs(dot) > best) {
                best = std::abs(dot);
                pick = d.direction;
                if (dot < 0)
                    for (double& v : pick) v = -v;
            }
        }
        // A collision that merges the two branches is still continuable while
        // the merged root tracks the carried direction (parabolic fields live
        // on such roots permanently); losing alignment means the selection
        // stopped being continuous.
        if (best < 0.5)
            throw BranchLossSignal{};
        return pick;
    };

    // Snap the hint to the nearest root before starting.
    std::array<double, 3> u0;
    try {
        u0 = select(point.data(), direction.data());
    } catch (const BranchLossSignal&) {
        throw DomainError("no continuable direction at the initial point");
    }

    // State: position plus the carried direction.  The direction components
    // have zero derivative, so every stage of a step selects against the
    // direction the step started with; post_step then refreshes it.
    auto rhs = [select](const double* y, double* dy) {
        auto d = select(y, y + 3);
        for (std::size_t i = 0; i < 3; ++i) {
            dy[i] = d[i];
            dy[3 + i] = 0.0;
        }
    };
    auto post = [select](std::vector<double>& y) {
        auto d = select(y.data(), y.data() + 3);
        for (std::size_t i = 0; i < 3; ++i) y[3 + i] = d[i];
    };
    auto disc_monitor = [solver](const double* y) {
        return solver->at(y).discriminant;
    };

    auto cfg_fixed = cfg;
    cfg_fixed.method = IntegratorConfig::Method::rk4;
    return run_ode({point[0], point[1], point[2], u0[0], u0[1], u0[2]}, cfg_fixed, rhs,
                   {{"discriminant", disc_monitor}}, {"x", "y", "z", "ux", "uy", "uz"},
                   post);
}

Trajectory integrate_asymptotic(const VectorField3& f, std::array<double, 3> point,
                                const AsymptoticDirection& dir,
                                const IntegratorConfig& cfg,
                                const std::map<std::string, double>& params) {
    return integrate_asymptotic(f, point, dir.direction, cfg, params);
}

Trajectory integrate_extended(const ExtendedMetric6& m, std::array<double, 6> pos,
                              std::array<double, 6> vel, const IntegratorConfig& cfg,
                              const std::map<std::string, double>& params) {
    const auto& c = m.base;
    auto tab = c.table();
    std::size_t ci[3];
    coord_indices(tab, ci);
    std::array<double, 3> base{pos[0], pos[1], pos[2]};
    auto vals = assemble_point(tab, base, params);

    std::vector<CompiledExpr> pi, dpi;
    pi.reserve(27);
    dpi.reserve(81);
    for (const auto& e : c.coeffs) pi.emplace_back(e);
    for (std::size_t l = 0; l < 3; ++l)
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t kk = 0; kk < 3; ++kk)
                for (std::size_t j = 0; j < 3; ++j)
                    dpi.emplace_back(c.pi(l, i, kk).differentiate(ci[j]));
    CompiledExpr delta(c.delta);

    DeltaGuard guard;
    guard.check(delta.eval(vals.data()));  // reject a singular start up front
    // State layout: (x, psi, xdot, psidot), each a 3-block.
    auto rhs = [&, vals](const double* y, double* dy) mutable {
        for (std::size_t i = 0; i < 3; ++i) vals[ci[i]] = y[i];
        guard.check(delta.eval(vals.data()));
        double pv[27], dv[81];
        for (std::size_t i = 0; i < 27; ++i) pv[i] = pi[i].eval(vals.data());
        for (std::size_t i = 0; i < 81; ++i) dv[i] = dpi[i].eval(vals.data());

        const double* v = y + 6;
        const double* psi = y + 3;
        const double* psidot = y + 9;
        for (std::size_t i = 0; i < 3; ++i) {
            dy[i] = v[i];
            dy[3 + i] = psidot[i];
            double sum = 0;
            for (std::size_t j = 0; j < 3; ++j)
                for (std::size_t kk = 0; kk < 3; ++kk)
                    sum += pv[(i * 3 + j) * 3 + kk] * v[j] * v[kk];
            dy[6 + i] = -sum;
        }
        auto fib = fiber_acc_from_blocks(pv, dv, v, psi, psidot);
        for (std::size_t i = 0; i < 3; ++i) dy[9 + i] = fib[i];
    };
    auto metric_norm = [&, vals](const double* y) mutable {
        for (std::size_t i = 0; i < 3; ++i) vals[ci[i]] = y[i];
        double pv[27];
        for (std::size_t i = 0; i < 27; ++i) pv[i] = pi[i].eval(vals.data());
        const double* v = y + 6;
        const double* psi = y + 3;
        const double* psidot = y + 9;
        double norm = 0;
        for (std::size_t i = 0; i < 3; ++i) {
            norm += 2 * v[i] * psidot[i];
            for (std::size_t j = 0; j < 3; ++j) {
                double cij = 0;
                for (std::size_t kk = 0; kk < 3; ++kk)
                    cij += pv[(kk * 3 + i) * 3 + j] * psi[kk];
                norm += -2 * cij * v[i] * v[j];
            }
        }
        return norm;
    };

    return run_ode({pos[0], pos[1], pos[2], pos[3], pos[4], pos[5], vel[0], vel[1],
                    vel[2], vel[3], vel[4], vel[5]},
                   cfg, rhs, {{"metric_norm", metric_norm}},
                   {"x", "y", "z", "psi1", "psi2", "psi3", "xdot", "ydot", "zdot",
                    "psi1dot", "psi2dot", "psi3dot"});
}

Trajectory integrate_psi_transport(const Connection3& c, const CurvatureTensor3& r,
                                   TransportForm form, std::array<double, 6> base_init,
                                   std::array<double, 6> psi_init,
                                   const IntegratorConfig& cfg,
                                   const std::map<std::string, double>& params) {
    auto tab = c.table();
    std::size_t ci[3];
    coord_indices(tab, ci);
    std::array<double, 3> base{base_init[0], base_init[1], base_init[2]};
    auto vals = assemble_point(tab, base, params);

    std::vector<CompiledExpr> pi, dpi, riem;
    pi.reserve(27);
    dpi.reserve(81);
    riem.reserve(81);
    for (const auto& e : c.coeffs) pi.emplace_back(e);
    for (std::size_t l = 0; l < 3; ++l)
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t kk = 0; kk < 3; ++kk)
                for (std::size_t j = 0; j < 3; ++j)
                    dpi.emplace_back(c.pi(l, i, kk).differentiate(ci[j]));
    for (const auto& e : r.comps) riem.emplace_back(e);
    CompiledExpr delta(c.delta);

    DeltaGuard guard;
    guard.check(delta.eval(vals.data()));  // reject a singular start up front
    auto rhs = [&, vals, form](const double* y, double* dy) mutable {
        for (std::size_t i = 0; i < 3; ++i) vals[ci[i]] = y[i];
        guard.check(delta.eval(vals.data()));
        double pv[27], dv[81], rv[81];
        for (std::size_t i = 0; i < 27; ++i) pv[i] = pi[i].eval(vals.data());
        for (std::size_t i = 0; i < 81; ++i) dv[i] = dpi[i].eval(vals.data());
        for (std::size_t i = 0; i < 81; ++i) rv[i] = riem[i].eval(vals.data());

        const double* v = y + 6;
        const double* psi = y + 3;
        const double* psidot = y + 9;
        for (std::size_t i = 0; i < 3; ++i) {
            dy[i] = v[i];
            dy[3 + i] = psidot[i];
            double sum = 0;
            for (std::size_t j = 0; j < 3; ++j)
                for (std::size_t kk = 0; kk < 3; ++kk)
                    sum += pv[(i * 3 + j) * 3 + kk] * v[j] * v[kk];
            dy[6 + i] = -sum;
        }
        if (form == TransportForm::expanded) {
            auto fib = fiber_acc_expanded(pv, dv, rv, v, psi, psidot);
            for (std::size_t i = 0; i < 3; ++i) dy[9 + i] = fib[i];
        } else {
            double A[9], B[9];
            psi_matrices_kernel(pv, dv, rv, v, A, B);
            for (std::size_t kidx = 0; kidx < 3; ++kidx) {
                double sum = 0;
                for (std::size_t l = 0; l < 3; ++l)
                    sum -= A[kidx * 3 + l] * psidot[l] + B[kidx * 3 + l] * psi[l];
                dy[9 + kidx] = sum;
            }
        }
    };

    return run_ode({base_init[0], base_init[1], base_init[2], psi_init[0], psi_init[1],
                    psi_init[2], base_init[3], base_init[4], base_init[5], psi_init[3],
                    psi_init[4], psi_init[5]},
                   cfg, rhs, {},
                   {"x", "y", "z", "psi1", "psi2", "psi3", "xdot", "ydot", "zdot",
                    "psi1dot", "psi2dot", "psi3dot"});
}

void write_trajectory_csv(std::ostream& os, const Trajectory& t) {
    os << "s";
    std::size_t dim = t.states.empty() ? t.state_names.size() : t.states[0].size();
    for (std::size_t i = 0; i < dim; ++i) {
        if (i < t.state_names.size())
            os << ',' << t.state_names[i];
        else
            os << ",state" << i;
    }
    for (const auto& name : t.monitor_names) os << ',' << name;
    os << '\n';

    os << std::setprecision(17);
    for (std::size_t n = 0; n < t.size(); ++n) {
        os << t.s[n];
        for (double v : t.states[n]) os << ',' << v;
        for (const auto& series : t.monitor_values) os << ',' << series[n];
        os << '\n';
    }
    os << "# termination: " << to_string(t.termination) << '\n';
}

} // namespace nonholo
