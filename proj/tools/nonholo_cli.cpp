// Command-line front end: system loading, symbolic analysis reports,
// trajectory integration to CSV, box quadrature of the density invariant,
// and the built-in identity verification suite.
//
// Exit codes: 0 success, 1 verification failure, 2 usage/IO error,
// 3 numerical singularity.

#include <CLI11.hpp>
#include <json.hpp>

#include "nonholo/compiled.hpp"
#include "nonholo/errors.hpp"
#include "nonholo/extension.hpp"
#include "nonholo/field.hpp"
#include "nonholo/geometry.hpp"
#include "nonholo/ode.hpp"
#include "nonholo/parser.hpp"
#include "nonholo/printer.hpp"
#include "nonholo/verify.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <sstream>
#include <string>

using nlohmann::json;
using namespace nonholo;

namespace {

// ---------------------------------------------------------------------------
// small parsing helpers

mpq_class parse_rational(const std::string& text) {
    try {
        auto slash = text.find('/');
        if (slash == std::string::npos)
            return mpq_class(mpz_class(text));
        mpz_class num(text.substr(0, slash));
        mpz_class den(text.substr(slash + 1));
        if (den == 0)
            throw DomainError("rational with zero denominator: " + text);
        mpq_class q(num, den);
        q.canonicalize();
        return q;
    } catch (const std::invalid_argument&) {
        throw DomainError("not an exact rational: '" + text + "'");
    }
}

std::array<double, 3> parse_triple(const std::string& text, const char* what) {
    std::array<double, 3> out{};
    std::istringstream is(text);
    std::string part;
    for (std::size_t i = 0; i < 3; ++i) {
        if (!std::getline(is, part, ','))
            throw DomainError(std::string(what) + " needs three comma-separated values");
        try {
            out[i] = std::stod(part);
        } catch (const std::exception&) {
            throw DomainError(std::string(what) + ": bad number '" + part + "'");
        }
    }
    if (std::getline(is, part, ','))
        throw DomainError(std::string(what) + " needs exactly three values");
    return out;
}

// ---------------------------------------------------------------------------
// run configuration gathered from flags

struct Options {
    std::string catalog_name;
    std::string system_file;
    std::vector<std::string> params;  // raw k=v strings
    std::string method = "rkf45";
    double step = 1e-3;
    double tol = 1e-10;
    double s_end = 1.0;
    std::size_t samples = 0;
    std::string out_path;
    std::string init, vel, psi, psivel, dir;
    int branch = 0;
    std::string box;
    int grid = 10;
    std::string mode;   // "", "partial", "covariant"
    std::string fault;  // hidden verify seam
};

struct LoadedSystem {
    VectorField3 field;
    std::string label;                        // catalog name or file path
    bool is_lorenz = false;                   // enables the reference report
    std::map<std::string, double> values;     // parameter values for evaluation
};

std::map<std::string, mpq_class> parse_param_flags(const std::vector<std::string>& raw) {
    std::map<std::string, mpq_class> pins;
    for (const auto& kv : raw) {
        auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0)
            throw DomainError("--param expects name=value, got '" + kv + "'");
        pins[kv.substr(0, eq)] = parse_rational(kv.substr(eq + 1));
    }
    return pins;
}

// Parameters mentioned in expression strings but not coordinates: these get
// declared automatically when loading a system file.
std::vector<std::string> scan_parameters(const std::vector<std::string>& texts) {
    static const std::regex ident("[A-Za-z_][A-Za-z_0-9]*");
    std::set<std::string> names;
    for (const auto& t : texts)
        for (auto it = std::sregex_iterator(t.begin(), t.end(), ident);
             it != std::sregex_iterator(); ++it)
            names.insert(it->str());
    names.erase("x");
    names.erase("y");
    names.erase("z");
    return {names.begin(), names.end()};
}

VectorField3 load_field_from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw DomainError("cannot open system file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw DomainError("bad JSON in " + path + ": " + e.what());
    }

    if (j.contains("P") && j.contains("Q") && j.contains("R")) {
        std::vector<std::string> texts{j["P"].get<std::string>(),
                                       j["Q"].get<std::string>(),
                                       j["R"].get<std::string>()};
        auto tab = make_table_xyz(scan_parameters(texts));
        return {parse_expr(texts[0], tab), parse_expr(texts[1], tab),
                parse_expr(texts[2], tab)};
    }
    if (j.contains("p") && j.contains("q")) {
        std::vector<std::string> texts{j["p"].get<std::string>(),
                                       j["q"].get<std::string>()};
        auto tab = make_table_xyz(scan_parameters(texts));
        auto pe = parse_expr(texts[0], tab);
        auto qe = parse_expr(texts[1], tab);
        if (!pe.den_is_one() || !qe.den_is_one())
            throw DomainError("planar system entries must be polynomial");
        return projective_extension(PlanarPolySystem(pe.num(), qe.num()));
    }
    throw DomainError(
        "system file needs either P/Q/R (spatial) or p/q (planar) entries");
}

LoadedSystem load_system(const Options& opt) {
    auto pins = parse_param_flags(opt.params);
    std::map<std::string, double> values;
    for (const auto& [k, v] : pins) values[k] = v.get_d();

    if (!opt.catalog_name.empty() && !opt.system_file.empty())
        throw DomainError("--catalog and --system are mutually exclusive");
    if (!opt.catalog_name.empty())
        return {catalog(opt.catalog_name, pins), opt.catalog_name,
                opt.catalog_name == "lorenz", std::move(values)};
    if (opt.system_file.empty())
        throw DomainError("one of --catalog or --system is required");
    return {load_field_from_file(opt.system_file), opt.system_file, false,
            std::move(values)};
}

IntegratorConfig integrator_config(const Options& opt) {
    IntegratorConfig cfg;
    if (opt.method == "rk4")
        cfg.method = IntegratorConfig::Method::rk4;
    else if (opt.method == "rkf45")
        cfg.method = IntegratorConfig::Method::rkf45;
    else
        throw DomainError("--method must be rk4 or rkf45");
    cfg.step = opt.step;
    cfg.rel_tol = cfg.abs_tol = opt.tol;
    cfg.s_end = opt.s_end;
    cfg.samples = opt.samples;
    return cfg;
}

// Every expression string we emit must re-parse to an equal expression; this
// is the report contract, so it is enforced at emission time.
std::string emitted(const RationalExpr& e) {
    auto text = to_string(e);
    if (!parse_expr(text, e.table()).equals(e))
        throw DomainError("internal: emitted text does not round-trip: " + text);
    return text;
}

struct OutputTarget {
    std::ofstream file;
    std::ostream* stream;

    explicit OutputTarget(const std::string& path) {
        if (path.empty()) {
            stream = &std::cout;
        } else {
            file.open(path);
            if (!file)
                throw DomainError("cannot open output file: " + path);
            stream = &file;
        }
    }
};

void emit_json(const Options& opt, const json& j) {
    OutputTarget out(opt.out_path);
    *out.stream << j.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// subcommands

int cmd_analyze(const Options& opt) {
    auto sys = load_system(opt);
    const auto& f = sys.field;

    auto hol = holonomicity(f);
    auto res = exactness_residuals(f);
    auto euler = euler_contraction(f);
    auto conn = build_connection(f);

    std::size_t nonzero = 0;
    for (const auto& e : conn.coeffs)
        if (!e.is_zero()) ++nonzero;

    json cs;
    try {
        auto density = chern_simons_density(conn, DerivMode::partial);
        cs = {{"available", true}, {"identically_zero", density.is_zero()}};
    } catch (const SymbolicError& e) {
        cs = {{"available", false}, {"reason", e.what()}};
    }

    bool res_zero = res[0].is_zero() && res[1].is_zero() && res[2].is_zero();
    json j{
        {"schema", "nonholo/1"},
        {"command", "analyze"},
        {"system", sys.label},
        {"field",
         {{"P", emitted(f.P)}, {"Q", emitted(f.Q)}, {"R", emitted(f.R)}}},
        {"holonomicity", {{"text", emitted(hol)}, {"is_zero", hol.is_zero()}}},
        {"exactness_residuals",
         {{"texts", {emitted(res[0]), emitted(res[1]), emitted(res[2])}},
          {"all_zero", res_zero}}},
        {"euler_contraction",
         {{"text", emitted(euler)}, {"is_zero", euler.is_zero()}}},
        {"connection",
         {{"delta", emitted(conn.delta)},
          {"nonzero_coefficient_count", nonzero}}},
        {"chern_simons", cs},
    };
    emit_json(opt, j);
    return 0;
}

int emit_trajectory(const Options& opt, const Trajectory& t) {
    OutputTarget out(opt.out_path);
    write_trajectory_csv(*out.stream, t);
    return 0;
}

int cmd_flow(const Options& opt) {
    auto sys = load_system(opt);
    auto t = integrate_flow(sys.field, parse_triple(opt.init, "--init"),
                            integrator_config(opt), sys.values);
    return emit_trajectory(opt, t);
}

int cmd_geodesic(const Options& opt) {
    auto sys = load_system(opt);
    auto c = build_connection(sys.field);
    auto t = integrate_geodesic(c, sys.field, parse_triple(opt.init, "--init"),
                                parse_triple(opt.vel, "--vel"),
                                integrator_config(opt), sys.values);
    return emit_trajectory(opt, t);
}

int cmd_asymptotic(const Options& opt) {
    auto sys = load_system(opt);
    auto init = parse_triple(opt.init, "--init");
    std::array<double, 3> hint;
    if (!opt.dir.empty()) {
        hint = parse_triple(opt.dir, "--dir");
    } else {
        auto set = asymptotic_directions(sys.field, init, sys.values);
        if (set.all_directions)
            throw DomainError(
                "the whole plane is asymptotic here; pick a direction with --dir");
        if (opt.branch < 0 || std::size_t(opt.branch) >= set.directions.size())
            throw DomainError("no asymptotic branch " + std::to_string(opt.branch) +
                              " at the initial point (found " +
                              std::to_string(set.directions.size()) + ")");
        hint = set.directions[std::size_t(opt.branch)].direction;
    }
    auto t = integrate_asymptotic(sys.field, init, hint, integrator_config(opt),
                                  sys.values);
    return emit_trajectory(opt, t);
}

int cmd_extend(const Options& opt) {
    auto sys = load_system(opt);
    auto m = build_extension(build_connection(sys.field));
    auto base = parse_triple(opt.init, "--init");
    auto vel = parse_triple(opt.vel, "--vel");
    std::array<double, 3> psi{}, psivel{};
    if (!opt.psi.empty()) psi = parse_triple(opt.psi, "--psi");
    if (!opt.psivel.empty()) psivel = parse_triple(opt.psivel, "--psivel");
    auto t = integrate_extended(
        m, {base[0], base[1], base[2], psi[0], psi[1], psi[2]},
        {vel[0], vel[1], vel[2], psivel[0], psivel[1], psivel[2]},
        integrator_config(opt), sys.values);
    return emit_trajectory(opt, t);
}

struct Box {
    double lo[3], hi[3];
};

Box parse_box(const std::string& text) {
    Box b{};
    std::istringstream is(text);
    std::string part;
    double vals[6];
    for (std::size_t i = 0; i < 6; ++i) {
        if (!std::getline(is, part, ','))
            throw DomainError("--box needs x0,x1,y0,y1,z0,z1");
        vals[i] = std::stod(part);
    }
    for (std::size_t a = 0; a < 3; ++a) {
        b.lo[a] = vals[2 * a];
        b.hi[a] = vals[2 * a + 1];
        if (!(b.hi[a] > b.lo[a]))
            throw DomainError("--box sides must have positive length");
    }
    return b;
}

int cmd_chern_simons(const Options& opt) {
    auto sys = load_system(opt);
    if (opt.box.empty())
        throw DomainError("chern-simons needs --box x0,x1,y0,y1,z0,z1");
    Box box = parse_box(opt.box);
    if (opt.grid < 1)
        throw DomainError("--grid must be at least 1");
    bool want_partial = opt.mode.empty() || opt.mode == "partial";
    bool want_covariant = opt.mode.empty() || opt.mode == "covariant";
    if (!want_partial && !want_covariant)
        throw DomainError("--mode must be partial or covariant");

    auto conn = build_connection(sys.field);
    auto tab = sys.field.table();
    std::map<DerivMode, RationalExpr> density;
    if (want_partial)
        density.emplace(DerivMode::partial,
                        chern_simons_density(conn, DerivMode::partial));
    if (want_covariant)
        density.emplace(DerivMode::covariant,
                        chern_simons_density(conn, DerivMode::covariant));

    CompiledExpr delta_c(conn.delta);
    std::map<DerivMode, CompiledExpr> compiled;
    for (const auto& [mode, e] : density) compiled.emplace(mode, CompiledExpr(e));

    std::size_t ci[3] = {tab->index_of("x"), tab->index_of("y"), tab->index_of("z")};
    std::array<double, 3> corner{box.lo[0], box.lo[1], box.lo[2]};
    auto vals = assemble_point(tab, corner, sys.values);

    // The box must stay clear of the singular locus.  Sample Delta and the
    // densities on the (n+1)^3 lattice spanning the box (endpoints included,
    // so a zero at a corner or at the center of a symmetric box is seen); a
    // Delta dropping 12 orders below the box maximum, or any denominator
    // blowing up at a sample, counts as touching the locus.
    {
        double delta_min = std::numeric_limits<double>::infinity();
        double delta_max = 0;
        int n = opt.grid;
        for (int ix = 0; ix <= n; ++ix)
            for (int iy = 0; iy <= n; ++iy)
                for (int iz = 0; iz <= n; ++iz) {
                    vals[ci[0]] = box.lo[0] + ix * (box.hi[0] - box.lo[0]) / n;
                    vals[ci[1]] = box.lo[1] + iy * (box.hi[1] - box.lo[1]) / n;
                    vals[ci[2]] = box.lo[2] + iz * (box.hi[2] - box.lo[2]) / n;
                    double d = std::abs(delta_c.eval(vals.data()));
                    delta_min = std::min(delta_min, d);
                    delta_max = std::max(delta_max, d);
                    for (const auto& [mode, e] : compiled) e.eval(vals.data());
                }
        if (delta_min < 1e-12 * std::max(delta_max, 1.0))
            throw SingularPointError(
                "box touches the singular locus (Delta ~ 0 on the sample lattice)");
    }

    // Midpoint rule on an n^3 grid, with the same locus watch on the
    // quadrature nodes themselves.
    auto quadrature = [&](int n, std::map<DerivMode, double>& sums,
                          double* mode_gap, double* lorenz_dev_p,
                          double* lorenz_dev_c) {
        double h[3], cell = 1.0;
        for (std::size_t a = 0; a < 3; ++a) {
            h[a] = (box.hi[a] - box.lo[a]) / n;
            cell *= h[a];
        }
        std::optional<CompiledExpr> reference;
        if (sys.is_lorenz && (lorenz_dev_p || lorenz_dev_c))
            reference.emplace(lorenz_cs_reference(tab));

        double delta_min = std::numeric_limits<double>::infinity();
        double delta_max = 0;
        for (auto& [mode, s] : sums) s = 0;
        for (int ix = 0; ix < n; ++ix)
            for (int iy = 0; iy < n; ++iy)
                for (int iz = 0; iz < n; ++iz) {
                    vals[ci[0]] = box.lo[0] + (ix + 0.5) * h[0];
                    vals[ci[1]] = box.lo[1] + (iy + 0.5) * h[1];
                    vals[ci[2]] = box.lo[2] + (iz + 0.5) * h[2];
                    double d = std::abs(delta_c.eval(vals.data()));
                    delta_min = std::min(delta_min, d);
                    delta_max = std::max(delta_max, d);

                    double per_mode[2] = {0, 0};
                    std::size_t slot = 0;
                    for (auto& [mode, s] : sums) {
                        double v = compiled.at(mode).eval(vals.data());
                        s += v * cell;
                        per_mode[slot++] = v;
                    }
                    if (mode_gap && sums.size() == 2)
                        *mode_gap = std::max(*mode_gap,
                                             std::abs(per_mode[0] - per_mode[1]));
                    if (reference) {
                        double ref = reference->eval(vals.data());
                        double scale = std::max(std::abs(ref), 1e-300);
                        slot = 0;
                        for (auto& [mode, s] : sums) {
                            double dev = std::abs(per_mode[slot++] - ref) / scale;
                            if (mode == DerivMode::partial && lorenz_dev_p)
                                *lorenz_dev_p = std::max(*lorenz_dev_p, dev);
                            if (mode == DerivMode::covariant && lorenz_dev_c)
                                *lorenz_dev_c = std::max(*lorenz_dev_c, dev);
                        }
                    }
                }
        if (delta_min < 1e-12 * std::max(delta_max, 1.0))
            throw SingularPointError(
                "box touches the singular locus (Delta ~ 0 on the grid)");
    };

    std::map<DerivMode, double> coarse, fine;
    for (const auto& [mode, e] : density) {
        coarse[mode] = 0;
        fine[mode] = 0;
    }
    double mode_gap = 0, dev_p = 0, dev_c = 0;
    quadrature(opt.grid, coarse, &mode_gap, &dev_p, &dev_c);
    quadrature(2 * opt.grid, fine, nullptr, nullptr, nullptr);

    auto mode_name = [](DerivMode m) {
        return m == DerivMode::partial ? "partial" : "covariant";
    };
    json jd, jq, jr;
    for (const auto& [mode, e] : density) {
        jd[mode_name(mode)] = emitted(e);
        jq[mode_name(mode)] = coarse[mode];
        double denom = std::max(std::abs(fine[mode]), 1e-300);
        jr[mode_name(mode)] =
            json{{"value", fine[mode]},
                 {"relative_change", std::abs(fine[mode] - coarse[mode]) / denom}};
    }
    json j{
        {"schema", "nonholo/1"},
        {"command", "chern-simons"},
        {"system", sys.label},
        {"box", json::array({box.lo[0], box.hi[0], box.lo[1], box.hi[1], box.lo[2],
                             box.hi[2]})},
        {"grid", opt.grid},
        {"density", jd},
        {"quadrature", jq},
        {"refinement", jr},
    };
    if (density.size() == 2)
        j["mode_comparison"] = {{"max_abs_difference_on_grid", mode_gap}};
    if (sys.is_lorenz) {
        json ref;
        if (want_partial) ref["partial"] = {{"max_rel_deviation", dev_p}};
        if (want_covariant) ref["covariant"] = {{"max_rel_deviation", dev_c}};
        j["lorenz_reference"] = ref;
    }
    emit_json(opt, j);
    return 0;
}

int cmd_catalog(const Options& opt) {
    json entries = json::array();
    for (const auto& e : catalog_entries())
        entries.push_back({{"name", e.name},
                           {"parameters", e.param_names},
                           {"description", e.description}});
    emit_json(opt, json{{"schema", "nonholo/1"},
                        {"command", "catalog"},
                        {"systems", entries}});
    return 0;
}

int cmd_verify(const Options& opt) {
    auto results = run_verification(opt.fault);
    OutputTarget out(opt.out_path);
    std::size_t passed = 0;
    for (const auto& r : results) {
        *out.stream << (r.pass ? "[PASS] " : "[FAIL] ") << r.group << ": "
                    << r.detail << "\n";
        if (r.pass) ++passed;
    }
    *out.stream << passed << "/" << results.size() << " identity groups passed\n";
    return passed == results.size() ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Symbolic and numeric toolkit for constraint fields "
                 "P dx + Q dy + R dz = 0"};
    app.require_subcommand(1);
    Options opt;

    auto add_system_flags = [&](CLI::App* sub) {
        sub->add_option("--catalog", opt.catalog_name, "named catalog system");
        sub->add_option("--system", opt.system_file,
                        "JSON system file (P/Q/R or planar p/q)");
        sub->add_option("--param", opt.params,
                        "parameter pin name=value, exact rationals like 8/3");
        sub->add_option("--out", opt.out_path, "output file (default stdout)");
    };
    auto add_integrator_flags = [&](CLI::App* sub) {
        sub->add_option("--method", opt.method, "rk4 | rkf45");
        sub->add_option("--step", opt.step, "fixed step size (rk4)");
        sub->add_option("--tol", opt.tol, "error tolerance (rkf45)");
        sub->add_option("--s-end", opt.s_end, "integration endpoint");
        sub->add_option("--samples", opt.samples,
                        "observation grid size (0 = every accepted step)");
    };

    auto* analyze = app.add_subcommand("analyze", "symbolic integrability report");
    add_system_flags(analyze);

    auto* flow = app.add_subcommand("flow", "integrate the flow of the field");
    add_system_flags(flow);
    add_integrator_flags(flow);
    flow->add_option("--init", opt.init, "start point x,y,z")->required();

    auto* geodesic =
        app.add_subcommand("geodesic", "integrate an autoparallel of the connection");
    add_system_flags(geodesic);
    add_integrator_flags(geodesic);
    geodesic->add_option("--init", opt.init, "start point x,y,z")->required();
    geodesic->add_option("--vel", opt.vel, "start velocity x,y,z")->required();

    auto* asymptotic =
        app.add_subcommand("asymptotic", "continue an asymptotic direction field");
    add_system_flags(asymptotic);
    add_integrator_flags(asymptotic);
    asymptotic->add_option("--init", opt.init, "start point x,y,z")->required();
    asymptotic->add_option("--branch", opt.branch, "root index at the start (0|1)");
    asymptotic->add_option("--dir", opt.dir, "direction hint x,y,z (overrides --branch)");

    auto* extend =
        app.add_subcommand("extend", "integrate a geodesic of the 6D extension");
    add_system_flags(extend);
    add_integrator_flags(extend);
    extend->add_option("--init", opt.init, "base start point x,y,z")->required();
    extend->add_option("--vel", opt.vel, "base start velocity x,y,z")->required();
    extend->add_option("--psi", opt.psi, "fiber start psi1,psi2,psi3 (default 0)");
    extend->add_option("--psivel", opt.psivel, "fiber start velocity (default 0)");

    auto* cs = app.add_subcommand("chern-simons",
                                  "box quadrature of the density invariant");
    add_system_flags(cs);
    cs->add_option("--box", opt.box, "x0,x1,y0,y1,z0,z1")->required();
    cs->add_option("--grid", opt.grid, "cells per axis (default 10)");
    cs->add_option("--mode", opt.mode, "partial | covariant (default: both)");

    auto* catalog_cmd = app.add_subcommand("catalog", "list the named systems");
    catalog_cmd->add_option("--out", opt.out_path, "output file (default stdout)");

    auto* verify = app.add_subcommand("verify", "run every symbolic identity group");
    verify->add_option("--out", opt.out_path, "output file (default stdout)");
    verify->add_option("--fault", opt.fault, "perturb one group (testing seam)")
        ->group("");  // hidden

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;  // help is success; usage problems are 2
    }

    try {
        if (app.got_subcommand(analyze)) return cmd_analyze(opt);
        if (app.got_subcommand(flow)) return cmd_flow(opt);
        if (app.got_subcommand(geodesic)) return cmd_geodesic(opt);
        if (app.got_subcommand(asymptotic)) return cmd_asymptotic(opt);
        if (app.got_subcommand(extend)) return cmd_extend(opt);
        if (app.got_subcommand(cs)) return cmd_chern_simons(opt);
        if (app.got_subcommand(catalog_cmd)) return cmd_catalog(opt);
        if (app.got_subcommand(verify)) return cmd_verify(opt);
        std::cerr << "error: no subcommand\n";
        return 2;
    } catch (const SingularPointError& e) {
        std::cerr << "singularity: " << e.what() << "\n";
        return 3;
    } catch (const SymbolicError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
