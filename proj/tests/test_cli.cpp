// End-to-end checks of the command-line binary: every subcommand, the JSON
// and CSV output contracts, and the exit-code mapping.  The binary path
// arrives as argv[1] (wired up by the build).
#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>
#include <json.hpp>

#include "nonholo/field.hpp"
#include "nonholo/geometry.hpp"
#include "nonholo/parser.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

using nlohmann::json;
using namespace nonholo;

static std::string g_cli;

namespace {

struct RunResult {
    int exit_code;
    std::string output;
};

RunResult run_cli(const std::string& args, const std::string& env = "") {
    std::string cmd = env + (env.empty() ? "" : " ") + g_cli + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
    int status = pclose(pipe);
    REQUIRE(WIFEXITED(status));
    return {WEXITSTATUS(status), out};
}

const std::string kLorenz =
    "--catalog lorenz --param sigma=10 --param r=28 --param b=8/3";

std::vector<std::string> csv_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line))
        if (!line.empty()) lines.push_back(line);
    return lines;
}

std::size_t comma_fields(const std::string& line) {
    return std::size_t(std::count(line.begin(), line.end(), ',')) + 1;
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    REQUIRE(out.good());
    out << text;
}

} // namespace

TEST_CASE("analyze emits the lorenz report and its texts round-trip") {
    auto r = run_cli("analyze --catalog lorenz");
    REQUIRE(r.exit_code == 0);
    json j = json::parse(r.output);
    CHECK(j["schema"] == "nonholo/1");
    CHECK(j["system"] == "lorenz");
    CHECK_FALSE(j["holonomicity"]["is_zero"].get<bool>());
    CHECK_FALSE(j["exactness_residuals"]["all_zero"].get<bool>());
    CHECK_FALSE(j["euler_contraction"]["is_zero"].get<bool>());
    CHECK(j["chern_simons"]["available"].get<bool>());
    CHECK_FALSE(j["chern_simons"]["identically_zero"].get<bool>());
    CHECK(j["connection"]["nonzero_coefficient_count"].get<int>() > 0);

    // The emitted text must parse back to the very expression the library
    // computes.
    auto f = catalog("lorenz");
    auto hol = holonomicity(f);
    CHECK(parse_expr(j["holonomicity"]["text"].get<std::string>(), f.table())
              .equals(hol));
    CHECK(parse_expr(j["field"]["P"].get<std::string>(), f.table()).equals(f.P));
    CHECK(parse_expr(j["connection"]["delta"].get<std::string>(), f.table())
              .equals(build_connection(f).delta));
}

TEST_CASE("analyze flags the projective family as holonomic") {
    auto r = run_cli(
        "analyze --catalog quadratic10 --param k=1 --param l=2 --param m=-1 "
        "--param n=3 --param a=1/2 --param b=2 --param c=-3 --param e=1 "
        "--param f=-2 --param h=5/3");
    REQUIRE(r.exit_code == 0);
    json j = json::parse(r.output);
    CHECK(j["holonomicity"]["is_zero"].get<bool>());
    CHECK(j["euler_contraction"]["is_zero"].get<bool>());
}

TEST_CASE("analyze reports exactness for a gradient field from a file") {
    write_file("/tmp/test_cli_grad.json",
               R"({"P": "y*z", "Q": "x*z", "R": "x*y"})");
    auto r = run_cli("analyze --system /tmp/test_cli_grad.json");
    REQUIRE(r.exit_code == 0);
    json j = json::parse(r.output);
    CHECK(j["exactness_residuals"]["all_zero"].get<bool>());
    CHECK(j["holonomicity"]["is_zero"].get<bool>());
}

TEST_CASE("planar system files are lifted to their projective extension") {
    write_file("/tmp/test_cli_planar.json", R"({"p": "y", "q": "x^3 - x"})");
    auto r = run_cli("analyze --system /tmp/test_cli_planar.json");
    REQUIRE(r.exit_code == 0);
    json j = json::parse(r.output);
    CHECK(j["holonomicity"]["is_zero"].get<bool>());
    CHECK(j["euler_contraction"]["is_zero"].get<bool>());

    // Entries with denominators cannot be lifted.
    write_file("/tmp/test_cli_planar_bad.json", R"({"p": "1/y", "q": "x"})");
    CHECK(run_cli("analyze --system /tmp/test_cli_planar_bad.json").exit_code == 2);
}

TEST_CASE("flow writes the CSV contract") {
    auto r = run_cli("flow " + kLorenz + " --init 1,1,1 --s-end 0.1 --samples 4");
    REQUIRE(r.exit_code == 0);
    auto lines = csv_lines(r.output);
    REQUIRE(lines.size() == 7);  // header + 5 samples + footer
    CHECK(lines[0] == "s,x,y,z");
    CHECK(lines.back() == "# termination: completed");
    for (std::size_t i = 1; i + 1 < lines.size(); ++i)
        CHECK(comma_fields(lines[i]) == 4);
}

TEST_CASE("geodesic CSV carries the contraction monitor") {
    auto r = run_cli("geodesic " + kLorenz +
                     " --init 1,1,1 --vel 1,0,0 --s-end 0.5 --samples 5");
    REQUIRE(r.exit_code == 0);
    auto lines = csv_lines(r.output);
    CHECK(lines[0] == "s,x,y,z,xdot,ydot,zdot,pfaff_contraction");
    REQUIRE(lines.size() == 8);
    // Tangent start: the monitor column stays near zero.
    for (std::size_t i = 1; i + 1 < lines.size(); ++i) {
        auto last = lines[i].rfind(',');
        CHECK(std::abs(std::stod(lines[i].substr(last + 1))) < 1e-6);
    }
}

TEST_CASE("asymptotic continues a chosen branch and monitors the discriminant") {
    for (int branch : {0, 1}) {
        auto r = run_cli("asymptotic " + kLorenz + " --init -2,1,0 --branch " +
                         std::to_string(branch) + " --s-end 0.3 --samples 3");
        REQUIRE(r.exit_code == 0);
        auto lines = csv_lines(r.output);
        CHECK(lines[0] == "s,x,y,z,ux,uy,uz,discriminant");
        CHECK(lines.back() == "# termination: completed");
        CHECK(std::stod(lines[1].substr(lines[1].rfind(',') + 1)) > 0);
    }
    // (1,1,1) is elliptic for these parameters: no branch to follow.
    auto r = run_cli("asymptotic " + kLorenz + " --init 1,1,1 --s-end 0.1");
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("no asymptotic branch") != std::string::npos);
    // A direction hint sidesteps branch indexing.
    r = run_cli("asymptotic " + kLorenz +
                " --init -2,1,0 --dir -0.44,-0.26,0.86 --s-end 0.2");
    CHECK(r.exit_code == 0);
}

TEST_CASE("extend integrates the lifted metric and records its norm") {
    auto r = run_cli("extend " + kLorenz +
                     " --init 1,1,1 --vel 1,0,0 --psi 0.5,-0.25,1 "
                     "--s-end 0.2 --samples 4");
    REQUIRE(r.exit_code == 0);
    auto lines = csv_lines(r.output);
    CHECK(lines[0] ==
          "s,x,y,z,psi1,psi2,psi3,xdot,ydot,zdot,psi1dot,psi2dot,psi3dot,"
          "metric_norm");
    REQUIRE(lines.size() == 7);
    double first = std::stod(lines[1].substr(lines[1].rfind(',') + 1));
    double last = std::stod(lines[5].substr(lines[5].rfind(',') + 1));
    CHECK(std::abs(first - last) < 1e-8);  // conserved along the motion
}

TEST_CASE("exit code 3 marks numerical singularities") {
    CHECK(run_cli("geodesic " + kLorenz + " --init 0,0,0 --vel 1,0,0").exit_code == 3);
    CHECK(run_cli("chern-simons " + kLorenz + " --box -1,1,-1,1,-1,1 --grid 4")
              .exit_code == 3);
}

TEST_CASE("exit code 2 marks usage problems") {
    CHECK(run_cli("").exit_code == 2);                          // no subcommand
    CHECK(run_cli("analyze").exit_code == 2);                   // no system
    CHECK(run_cli("analyze --catalog nosuch").exit_code == 2);  // unknown name
    CHECK(run_cli("analyze --system /does/not/exist.json").exit_code == 2);
    CHECK(run_cli("flow --catalog lorenz --param b=1/0 --init 1,1,1").exit_code == 2);
    CHECK(run_cli("flow --catalog lorenz --param b=abc --init 1,1,1").exit_code == 2);
    CHECK(run_cli("flow " + kLorenz).exit_code == 2);           // missing --init
    CHECK(run_cli("flow " + kLorenz + " --init 1,1").exit_code == 2);
    CHECK(run_cli("flow " + kLorenz + " --init 1,1,1 --method euler").exit_code == 2);
    CHECK(run_cli("analyze --catalog lorenz --system /tmp/x.json").exit_code == 2);
    // An unpinned parameter is fine symbolically but not numerically.
    CHECK(run_cli("analyze --catalog lorenz").exit_code == 0);
    CHECK(run_cli("flow --catalog lorenz --init 1,1,1").exit_code == 2);
    CHECK(run_cli("--help").exit_code == 0);
}

TEST_CASE("chern-simons reports quadrature, refinement, and the lorenz gap") {
    auto r = run_cli("chern-simons " + kLorenz + " --box 2,3,2,3,2,3 --grid 10");
    REQUIRE(r.exit_code == 0);
    json j = json::parse(r.output);
    CHECK(j["grid"] == 10);
    for (const char* mode : {"partial", "covariant"}) {
        CHECK(j["density"].contains(mode));
        CHECK(j["refinement"][mode]["relative_change"].get<double>() < 0.05);
        // The computed density sits at exactly half the closed-form reference
        // everywhere on the grid; the report states that deviation.
        double dev = j["lorenz_reference"][mode]["max_rel_deviation"].get<double>();
        CHECK(dev == doctest::Approx(0.5).epsilon(1e-6));
    }
    // Both derivative modes produce the same density for this connection.
    CHECK(j["mode_comparison"]["max_abs_difference_on_grid"].get<double>() < 1e-15);
    CHECK(j["quadrature"]["partial"].get<double>() ==
          j["quadrature"]["covariant"].get<double>());
}

TEST_CASE("chern-simons is exactly zero for a flat field") {
    write_file("/tmp/test_cli_flat.json", R"({"P": "1", "Q": "2", "R": "3"})");
    auto r = run_cli(
        "chern-simons --system /tmp/test_cli_flat.json --box 1,2,1,2,1,2 --grid 4");
    REQUIRE(r.exit_code == 0);
    json j = json::parse(r.output);
    CHECK(j["quadrature"]["partial"].get<double>() == 0.0);
    CHECK(j["quadrature"]["covariant"].get<double>() == 0.0);
    CHECK(j["density"]["partial"] == "0");
}

TEST_CASE("catalog lists every named system") {
    auto r = run_cli("catalog");
    REQUIRE(r.exit_code == 0);
    json j = json::parse(r.output);
    std::vector<std::string> names;
    for (const auto& e : j["systems"]) names.push_back(e["name"].get<std::string>());
    std::vector<std::string> expect{"lorenz",      "rossler",     "triple_product",
                                    "vdp_projective", "quadratic10", "cubic_node",
                                    "quartic_center"};
    CHECK(names == expect);
    for (const auto& e : j["systems"]) {
        CHECK(e.contains("parameters"));
        CHECK_FALSE(e["description"].get<std::string>().empty());
    }
}

TEST_CASE("verify passes clean, fails under an injected fault") {
    auto clean = run_cli("verify");
    CHECK(clean.exit_code == 0);
    CHECK(clean.output.find("[FAIL]") == std::string::npos);
    CHECK(clean.output.find("12/12 identity groups passed") != std::string::npos);

    auto faulty = run_cli("verify --fault vdp_slopes");
    CHECK(faulty.exit_code == 1);
    CHECK(faulty.output.find("[FAIL] vdp_slopes") != std::string::npos);
    CHECK(faulty.output.find("11/12 identity groups passed") != std::string::npos);

    CHECK(run_cli("verify --fault nosuch").exit_code == 2);

    // Capped parallelism must not change the verdicts.
    auto sequential = run_cli("verify", "NONHOLO_THREADS=1");
    CHECK(sequential.exit_code == 0);
    CHECK(sequential.output == clean.output);
}

TEST_CASE("--out writes the report to a file") {
    std::remove("/tmp/test_cli_out.json");
    auto r = run_cli("analyze --catalog lorenz --out /tmp/test_cli_out.json");
    REQUIRE(r.exit_code == 0);
    CHECK(r.output.empty());
    std::ifstream in("/tmp/test_cli_out.json");
    REQUIRE(in.good());
    json j;
    in >> j;
    CHECK(j["schema"] == "nonholo/1");
    CHECK(run_cli("analyze --catalog lorenz --out /no/dir/x.json").exit_code == 2);
}

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: test_cli <path-to-nonholo-binary> [doctest args]\n");
        return 1;
    }
    g_cli = argv[1];
    doctest::Context ctx(argc - 1, argv + 1);
    return ctx.run();
}
