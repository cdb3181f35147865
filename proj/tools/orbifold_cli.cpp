// orbifold: command-line driver.  Every subcommand builds a JSON config, which
// goes through the same parse/run/emit path as `orbifold run --config`.
#include "orbifold/cli_io.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

using nlohmann::json;

namespace {

struct Common {
    std::string config_path;
    std::string report;
    std::string dump;
    bool timing = false;
    std::uint64_t seed = 0;
};

json read_config_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw orbifold::ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return json::parse(ss.str());
    } catch (const json::parse_error& e) {
        throw orbifold::ConfigError(path + ": invalid JSON: " + e.what());
    }
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Flat orbifold Monge-Ampere solver and Calabi-Yau orbifold combinatorics"};
    app.require_subcommand(1);

    Common common;
    json doc = json::object();
    std::string command;

    auto add_common = [&](CLI::App* sub, bool solver) {
        sub->add_option("--report", common.report, "Write the JSON report here instead of stdout");
        sub->add_flag("--timing", common.timing, "Record wall-clock time in the report provenance");
        if (solver) sub->add_option("--dump-field", common.dump, "Write phi on the grid as CSV (i1,...,i2n,phi)");
    };
    // Options set on the command line override the config file.
    auto bind = [&](CLI::App* sub, const std::string& name, const std::string& key, const std::string& help, bool as_int) {
        sub->add_option_function<std::string>(
               name,
               [&doc, key, as_int](const std::string& v) {
                   if (as_int) doc[key] = std::stol(v);
                   else doc[key] = v;
               },
               help)
            ->check(as_int ? CLI::Validator(CLI::Number) : CLI::Validator());
    };
    auto leaf = [&](CLI::App* group, const std::string& name, const std::string& cmd, const std::string& help) {
        auto* sub = group->add_subcommand(name, help);
        sub->callback([&command, cmd] { command = cmd; });
        return sub;
    };

    auto* run = app.add_subcommand("run", "Run any command from a JSON config (the \"command\" key selects it)");
    run->add_option("--config", common.config_path, "Problem JSON")->required();
    add_common(run, true);
    run->callback([&command] { command = "__config__"; });

    // Monge-Ampere
    auto* ma = app.add_subcommand("ma", "Prescribed volume form: (omega + i ddbar phi)^n = e^{F + c} omega^n");
    ma->require_subcommand(1);
    auto* ma_solve = leaf(ma, "solve", "ma-solve", "Continuity method in t with Newton steps; report residuals, c_t and estimate diagnostics");
    ma_solve->add_option("--config", common.config_path, "Problem JSON (orbifold, resolution, source_F, solver_overrides)")->required();
    add_common(ma_solve, true);
    auto* ke = app.add_subcommand("ke", "Kahler-Einstein type: (omega + i ddbar phi)^n = e^{F + phi} omega^n");
    ke->require_subcommand(1);
    auto* ke_solve = leaf(ke, "solve", "ke-solve", "Continuity method for the KE type equation, no normalization constant");
    ke_solve->add_option("--config", common.config_path, "Problem JSON")->required();
    add_common(ke_solve, true);

    // Elliptic orbifolds
    auto* ell = app.add_subcommand("elliptic", "Orbifold Riemann surfaces with vanishing real first Chern class");
    ell->require_subcommand(1);
    auto* e_enum = leaf(ell, "enumerate", "elliptic-enumerate", "Signatures (g; m1..mn) with 2g - 2 + sum(1 - 1/m_i) = 0");
    bind(e_enum, "--genus", "genus", "Genus g >= 0", true);
    e_enum->get_option("--genus")->required();
    auto* e_real = leaf(ell, "realize", "elliptic-realize", "Realize a flat genus 0 signature as a torus quotient E/Z_k");
    bind(e_real, "--orders", "orders", "Stabilizer orders, e.g. 4,4,2", false);
    e_real->get_option("--orders")->required();
    auto* e_deg = leaf(ell, "degree", "elliptic-degree", "Orbifold canonical degree 2g - 2 + sum(1 - 1/m_i) and c1 status");
    bind(e_deg, "--genus", "genus", "Genus g >= 0", true);
    bind(e_deg, "--orders", "orders", "Stabilizer orders", false);
    e_deg->get_option("--genus")->required();
    for (auto* s : {e_enum, e_real, e_deg}) add_common(s, false);

    // Spectral checks
    auto* spec = app.add_subcommand("spectral", "Functional inequalities on flat orbifolds, checked numerically");
    spec->require_subcommand(1);
    auto* s_poin = leaf(spec, "poincare", "spectral-poincare", "Smallest nonzero eigenvalue lambda_1 of -Laplacian on invariant functions");
    auto* s_green = leaf(spec, "green-check", "spectral-green-check", "Green identity: integral G_x Laplacian(phi) = mean(phi) - phi(x)");
    auto* s_sob = leaf(spec, "sobolev", "spectral-sobolev", "Sobolev ratio ||phi||_{2n/(n-1)} / ||phi||_{W^{1,2}} over random fields");
    for (auto* s : {s_poin, s_green, s_sob}) {
        s->add_option("--config", common.config_path, "Optional JSON with the same keys");
        bind(s, "--orbifold", "orbifold", "Preset name", false);
        bind(s, "--resolution", "resolution", "Samples per real axis (even)", true);
        s->add_option("--seed", common.seed, "Random seed");
        add_common(s, false);
    }
    bind(s_green, "--samples", "samples", "Number of random fields (default 20)", true);
    bind(s_green, "--points", "points", "Number of grid points x (default 5)", true);
    bind(s_green, "--band", "band", "Fourier band of the random fields (default 4)", true);
    bind(s_sob, "--samples", "samples", "Number of random fields (default 100)", true);
    bind(s_sob, "--band", "band", "Fourier band of the random fields (default 3)", true);

    // Weighted projective spaces
    auto* wps = app.add_subcommand("wps", "Quasihomogeneous polynomials in weighted projective space");
    wps->require_subcommand(1);
    auto* w_weights = leaf(wps, "weights", "wps-weights", "Weights q with sum_j a_ij q_j = 1 for each monomial");
    auto* w_gmax = leaf(wps, "gmax", "wps-gmax", "Maximal diagonal symmetry group, via Smith normal form");
    auto* w_trans = leaf(wps, "transpose", "wps-transpose", "Berglund-Hubsch transpose A^T and its weights");
    for (auto* s : {w_weights, w_gmax, w_trans}) {
        bind(s, "--monomials", "monomials", "e.g. \"x^2*y, y^3, x*z^2\"", false);
        s->get_option("--monomials")->required();
        s->add_option_function<std::vector<std::string>>(
            "--variables", [&doc](const std::vector<std::string>& v) { doc["variables"] = v; }, "Variable order");
    }
    auto* w_cy = leaf(wps, "cy-check", "wps-cy-check", "Calabi-Yau condition sum(d) = sum(q) for a complete intersection");
    bind(w_cy, "--weights", "weights", "Integer weights, e.g. 1,1,1", false);
    bind(w_cy, "--degrees", "degrees", "Degrees, e.g. 3", false);
    w_cy->get_option("--weights")->required();
    w_cy->get_option("--degrees")->required();
    auto* w_stab = leaf(wps, "stabilizer", "wps-stabilizer", "Stabilizer orders of points under a diagonal group modulo C*");
    bind(w_stab, "--weights", "weights", "Integer weights", false);
    w_stab->add_option_function<std::vector<std::string>>(
        "--generator", [&doc](const std::vector<std::string>& v) { doc["generators"] = v; },
        "Phase vector, e.g. 2/4,0,1/4 (repeatable)")->required();
    w_stab->add_option_function<std::vector<std::string>>(
        "--point", [&doc](const std::vector<std::string>& v) { doc["points"] = v; },
        "Point as phases of coordinates, '-' for zero, e.g. 0,1/4,- (repeatable)")->required();
    bind(w_stab, "--order", "order", "Order of a single generator", true);
    w_stab->get_option("--weights")->required();
    for (auto* s : {w_weights, w_gmax, w_trans, w_cy, w_stab}) add_common(s, false);

    // Polytopes
    auto* poly = app.add_subcommand("polytope", "Lattice polytopes and Batyrev-Borisov duality");
    poly->require_subcommand(1);
    auto* p_refl = leaf(poly, "reflexive", "polytope-reflexive", "Facet system and reflexivity (all facets at distance 1)");
    auto* p_dual = leaf(poly, "dual", "polytope-dual", "Polar dual of a reflexive polytope");
    auto* p_pts = leaf(poly, "points", "polytope-points", "Lattice points and interior points");
    auto* p_nef = leaf(poly, "nef-dual", "polytope-nef-dual", "Nef partition check and the dual nef partition");
    for (auto* s : {p_refl, p_dual, p_pts, p_nef}) {
        bind(s, "--vertices", "vertices", "e.g. \"(-1,-1);(2,-1);(-1,2)\"", false);
        s->get_option("--vertices")->required();
        add_common(s, false);
    }
    bind(p_nef, "--partition", "partition", "Vertex index blocks, e.g. \"0,1|2,3\"", false);
    p_nef->get_option("--partition")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        json full = json::object();
        if (!common.config_path.empty()) full = read_config_file(common.config_path);
        for (auto it = doc.begin(); it != doc.end(); ++it) full[it.key()] = it.value();
        if (command != "__config__") {
            if (full.contains("command") && full["command"] != command)
                throw orbifold::ConfigError("command: config says '" + full["command"].get<std::string>() + "' but '" +
                                            command + "' was invoked");
            full["command"] = command;
        }
        if (common.seed != 0) full["seed"] = common.seed;
        auto config = orbifold::config_from_json(full);
        if (!common.report.empty()) config.report_path = common.report;
        if (!common.dump.empty()) config.dump_path = common.dump;
        if (!config.dump_path.empty() && config.command != "ma-solve" && config.command != "ke-solve")
            throw orbifold::ConfigError("output.dump_field: only solve commands produce a field");
        const auto report = orbifold::run(config, common.timing);
        orbifold::emit_report(report, config.report_path, config.dump_path);
        if (report.exit_code != 0) std::cerr << "error: " << report.results.value("error", "failure") << "\n";
        return report.exit_code;
    } catch (const orbifold::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
