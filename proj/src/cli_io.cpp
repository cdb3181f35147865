#include "orbifold/cli_io.hpp"

#include "orbifold/polytope.hpp"
#include "orbifold/signatures.hpp"
#include "orbifold/wps.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

namespace orbifold {

using json = nlohmann::json;

namespace {

constexpr const char* version = "1.0.0";

struct CommandSpec {
    bool needs_orbifold = false;
    bool needs_source = false;
    std::vector<std::string> required;
    std::vector<std::string> optional;
};

const std::map<std::string, CommandSpec>& commands()
{
    static const std::map<std::string, CommandSpec> table{
        {"ma-solve", {true, true, {}, {}}},
        {"ke-solve", {true, true, {}, {}}},
        {"elliptic-enumerate", {false, false, {"genus"}, {}}},
        {"elliptic-realize", {false, false, {"orders"}, {}}},
        {"elliptic-degree", {false, false, {"genus"}, {"orders"}}},
        {"spectral-poincare", {true, false, {}, {}}},
        {"spectral-green-check", {true, false, {}, {"samples", "points", "band"}}},
        {"spectral-sobolev", {true, false, {}, {"samples", "band"}}},
        {"wps-weights", {false, false, {"monomials"}, {"variables"}}},
        {"wps-gmax", {false, false, {"monomials"}, {"variables"}}},
        {"wps-transpose", {false, false, {"monomials"}, {"variables"}}},
        {"wps-cy-check", {false, false, {"weights", "degrees"}, {}}},
        {"wps-stabilizer", {false, false, {"weights", "generators", "points"}, {"order"}}},
        {"polytope-reflexive", {false, false, {"vertices"}, {}}},
        {"polytope-dual", {false, false, {"vertices"}, {}}},
        {"polytope-points", {false, false, {"vertices"}, {}}},
        {"polytope-nef-dual", {false, false, {"vertices", "partition"}, {}}},
    };
    return table;
}

const std::set<std::string> core_keys{"command", "orbifold", "resolution", "source_F", "solver_overrides", "output", "seed"};

[[noreturn]] void fail(const std::string& path, const std::string& what) { throw ConfigError(path + ": " + what); }

long get_int(const json& v, const std::string& path)
{
    if (!v.is_number_integer()) fail(path, "expected an integer");
    return v.get<long>();
}

double get_number(const json& v, const std::string& path)
{
    if (!v.is_number()) fail(path, "expected a number");
    return v.get<double>();
}

std::string get_string(const json& v, const std::string& path)
{
    if (!v.is_string()) fail(path, "expected a string");
    return v.get<std::string>();
}

std::vector<long> get_int_list(const json& v, const std::string& path)
{
    if (v.is_string()) {
        try {
            return parse_int_list(v.get<std::string>());
        } catch (const std::exception& e) {
            fail(path, e.what());
        }
    }
    if (!v.is_array()) fail(path, "expected a list of integers");
    std::vector<long> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(get_int(v[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

Rational get_rational(const json& v, const std::string& path)
{
    if (v.is_number_integer()) return Rational(v.get<long>());
    if (!v.is_string()) fail(path, "expected a rational \"p/q\"");
    try {
        return parse_rational(v.get<std::string>());
    } catch (const std::exception& e) {
        fail(path, e.what());
    }
}

std::vector<std::string> string_list(const json& v, const std::string& path)
{
    if (v.is_string()) return {v.get<std::string>()};
    if (!v.is_array()) fail(path, "expected a string or a list of strings");
    std::vector<std::string> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(get_string(v[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

std::vector<std::string> variable_names(const json& args)
{
    if (!args.contains("variables")) return {};
    return string_list(args["variables"], "variables");
}

ExponentMatrix monomials_arg(const json& args)
{
    try {
        return parse_monomials(get_string(args["monomials"], "monomials"), variable_names(args));
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        fail("monomials", e.what());
    }
}

LatticePolytope vertices_arg(const json& args)
{
    const json& v = args["vertices"];
    try {
        if (v.is_string()) return LatticePolytope::parse(v.get<std::string>());
        if (!v.is_array()) fail("vertices", "expected \"(a,b);(c,d)\" or a list of integer lists");
        std::vector<LatticePoint> pts;
        for (std::size_t i = 0; i < v.size(); ++i) pts.push_back(get_int_list(v[i], "vertices[" + std::to_string(i) + "]"));
        return LatticePolytope(std::move(pts));
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        fail("vertices", e.what());
    }
}

NefPartition partition_arg(const json& args)
{
    const json& v = args["partition"];
    if (v.is_string()) {
        try {
            return parse_partition(v.get<std::string>());
        } catch (const std::exception& e) {
            fail("partition", e.what());
        }
    }
    if (!v.is_array()) fail("partition", "expected \"0,1|2,3\" or a list of index lists");
    NefPartition e;
    for (std::size_t i = 0; i < v.size(); ++i) {
        std::vector<std::size_t> part;
        for (long x : get_int_list(v[i], "partition[" + std::to_string(i) + "]")) {
            if (x < 0) fail("partition", "negative vertex index");
            part.push_back(static_cast<std::size_t>(x));
        }
        e.push_back(std::move(part));
    }
    return e;
}

json rational_json(const Rational& r) { return to_string(r); }

json rationals_json(const std::vector<Rational>& v)
{
    json a = json::array();
    for (const auto& r : v) a.push_back(rational_json(r));
    return a;
}

json points_json(const std::vector<LatticePoint>& pts)
{
    json a = json::array();
    for (const auto& p : pts) a.push_back(p);
    return a;
}

json facets_json(const std::vector<Facet>& fs)
{
    json a = json::array();
    for (const auto& f : fs) a.push_back({{"normal", f.normal}, {"offset", f.offset}});
    return a;
}

json partition_json(const NefPartition& e)
{
    json a = json::array();
    for (const auto& p : e) a.push_back(p);
    return a;
}

json signature_json(const OrbifoldSignature& s)
{
    return {{"genus", s.genus}, {"orders", s.orders}, {"text", s.str()}};
}

void check_args(const CommandSpec& spec, const json& args, const std::string& command)
{
    for (const auto& k : spec.required)
        if (!args.contains(k)) fail(k, "required by " + command);
    for (auto it = args.begin(); it != args.end(); ++it) {
        const bool known = std::find(spec.required.begin(), spec.required.end(), it.key()) != spec.required.end() ||
                           std::find(spec.optional.begin(), spec.optional.end(), it.key()) != spec.optional.end();
        if (!known) fail(it.key(), "unknown key for " + command);
    }
}

const std::set<std::string> solver_keys{"t_schedule", "newton_tol",   "max_newton",      "min_step",
                                        "positivity_margin_min", "linear_tol", "linear_max_iter", "gmres_restart",
                                        "dealias",    "force_dense",  "dense_limit",     "max_bisections"};

SolverConfig apply_overrides(const json& o)
{
    SolverConfig c;
    if (!o.is_object()) fail("solver_overrides", "expected an object");
    for (auto it = o.begin(); it != o.end(); ++it) {
        const std::string path = "solver_overrides." + it.key();
        const json& v = it.value();
        const std::string& k = it.key();
        if (!solver_keys.count(k)) fail(path, "unknown solver setting");
        if (k == "t_schedule") {
            if (!v.is_array()) fail(path, "expected a list of numbers");
            c.t_schedule.clear();
            for (std::size_t i = 0; i < v.size(); ++i) c.t_schedule.push_back(get_number(v[i], path));
        } else if (k == "newton_tol") c.newton_tol = get_number(v, path);
        else if (k == "max_newton") c.max_newton = static_cast<int>(get_int(v, path));
        else if (k == "min_step") c.min_step = get_number(v, path);
        else if (k == "positivity_margin_min") c.positivity_margin_min = get_number(v, path);
        else if (k == "linear_tol") c.linear_tol = get_number(v, path);
        else if (k == "linear_max_iter") c.linear_max_iter = static_cast<int>(get_int(v, path));
        else if (k == "gmres_restart") c.gmres_restart = static_cast<int>(get_int(v, path));
        else if (k == "dealias") {
            if (!v.is_boolean()) fail(path, "expected a boolean");
            c.dealias = v.get<bool>();
        } else if (k == "force_dense") {
            if (!v.is_boolean()) fail(path, "expected a boolean");
            c.force_dense = v.get<bool>();
        } else if (k == "dense_limit") c.dense_limit = static_cast<std::size_t>(get_int(v, path));
        else if (k == "max_bisections") c.max_bisections = static_cast<int>(get_int(v, path));
    }
    try {
        c.validate();
    } catch (const std::invalid_argument& e) {
        fail("solver_overrides", e.what());
    }
    return c;
}

std::complex<double> complex_entry(const json& v, const std::string& path)
{
    if (v.is_number()) return {v.get<double>(), 0.0};
    if (!v.is_array() || v.size() != 2) fail(path, "expected [re, im]");
    return {get_number(v[0], path + "[0]"), get_number(v[1], path + "[1]")};
}

SourceSpec parse_source(const json& v, int complex_dim)
{
    if (!v.is_object()) fail("source_F", "expected an object");
    SourceSpec s;
    if (v.contains("preset")) {
        s.preset = get_string(v["preset"], "source_F.preset");
        if (s.preset != "cos1" && s.preset != "cos2" && s.preset != "manufactured")
            fail("source_F.preset", "unknown preset '" + s.preset + "' (cos1, cos2, manufactured)");
        if (!v.contains("amplitude")) fail("source_F.amplitude", "required with a preset");
        s.amplitude = get_number(v["amplitude"], "source_F.amplitude");
        if (complex_dim == 2 && std::abs(s.amplitude) > 0.2) fail("source_F.amplitude", "|a| must be <= 0.2 for n = 2 presets");
        for (auto it = v.begin(); it != v.end(); ++it)
            if (it.key() != "preset" && it.key() != "amplitude") fail("source_F." + it.key(), "unknown key");
        return s;
    }
    if (!v.contains("fourier")) fail("source_F", "needs \"preset\" or \"fourier\"");
    for (auto it = v.begin(); it != v.end(); ++it)
        if (it.key() != "fourier") fail("source_F." + it.key(), "unknown key");
    const json& terms = v["fourier"];
    if (!terms.is_array()) fail("source_F.fourier", "expected a list");
    for (std::size_t i = 0; i < terms.size(); ++i) {
        const std::string path = "source_F.fourier[" + std::to_string(i) + "]";
        const json& t = terms[i];
        if (!t.is_object() || !t.contains("k")) fail(path, "expected {\"k\": [...], \"re\": x, \"im\": y}");
        FourierTerm term;
        for (long x : get_int_list(t["k"], path + ".k")) term.k.push_back(static_cast<int>(x));
        if (static_cast<int>(term.k.size()) != 2 * complex_dim)
            fail(path + ".k", "needs " + std::to_string(2 * complex_dim) + " entries");
        const double re = t.contains("re") ? get_number(t["re"], path + ".re") : 0.0;
        const double im = t.contains("im") ? get_number(t["im"], path + ".im") : 0.0;
        term.c = {re, im};
        s.fourier.push_back(std::move(term));
    }
    return s;
}

json source_json(const SourceSpec& s)
{
    if (!s.preset.empty()) return {{"preset", s.preset}, {"amplitude", s.amplitude}};
    json terms = json::array();
    for (const auto& t : s.fourier) terms.push_back({{"k", t.k}, {"re", t.c.real()}, {"im", t.c.imag()}});
    return {{"fourier", terms}};
}

json history_json(const std::vector<ResidualRecord>& h)
{
    json a = json::array();
    for (const auto& r : h)
        a.push_back({{"t", r.t},
                     {"iteration", r.iteration},
                     {"residual", r.residual},
                     {"grid_residual", r.grid_residual},
                     {"volume_error", r.volume_error},
                     {"positivity_min", r.positivity_min}});
    return a;
}

json diagnostics_json(const DiagnosticsReport& d)
{
    return {{"c0_norm", d.c0_norm},
            {"equivalence_interval", {d.equivalence_min, d.equivalence_max}},
            {"trace_range", {d.trace_min, d.trace_max}},
            {"s_norm_sup", d.s_norm_sup},
            {"lemma52_margin", d.lemma52_margin},
            {"volume_error", d.volume_error}};
}

}  // namespace

bool SourceSpec::operator==(const SourceSpec& o) const
{
    if (preset != o.preset || amplitude != o.amplitude || fourier.size() != o.fourier.size()) return false;
    for (std::size_t i = 0; i < fourier.size(); ++i)
        if (fourier[i].k != o.fourier[i].k || fourier[i].c != o.fourier[i].c) return false;
    return true;
}

bool ProblemConfig::operator==(const ProblemConfig& o) const
{
    return command == o.command && orbifold == o.orbifold && orbifold_inline == o.orbifold_inline &&
           resolution == o.resolution && source == o.source && solver_overrides == o.solver_overrides &&
           report_path == o.report_path && dump_path == o.dump_path && seed == o.seed && args == o.args;
}

std::vector<std::string> command_names()
{
    std::vector<std::string> out;
    for (const auto& [k, v] : commands()) out.push_back(k);
    return out;
}

OrbifoldPtr orbifold_from_json(const json& doc)
{
    if (!doc.is_object()) fail("orbifold", "expected a preset name or an object");
    for (auto it = doc.begin(); it != doc.end(); ++it)
        if (it.key() != "complex_dim" && it.key() != "period_matrix" && it.key() != "metric" && it.key() != "generators" &&
            it.key() != "name")
            fail("orbifold." + it.key(), "unknown key");
    if (!doc.contains("complex_dim")) fail("orbifold.complex_dim", "required");
    const long n = get_int(doc["complex_dim"], "orbifold.complex_dim");
    if (n < 1 || n > 3) fail("orbifold.complex_dim", "must be 1..3");
    if (!doc.contains("period_matrix")) fail("orbifold.period_matrix", "required");
    const json& pm = doc["period_matrix"];
    if (!pm.is_array() || pm.size() != static_cast<std::size_t>(2 * n * n))
        fail("orbifold.period_matrix", "expected " + std::to_string(2 * n * n) + " entries [re, im], row-major n x 2n");
    Eigen::MatrixXcd pi(n, 2 * n);
    for (long r = 0; r < n; ++r)
        for (long c = 0; c < 2 * n; ++c)
            pi(r, c) = complex_entry(pm[r * 2 * n + c], "orbifold.period_matrix[" + std::to_string(r * 2 * n + c) + "]");
    Eigen::MatrixXcd g = Eigen::MatrixXcd::Identity(n, n);
    if (doc.contains("metric")) {
        const json& m = doc["metric"];
        if (!m.is_array() || m.size() != static_cast<std::size_t>(n * n))
            fail("orbifold.metric", "expected " + std::to_string(n * n) + " entries [re, im], row-major");
        for (long r = 0; r < n; ++r)
            for (long c = 0; c < n; ++c) g(r, c) = complex_entry(m[r * n + c], "orbifold.metric[" + std::to_string(r * n + c) + "]");
    }
    std::string name = doc.contains("name") ? get_string(doc["name"], "orbifold.name") : "inline";
    try {
        PeriodData periods(pi, g);
        std::vector<GroupElement> gens;
        if (doc.contains("generators")) {
            const json& gs = doc["generators"];
            if (!gs.is_array()) fail("orbifold.generators", "expected a list");
            for (std::size_t i = 0; i < gs.size(); ++i) {
                const std::string path = "orbifold.generators[" + std::to_string(i) + "]";
                const json& e = gs[i];
                if (!e.is_object() || !e.contains("linear")) fail(path, "expected {\"linear\": rows, \"translation\": [...]}");
                const json& lin = e["linear"];
                if (!lin.is_array() || lin.size() != static_cast<std::size_t>(2 * n)) fail(path + ".linear", "expected 2n rows");
                Eigen::MatrixXi m(2 * n, 2 * n);
                for (long r = 0; r < 2 * n; ++r) {
                    auto row = get_int_list(lin[r], path + ".linear[" + std::to_string(r) + "]");
                    if (row.size() != static_cast<std::size_t>(2 * n)) fail(path + ".linear", "expected 2n columns");
                    for (long c = 0; c < 2 * n; ++c) m(r, c) = static_cast<int>(row[c]);
                }
                std::vector<Rational> t;
                if (e.contains("translation")) {
                    const json& tr = e["translation"];
                    if (!tr.is_array() || tr.size() != static_cast<std::size_t>(2 * n)) fail(path + ".translation", "expected 2n rationals");
                    for (std::size_t k = 0; k < tr.size(); ++k) t.push_back(get_rational(tr[k], path + ".translation"));
                }
                gens.push_back(make_group_element(periods, m, t));
            }
        }
        return build_orbifold(periods, gens, 1024, name);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        fail("orbifold", e.what());
    }
}

ProblemConfig parse_config(std::string_view text)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("invalid JSON: ") + e.what());
    }
    return config_from_json(doc);
}

ProblemConfig config_from_json(const json& doc)
{
    if (!doc.is_object()) fail("$", "expected a JSON object");
    if (!doc.contains("command")) fail("command", "required");
    ProblemConfig c;
    c.command = get_string(doc["command"], "command");
    const auto it = commands().find(c.command);
    if (it == commands().end()) fail("command", "unknown command '" + c.command + "'");
    const CommandSpec& spec = it->second;

    for (auto jt = doc.begin(); jt != doc.end(); ++jt)
        if (!core_keys.count(jt.key())) c.args[jt.key()] = jt.value();
    check_args(spec, c.args, c.command);

    if (doc.contains("seed")) {
        if (!doc["seed"].is_number_unsigned()) fail("seed", "expected a non-negative integer");
        c.seed = doc["seed"].get<std::uint64_t>();
    }
    if (doc.contains("output")) {
        const json& o = doc["output"];
        if (!o.is_object()) fail("output", "expected an object");
        for (auto jt = o.begin(); jt != o.end(); ++jt) {
            if (jt.key() == "report") c.report_path = get_string(jt.value(), "output.report");
            else if (jt.key() == "dump_field") c.dump_path = get_string(jt.value(), "output.dump_field");
            else fail("output." + jt.key(), "unknown key");
        }
    }

    if (!spec.needs_orbifold) {
        for (const char* k : {"orbifold", "resolution", "source_F", "solver_overrides"})
            if (doc.contains(k)) fail(k, "not used by " + c.command);
        return c;
    }
    if (!doc.contains("orbifold")) fail("orbifold", "required by " + c.command);
    OrbifoldPtr orb;
    if (doc["orbifold"].is_string()) {
        c.orbifold = doc["orbifold"].get<std::string>();
        try {
            orb = preset_orbifold(c.orbifold);
        } catch (const std::exception& e) {
            fail("orbifold", e.what());
        }
    } else {
        c.orbifold_inline = doc["orbifold"];
        orb = orbifold_from_json(c.orbifold_inline);
    }
    if (!doc.contains("resolution")) fail("resolution", "required by " + c.command);
    const json& r = doc["resolution"];
    if (r.is_number_integer()) c.resolution.assign(orb->real_dim(), static_cast<int>(r.get<long>()));
    else
        for (long x : get_int_list(r, "resolution")) c.resolution.push_back(static_cast<int>(x));
    try {
        check_resolution(*orb, c.resolution);
    } catch (const std::exception& e) {
        fail("resolution", e.what());
    }

    if (spec.needs_source) {
        if (!doc.contains("source_F")) fail("source_F", "required by " + c.command);
        c.source = parse_source(doc["source_F"], orb->complex_dim());
        if (doc.contains("solver_overrides")) c.solver_overrides = doc["solver_overrides"];
        apply_overrides(c.solver_overrides);
    } else {
        for (const char* k : {"source_F", "solver_overrides"})
            if (doc.contains(k)) fail(k, "not used by " + c.command);
    }
    return c;
}

json to_json(const ProblemConfig& c)
{
    json doc = c.args;
    doc["command"] = c.command;
    if (!c.orbifold.empty()) doc["orbifold"] = c.orbifold;
    else if (!c.orbifold_inline.is_null()) doc["orbifold"] = c.orbifold_inline;
    if (!c.resolution.empty()) doc["resolution"] = c.resolution;
    if (c.source) doc["source_F"] = source_json(*c.source);
    if (commands().at(c.command).needs_source) doc["solver_overrides"] = c.solver_overrides;
    if (c.seed != 0) doc["seed"] = c.seed;
    json out = json::object();
    if (!c.report_path.empty()) out["report"] = c.report_path;
    if (!c.dump_path.empty()) out["dump_field"] = c.dump_path;
    if (!out.empty()) doc["output"] = out;
    return doc;
}

std::string serialize(const ProblemConfig& c) { return to_json(c).dump(2); }

OrbifoldPtr resolve_orbifold(const ProblemConfig& c)
{
    if (!c.orbifold.empty()) return preset_orbifold(c.orbifold);
    if (!c.orbifold_inline.is_null()) return orbifold_from_json(c.orbifold_inline);
    throw ConfigError("orbifold: not set");
}

SolverConfig solver_config(const ProblemConfig& c) { return apply_overrides(c.solver_overrides); }

SpectralField manufactured_potential(const OrbifoldPtr& orb, const Resolution& res, double a)
{
    constexpr double pi = std::numbers::pi;
    const bool one = orb->complex_dim() == 1;
    auto f = SpectralField::from_function(orb, res, [a, one](std::span<const double> u) {
        return one ? a * std::cos(2 * pi * u[0]) : a * std::cos(2 * pi * u[0]) * std::cos(2 * pi * u[2]);
    });
    return project_invariant(f);
}

SpectralField source_field(const ProblemConfig& c, const OrbifoldPtr& orb)
{
    constexpr double pi = std::numbers::pi;
    if (!c.source) throw ConfigError("source_F: not set");
    const SourceSpec& s = *c.source;
    const Resolution& res = c.resolution;
    SpectralField f;
    if (s.preset == "cos1") {
        const double a = s.amplitude;
        f = SpectralField::from_function(orb, res, [a](std::span<const double> u) { return a * std::cos(2 * pi * u[0]); });
    } else if (s.preset == "cos2") {
        const double a = s.amplitude;
        const std::size_t second = orb->complex_dim() == 1 ? 1 : 2;
        f = SpectralField::from_function(orb, res, [a, second](std::span<const double> u) {
            return a * (std::cos(2 * pi * u[0]) + std::cos(2 * pi * u[second]));
        });
    } else if (s.preset == "manufactured") {
        const auto star = manufactured_potential(orb, res, s.amplitude);
        try {
            f = pointwise_map(ma_density(star), [](double v) { return std::log(v); });
        } catch (const SolverError& e) {
            fail("source_F.amplitude", std::string("manufactured potential is not Kahler: ") + e.what());
        }
        if (c.command == "ke-solve") f -= star;
    } else {
        f = field_from_terms(orb, res, s.fourier);
    }
    return project_invariant(f);
}

namespace {

json run_solve(const ProblemConfig& c, RunReport& report)
{
    const auto orb = resolve_orbifold(c);
    const auto cfg = solver_config(c);
    const auto F = source_field(c, orb);
    const Mode mode = c.command == "ke-solve" ? Mode::kahler_einstein : Mode::prescribed_volume;
    MASolution sol = mode == Mode::kahler_einstein ? solve_ke(F, cfg) : solve_continuity(F, cfg);
    json res{{"mode", to_string(mode)},
             {"final_t", sol.final_t},
             {"bisections", sol.bisections},
             {"residual_history", history_json(sol.residual_history)},
             {"diagnostics", diagnostics_json(sol.diagnostics)},
             {"mean_phi", sol.phi.mean()},
             {"sup_phi", sol.phi.sup_norm()}};
    json ct = json::array();
    for (const auto& [t, v] : sol.c_table) ct.push_back({{"t", t}, {"c_t", v}});
    res["c_table"] = ct;
    if (c.source->preset == "manufactured") {
        auto expect = manufactured_potential(orb, c.resolution, c.source->amplitude);
        if (mode == Mode::prescribed_volume) expect += -expect.mean();
        res["manufactured_error"] = max_abs_difference(sol.phi, expect);
    }
    report.field = std::move(sol.phi);
    return res;
}

json run_elliptic(const ProblemConfig& c)
{
    const json& a = c.args;
    if (c.command == "elliptic-enumerate") {
        const long g = get_int(a["genus"], "genus");
        if (g < 0) fail("genus", "must be >= 0");
        json list = json::array();
        for (const auto& s : enumerate_flat(static_cast<int>(g))) list.push_back(signature_json(s));
        return {{"genus", g}, {"signatures", list}};
    }
    auto orders_of = [&]() {
        std::vector<int> o;
        if (a.contains("orders"))
            for (long x : get_int_list(a["orders"], "orders")) o.push_back(static_cast<int>(x));
        return o;
    };
    if (c.command == "elliptic-realize") {
        OrbifoldSignature sig;
        try {
            sig = OrbifoldSignature(0, orders_of());
        } catch (const std::exception& e) {
            fail("orders", e.what());
        }
        OrbifoldPtr orb;
        try {
            orb = realize(sig);
        } catch (const std::exception& e) {
            fail("orders", e.what());
        }
        json gens = json::array();
        for (std::size_t i = 1; i < orb->group().size(); ++i) {
            const auto& m = orb->group()[i].linear;
            json rows = json::array();
            for (int r = 0; r < m.rows(); ++r) {
                json row = json::array();
                for (int k = 0; k < m.cols(); ++k) row.push_back(m(r, k));
                rows.push_back(row);
            }
            gens.push_back(rows);
        }
        json periods = json::array();
        for (int k = 0; k < orb->periods().period_matrix.cols(); ++k) {
            const auto z = orb->periods().period_matrix(0, k);
            periods.push_back({z.real(), z.imag()});
        }
        const auto back = fixed_point_data(*orb);
        return {{"signature", signature_json(sig)},
                {"preset", orb->name()},
                {"group_order", orb->order()},
                {"period_matrix", periods},
                {"group_linear_parts", gens},
                {"fixed_point_signature", signature_json(back)},
                {"round_trip", back == sig}};
    }
    const long g = get_int(a["genus"], "genus");
    OrbifoldSignature sig;
    try {
        sig = OrbifoldSignature(static_cast<int>(g), orders_of());
    } catch (const std::exception& e) {
        fail("orders", e.what());
    }
    const auto deg = canonical_degree(sig);
    json res{{"signature", signature_json(sig)}, {"canonical_degree", rational_json(deg)}};
    if (!sig.orders.empty()) {
        const auto ch = chern_status(sig);
        res["chern"] = {{"real_c1_zero", ch.real_c1_zero}, {"integral_c1_zero", ch.integral_c1_zero}, {"torsion_order", ch.torsion_order}};
    }
    return res;
}

json run_spectral(const ProblemConfig& c)
{
    const auto orb = resolve_orbifold(c);
    const json& a = c.args;
    json res{{"resolution", c.resolution}};
    if (c.command == "spectral-poincare") {
        const double lambda = poincare_lambda(orb, c.resolution);
        res["value"] = lambda;
        res["poincare_constant"] = 1.0 / std::sqrt(lambda);
        return res;
    }
    if (c.command == "spectral-green-check") {
        const long samples = a.contains("samples") ? get_int(a["samples"], "samples") : 20;
        const long points = a.contains("points") ? get_int(a["points"], "points") : 5;
        const long band = a.contains("band") ? get_int(a["band"], "band") : 4;
        if (samples < 1 || points < 1 || band < 1) fail("samples", "samples, points and band must be positive");
        std::mt19937_64 rng(c.seed);
        const std::size_t total = grid_size(c.resolution);
        std::vector<std::size_t> xs;
        std::uniform_int_distribution<std::size_t> pick(0, total - 1);
        for (long i = 0; i < points; ++i) xs.push_back(pick(rng));
        std::vector<SpectralField> kernels;
        for (auto x : xs) kernels.push_back(green_kernel(orb, c.resolution, x));
        double worst = 0.0;
        for (long s = 0; s < samples; ++s) {
            auto phi = random_band_limited(orb, c.resolution, static_cast<int>(band), rng);
            auto lap = laplacian(phi);
            for (std::size_t i = 0; i < xs.size(); ++i)
                worst = std::max(worst, std::abs(integrate(pointwise_product(kernels[i], lap)) - (phi.mean() - phi[xs[i]])));
        }
        res["value"] = worst;
        res["samples"] = samples;
        res["points"] = xs;
        return res;
    }
    const long samples = a.contains("samples") ? get_int(a["samples"], "samples") : 100;
    const long band = a.contains("band") ? get_int(a["band"], "band") : 3;
    if (samples < 1 || band < 1) fail("samples", "samples and band must be positive");
    SobolevProbe probe;
    try {
        probe = sobolev_probe(orb, c.resolution, static_cast<int>(samples), c.seed, static_cast<int>(band));
    } catch (const std::invalid_argument& e) {
        fail("orbifold", e.what());
    }
    res["value"] = probe.max_ratio;
    res["all_finite"] = probe.all_finite;
    res["samples"] = samples;
    return res;
}

json group_json(const DiagonalGroup& g)
{
    json gens = json::array();
    for (const auto& x : g.generators) gens.push_back(rationals_json(x));
    json res{{"generators", gens},
             {"order", to_string(g.order)},
             {"contains_J", g.contains_J},
             {"j_order", to_string(g.j_order)},
             {"quotient_order", to_string(g.quotient_order)}};
    if (g.J) res["J"] = rationals_json(*g.J);
    return res;
}

json weights_json(const QuasiHomogeneity& q)
{
    json res{{"is_calabi_yau_type", q.is_calabi_yau_type}};
    if (q.weights) res["weights"] = rationals_json(*q.weights);
    else {
        res["weights"] = nullptr;
        res["reason"] = q.reason;
    }
    return res;
}

json run_wps(const ProblemConfig& c)
{
    const json& a = c.args;
    if (c.command == "wps-cy-check") {
        const auto q = get_int_list(a["weights"], "weights");
        const auto d = get_int_list(a["degrees"], "degrees");
        try {
            WeightSystem ws(q);
            return {{"weights", q},
                    {"degrees", d},
                    {"calabi_yau", cy_complete_intersection(ws, d)},
                    {"canonical_class_degree", canonical_class_degree(ws)}};
        } catch (const std::invalid_argument& e) {
            fail("weights", e.what());
        }
    }
    if (c.command == "wps-stabilizer") {
        WeightSystem ws;
        try {
            ws = WeightSystem(get_int_list(a["weights"], "weights"));
        } catch (const std::invalid_argument& e) {
            fail("weights", e.what());
        }
        std::vector<PhaseVector> gens;
        const auto gen_text = string_list(a["generators"], "generators");
        for (std::size_t i = 0; i < gen_text.size(); ++i) {
            try {
                auto v = parse_rational_list(gen_text[i]);
                if (v.size() != ws.size()) fail("generators[" + std::to_string(i) + "]", "length differs from weights");
                gens.push_back(reduce_phases(v));
            } catch (const ConfigError&) {
                throw;
            } catch (const std::exception& e) {
                fail("generators[" + std::to_string(i) + "]", e.what());
            }
        }
        if (gens.empty()) fail("generators", "at least one generator required");
        long group_order = 0;
        if (a.contains("order")) {
            if (gens.size() != 1) fail("order", "only meaningful for a single generator");
            group_order = get_int(a["order"], "order");
        }
        json pts = json::array();
        const auto point_text = string_list(a["points"], "points");
        for (std::size_t i = 0; i < point_text.size(); ++i) {
            const std::string path = "points[" + std::to_string(i) + "]";
            PhasePoint p;
            try {
                p = PhasePoint::parse(point_text[i]);
            } catch (const std::exception& e) {
                fail(path, e.what());
            }
            if (p.coords.size() != ws.size()) fail(path, "length differs from weights");
            long s = 0;
            try {
                s = group_order ? stabilizer_order(gens[0], group_order, ws, p) : stabilizer_order(gens, ws, p);
            } catch (const std::length_error& e) {
                fail("generators", e.what());
            } catch (const std::invalid_argument& e) {
                fail("order", e.what());
            }
            pts.push_back({{"point", p.str()}, {"stabilizer_order", s}});
        }
        json g = json::array();
        for (const auto& x : gens) g.push_back(rationals_json(x));
        const long order = group_order ? group_order : static_cast<long>(enumerate_group(gens, ws.size()).size());
        return {{"weights", ws.weights}, {"generators", g}, {"group_order", order}, {"points", pts}};
    }
    const auto m = monomials_arg(a);
    json res{{"variables", m.variables}, {"exponent_matrix", m.rows}};
    if (c.command == "wps-weights") {
        res.update(weights_json(quasihomogeneous_weights(m)));
        return res;
    }
    if (c.command == "wps-gmax") {
        try {
            res["group"] = group_json(diagonal_symmetry_group(m));
        } catch (const std::invalid_argument& e) {
            fail("monomials", e.what());
        }
        return res;
    }
    try {
        const auto t = bhk_transpose(m);
        res["transpose"] = t.matrix.rows;
        res["transpose_weights"] = weights_json(t.weights);
    } catch (const std::invalid_argument& e) {
        fail("monomials", e.what());
    }
    return res;
}

json run_polytope(const ProblemConfig& c)
{
    const auto p = vertices_arg(c.args);
    const bool refl = is_reflexive(p);
    json res{{"dim", p.dim()}, {"vertices", points_json(p.vertices())}, {"facets", facets_json(facet_system(p))}, {"reflexive", refl}};
    if (c.command == "polytope-reflexive") {
        const auto interior = interior_lattice_points(p);
        res["interior_points"] = points_json(interior);
        return res;
    }
    if (c.command == "polytope-points") {
        res["lattice_points"] = points_json(lattice_points(p));
        res["interior_points"] = points_json(interior_lattice_points(p));
        return res;
    }
    if (!refl) fail("vertices", "polytope is not reflexive");
    if (c.command == "polytope-dual") {
        const auto d = polar_dual(p);
        res["dual"] = {{"vertices", points_json(d.vertices())}, {"facets", facets_json(facet_system(d))}, {"reflexive", is_reflexive(d)}};
        return res;
    }
    const auto e = partition_arg(c.args);
    NefCheck check;
    try {
        check = nef_partition_check(p, e);
    } catch (const std::invalid_argument& err) {
        fail("partition", err.what());
    }
    res["partition"] = partition_json(e);
    res["nef"] = check.ok;
    if (!check.ok) {
        res["reason"] = check.reason;
        return res;
    }
    const auto d = dual_nef_partition(p, e);
    json parts = json::array();
    for (const auto& part : d.parts) parts.push_back(points_json(part));
    res["dual"] = {{"vertices", points_json(d.polytope.vertices())},
                   {"reflexive", is_reflexive(d.polytope)},
                   {"partition", partition_json(d.partition)},
                   {"parts", parts}};
    return res;
}

}  // namespace

RunReport run(const ProblemConfig& c, bool timing)
{
    RunReport report;
    report.config = to_json(c);
    report.provenance = {{"version", version}, {"command", c.command}};
    if (!c.resolution.empty()) report.provenance["grid"] = c.resolution;
    if (commands().at(c.command).needs_source) {
        const auto cfg = solver_config(c);
        report.provenance["tolerances"] = {{"newton_tol", cfg.newton_tol}, {"linear_tol", cfg.linear_tol}};
    }
    const auto start = std::chrono::steady_clock::now();
    try {
        const std::string& cmd = c.command;
        if (cmd == "ma-solve" || cmd == "ke-solve") report.results = run_solve(c, report);
        else if (cmd.rfind("elliptic-", 0) == 0) report.results = run_elliptic(c);
        else if (cmd.rfind("spectral-", 0) == 0) report.results = run_spectral(c);
        else if (cmd.rfind("wps-", 0) == 0) report.results = run_wps(c);
        else report.results = run_polytope(c);
        report.results["status"] = "ok";
    } catch (const SolverError& e) {
        report.results = {{"status", "solver_failure"}, {"error", e.what()}};
        report.exit_code = 2;
    } catch (const std::logic_error& e) {
        // duality assertions and other internal consistency checks
        if (dynamic_cast<const std::invalid_argument*>(&e)) throw ConfigError(e.what());
        report.results = {{"status", "failure"}, {"error", e.what()}};
        report.exit_code = 2;
    }
    if (timing)
        report.provenance["wall_clock_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

std::string report_text(const RunReport& r)
{
    json doc{{"config", r.config}, {"results", r.results}, {"provenance", r.provenance}};
    return doc.dump(2) + "\n";
}

void write_field_csv(const SpectralField& f, std::ostream& out)
{
    const auto& res = f.resolution();
    for (std::size_t a = 0; a < res.size(); ++a) out << "i" << a + 1 << ",";
    out << "phi\n";
    std::vector<int> idx(res.size(), 0);
    char buf[64];
    for (std::size_t i = 0; i < f.size(); ++i) {
        for (int x : idx) out << x << ",";
        std::snprintf(buf, sizeof buf, "%.17g", f[i]);
        out << buf << "\n";
        for (std::size_t a = res.size(); a-- > 0;) {
            if (++idx[a] < res[a]) break;
            idx[a] = 0;
        }
    }
}

void emit_report(const RunReport& report, const std::string& report_path, const std::string& dump_path)
{
    if (report_path.empty()) {
        std::cout << report_text(report);
    } else {
        std::ofstream out(report_path);
        if (!out) throw std::runtime_error("cannot open report file '" + report_path + "'");
        out << report_text(report);
        if (!out) throw std::runtime_error("failed writing report file '" + report_path + "'");
    }
    if (dump_path.empty()) return;
    if (!report.field) throw std::runtime_error("no field to dump for this command ('" + dump_path + "')");
    std::ofstream out(dump_path);
    if (!out) throw std::runtime_error("cannot open dump file '" + dump_path + "'");
    write_field_csv(*report.field, out);
    if (!out) throw std::runtime_error("failed writing dump file '" + dump_path + "'");
}

}  // namespace orbifold
