// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include "orbifold/ma_solver.hpp"
#include "orbifold/polytope.hpp"
#include "orbifold/signatures.hpp"
#include "orbifold/smith.hpp"
#include "orbifold/wps.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>

using namespace orbifold;

namespace {

constexpr double pi = std::numbers::pi;

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what)
    {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

int failures = 0;

void criterion(int id, const std::string& title, const std::function<void(Outcome&)>& body)
{
    Outcome out;
    const auto start = std::chrono::steady_clock::now();
    try {
        body(out);
    } catch (const std::exception& e) {
        out.pass = false;
        out.detail << " [exception: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!out.pass) ++failures;
    std::printf("%s %2d %s (%.2f s)%s\n", out.pass ? "PASS" : "FAIL", id, title.c_str(), secs, out.detail.str().c_str());
    std::fflush(stdout);
}

double elapsed(std::chrono::steady_clock::time_point start)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

SpectralField log_field(const SpectralField& f)
{
    return pointwise_map(f, [](double v) { return std::log(v); });
}

SpectralField manufactured(const OrbifoldPtr& orb, const Resolution& res, double a)
{
    return SpectralField::from_function(
        orb, res, [a](std::span<const double> u) { return a * std::cos(2 * pi * u[0]) * std::cos(2 * pi * u[2]); });
}

// Largest Newton iteration count at any t-node.
int max_iterations(const MASolution& s)
{
    int m = 0;
    for (const auto& r : s.residual_history) m = std::max(m, r.iteration);
    return m;
}

double max_volume_error(const MASolution& s)
{
    double m = 0.0;
    for (const auto& r : s.residual_history) m = std::max(m, r.volume_error);
    return m;
}

// r_{k+1} <= K r_k^2 once r_k < 1e-2, for steps still above the round-off floor.
// Every t-node that starts above the floor must contribute at least one checked step.
bool quadratic_decay(const MASolution& s, double floor, std::ostringstream& detail)
{
    constexpr double K = 10.0;
    const auto& h = s.residual_history;
    bool ok = true;
    for (std::size_t i = 0; i < h.size(); ++i) {
        if (h[i].iteration != 0 || h[i].residual <= floor) continue;
        int checked = 0;
        for (std::size_t j = i + 1; j < h.size() && h[j].t == h[i].t; ++j) {
            if (h[j].residual <= floor) break;
            if (h[j - 1].residual >= 1e-2) continue;
            ++checked;
            if (h[j].residual > K * h[j - 1].residual * h[j - 1].residual) ok = false;
        }
        if (checked == 0) ok = false;
    }
    if (!ok) detail << " non-quadratic step";
    return ok;
}

struct Solved {
    std::string label;
    MASolution sol;
};
std::vector<Solved> solved;  // instances of criteria 3 and 4, reused by 6 and 10

void elliptic_classification(Outcome& out)
{
    const auto start = std::chrono::steady_clock::now();
    const auto g0 = enumerate_flat(0);
    std::set<std::vector<int>> got;
    for (const auto& s : g0) got.insert(s.orders);
    const std::set<std::vector<int>> want{{2, 2, 2, 2}, {4, 4, 2}, {6, 3, 2}, {3, 3, 3}};
    out.require(g0.size() == 4 && got == want, "genus 0 list");
    for (int g = 1; g <= 5; ++g) out.require(enumerate_flat(g).empty(), "genus " + std::to_string(g) + " not empty");
    const double t = elapsed(start);
    out.require(t < 1.0, "runtime");
    out.detail << " genus 0 -> " << g0.size() << " signatures";
}

void realization_round_trip(Outcome& out)
{
    const auto start = std::chrono::steady_clock::now();
    for (const auto& orders : std::vector<std::vector<int>>{{2, 2, 2, 2}, {4, 4, 2}, {6, 3, 2}, {3, 3, 3}}) {
        const OrbifoldSignature sig(0, orders);
        const auto back = fixed_point_data(*realize(sig));
        out.require(back == sig, sig.str() + " came back as " + back.str());
        out.detail << " " << back.str();
    }
    out.require(elapsed(start) < 1.0, "runtime");
}

void n1_exactness(Outcome& out)
{
    const auto start = std::chrono::steady_clock::now();
    auto orb = preset_orbifold("pillowcase");
    const Resolution res{256, 256};
    auto F = SpectralField::from_function(
        orb, res, [](std::span<const double> u) { return 0.5 * (std::cos(2 * pi * u[0]) + std::cos(2 * pi * u[1])); });
    auto sol = solve_continuity(normalize_F(F));
    const auto& last = sol.residual_history.back();
    out.require(sol.final_t == 1.0, "reached t = 1");
    out.require(last.grid_residual <= 1e-10 && last.residual <= 1e-10, "sup residual");
    out.require(max_iterations(sol) <= 2, "Newton iterations per node");
    auto rhs = pointwise_map(sol.F, [](double v) { return std::exp(v) - 1.0; });
    const double err = max_abs_difference(sol.phi, green_solve(rhs));
    out.require(err <= 1e-10, "green_solve match");
    const double t = elapsed(start);
    out.require(t < 10.0, "runtime");
    out.detail << " sup residual " << last.grid_residual << ", iterations <= " << max_iterations(sol) << ", error " << err;
    solved.push_back({"pillowcase 256^2", std::move(sol)});
}

void n2_manufactured(Outcome& out)
{
    const auto start = std::chrono::steady_clock::now();
    for (const char* name : {"T4", "T4_Z2"}) {
        auto orb = preset_orbifold(name);
        const Resolution res{32, 32, 32, 32};
        auto star = manufactured(orb, res, 0.05);
        auto sol = solve_continuity(log_field(ma_density(star)));
        auto expect = star;
        expect += -star.mean();
        const double err = max_abs_difference(sol.phi, expect);
        out.require(sol.final_t == 1.0, std::string(name) + " reached t = 1");
        out.require(err <= 1e-8, std::string(name) + " error");
        out.require(quadratic_decay(sol, 1e-12, out.detail), std::string(name) + " quadratic decay");
        out.detail << " " << name << " error " << err;
        solved.push_back({std::string(name) + " 32^4", std::move(sol)});
    }
    const double t = elapsed(start);
    out.require(t < 300.0, "runtime");
}

void uniqueness(Outcome& out)
{
    struct Case {
        const char* name;
        Resolution res;
        double a;
    };
    for (const Case& c : {Case{"pillowcase", {64, 64}, 0.3}, Case{"T4_Z2", {12, 12, 12, 12}, 0.05}}) {
        auto orb = preset_orbifold(c.name);
        const bool one = orb->complex_dim() == 1;
        auto F = SpectralField::from_function(orb, c.res, [&](std::span<const double> u) {
            return one ? c.a * (std::cos(2 * pi * u[0]) + std::cos(2 * pi * u[1]))
                       : c.a * std::cos(2 * pi * u[0]) * std::cos(2 * pi * u[2]) + c.a * std::cos(2 * pi * (u[1] + u[3]));
        });
        F = project_invariant(F);
        std::mt19937_64 rng(17);
        auto guess = random_band_limited(orb, c.res, 2, rng);
        guess = project_invariant(guess);
        guess *= 0.01 / guess.sup_norm();

        auto a = solve_continuity(F);
        auto b = solve_continuity(F, {}, Mode::prescribed_volume, guess);
        auto pa = a.phi, pb = b.phi;
        pa += -pa.mean();
        pb += -pb.mean();
        const double d = max_abs_difference(pa, pb);
        out.require(d <= 1e-8, std::string(c.name) + " continuity");

        auto ka = solve_ke(F);
        auto kb = solve_ke(F, {}, guess);
        const double dk = max_abs_difference(ka.phi, kb.phi);
        out.require(dk <= 1e-8, std::string(c.name) + " KE");
        out.detail << " " << c.name << ": " << d << " / KE " << dk;
    }
}

void volume_conservation(Outcome& out)
{
    out.require(!solved.empty(), "no solved instances");
    for (const auto& s : solved) {
        const double v = max_volume_error(s.sol);
        out.require(v <= 1e-12, s.label);
        out.detail << " " << s.label << " " << v;
    }
}

void green_identity(Outcome& out)
{
    double worst = 0.0;
    for (const auto& [name, res] : std::vector<std::pair<std::string, Resolution>>{
             {"torus_square", {64, 64}}, {"pillowcase", {64, 64}}, {"T4", {16, 16, 16, 16}}, {"T4_Z2", {16, 16, 16, 16}}}) {
        auto orb = preset_orbifold(name);
        std::mt19937_64 rng(3);
        const std::size_t total = grid_size(res);
        std::uniform_int_distribution<std::size_t> pick(0, total - 1);
        std::vector<std::size_t> xs;
        std::vector<SpectralField> kernels;
        for (int i = 0; i < 5; ++i) {
            xs.push_back(pick(rng));
            kernels.push_back(green_kernel(orb, res, xs.back()));
        }
        double w = 0.0;
        for (int s = 0; s < 20; ++s) {
            auto phi = random_band_limited(orb, res, 4, rng);
            auto lap = laplacian(phi);
            for (std::size_t i = 0; i < xs.size(); ++i)
                w = std::max(w, std::abs(integrate(pointwise_product(kernels[i], lap)) - (phi.mean() - phi[xs[i]])));
        }
        out.require(w <= 1e-10, name);
        worst = std::max(worst, w);
    }
    out.detail << " worst " << worst;
}

void poincare(Outcome& out)
{
    auto torus = preset_orbifold("torus_square");
    for (int n : {32, 64}) {
        const double lambda = poincare_lambda(torus, {n, n});
        out.require(std::abs(lambda - pi * pi) <= 1e-6, "lambda_1 at " + std::to_string(n));
        out.detail << " lambda_1(" << n << ") - pi^2 = " << lambda - pi * pi;
    }
    double worst = 0.0;
    for (const char* name : {"torus_square", "pillowcase"}) {
        auto orb = preset_orbifold(name);
        const Resolution res{64, 64};
        const double lambda = poincare_lambda(orb, res);
        std::mt19937_64 rng(8);
        for (int s = 0; s < 100; ++s) {
            auto phi = project_invariant(random_band_limited(orb, res, 6, rng, true));
            phi += -phi.mean();
            const double lhs = std::sqrt(integrate(pointwise_product(phi, phi)));
            const double rhs = std::sqrt(integrate(grad_sq(phi)) / lambda);
            out.require(lhs <= rhs * (1 + 1e-8), std::string(name) + " inequality");
            worst = std::max(worst, lhs / rhs);
        }
    }
    out.detail << ", max ratio " << worst;
}

void sobolev(Outcome& out)
{
    auto orb = preset_orbifold("T4");
    const auto coarse = sobolev_probe(orb, {16, 16, 16, 16}, 100, 0);
    const auto fine = sobolev_probe(orb, {32, 32, 32, 32}, 100, 0);
    out.require(coarse.all_finite && fine.all_finite && std::isfinite(coarse.max_ratio) && std::isfinite(fine.max_ratio),
                "finite");
    const double change = std::abs(fine.max_ratio - coarse.max_ratio) / fine.max_ratio;
    out.require(change < 0.05, "grid change");
    out.detail << " 16^4 " << coarse.max_ratio << ", 32^4 " << fine.max_ratio << ", change " << change;
}

void estimate_diagnostics(Outcome& out)
{
    out.require(!solved.empty(), "no solved instances");
    for (const auto& s : solved) {
        const auto& d = s.sol.diagnostics;
        out.require(d.equivalence_min > 0 && d.equivalence_max >= d.equivalence_min, s.label + " equivalence");
        out.require(std::isfinite(d.s_norm_sup), s.label + " s_norm");
        out.require(d.lemma52_margin >= -1e-8, s.label + " margin");
        out.detail << " " << s.label << ": [" << d.equivalence_min << ", " << d.equivalence_max << "] margin "
                   << d.lemma52_margin << ";";
    }
}

// All phase vectors k/N (N = |det A|) fixing every monomial.
long brute_force_order(const ExponentMatrix& a)
{
    IntMatrix m(a.rows.size(), std::vector<Integer>(a.num_variables()));
    for (std::size_t i = 0; i < a.rows.size(); ++i)
        for (std::size_t j = 0; j < a.num_variables(); ++j) m[i][j] = a.rows[i][j];
    const long n = std::abs(determinant(m).get_si());
    const std::size_t v = a.num_variables();
    long count = 0;
    std::vector<long> k(v, 0);
    while (true) {
        PhaseVector g(v);
        for (std::size_t j = 0; j < v; ++j) g[j] = Rational(k[j], n);
        if (fixes_monomials(a, g)) ++count;
        std::size_t j = 0;
        while (j < v && ++k[j] == n) k[j++] = 0;
        if (j == v) break;
    }
    return count;
}

void wps_algebra(Outcome& out)
{
    const auto chain = parse_monomials("x^2*y, y^3, x*z^2");
    const auto q = quasihomogeneous_weights(chain);
    out.require(q.weights && *q.weights == PhaseVector{Rational(1, 3), Rational(1, 3), Rational(1, 3)}, "weights");
    const auto fermat = parse_monomials("x^3, y^3, z^3");
    const auto gf = diagonal_symmetry_group(fermat);
    const auto gc = diagonal_symmetry_group(chain);
    out.require(gf.order == 27 && brute_force_order(fermat) == 27, "Fermat |G_max|");
    out.require(gc.order == 12 && brute_force_order(chain) == 12, "x^2y+y^3+xz^2 |G_max|");
    out.require(static_cast<long>(enumerate_group(gc.generators, 3).size()) == 12, "generated group size");
    out.require(gf.contains_J && gc.contains_J, "J membership");
    out.require(cy_complete_intersection(WeightSystem({1, 1, 1}), {3}), "cubic is CY");
    out.detail << " weights " << to_string(*q.weights) << ", |G_max| " << gf.order.get_str() << " and " << gc.order.get_str();
}

void stabilizers(Outcome& out)
{
    const WeightSystem p2({1, 1, 1});
    auto pattern = [&](const std::vector<PhaseVector>& gens, long order, const std::vector<const char*>& points) {
        std::vector<long> s;
        for (const char* p : points)
            s.push_back(gens.size() == 1 ? stabilizer_order(gens[0], order, p2, PhasePoint::parse(p))
                                         : stabilizer_order(gens, p2, PhasePoint::parse(p)));
        return s;
    };
    const auto a = pattern({{Rational(2, 4), 0, Rational(1, 4)}}, 4, {"0,-,-", "-,-,0", "0,1/4,-"});
    const auto b = pattern({{Rational(4, 6), 0, Rational(1, 6)}}, 6, {"-,-,0", "0,-,1/4", "0,1/2,-"});
    const auto c = pattern({{0, Rational(1, 3), 0}, {0, 0, Rational(1, 3)}}, 0, {"1/2,-,1/3", "-,1/2,1/3", "1/2,1/3,-"});
    out.require(a == std::vector<long>{4, 4, 2}, "Z4 pattern");
    out.require(b == std::vector<long>{6, 3, 2}, "Z6 pattern");
    out.require(c == std::vector<long>{3, 3, 3}, "Z3xZ3 pattern");
    for (const auto* v : {&a, &b, &c}) out.detail << " (" << (*v)[0] << "," << (*v)[1] << "," << (*v)[2] << ")";
}

std::set<LatticePoint> as_set(const std::vector<LatticePoint>& v) { return {v.begin(), v.end()}; }

void polytope_duality(Outcome& out)
{
    const std::vector<std::vector<LatticePoint>> reflexive{
        {{-1}, {1}},
        {{1, 1}, {1, -1}, {-1, 1}, {-1, -1}},
        {{1, 0}, {-1, 0}, {0, 1}, {0, -1}},
        {{-1, -1}, {2, -1}, {-1, 2}},
        {{1, 1, 1}, {1, 1, -1}, {1, -1, 1}, {1, -1, -1}, {-1, 1, 1}, {-1, 1, -1}, {-1, -1, 1}, {-1, -1, -1}},
        {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}}};
    for (const auto& pts : reflexive) {
        LatticePolytope p(pts);
        out.require(is_reflexive(p), "reflexive " + std::to_string(pts.size()) + " vertices");
        out.require(as_set(polar_dual(polar_dual(p)).vertices()) == as_set(pts), "involution");
    }
    out.require(!is_reflexive(LatticePolytope({{0, 0}, {1, 0}, {0, 1}})), "shifted simplex");
    const auto d = polar_dual(LatticePolytope({{-1, -1}, {2, -1}, {-1, 2}}));
    out.require(as_set(d.vertices()) == std::set<LatticePoint>{{1, 0}, {0, 1}, {-1, -1}}, "P2 dual");
    out.detail << " 6 reflexive examples, P2 dual " << to_string(d.vertices()[0]) << ";" << to_string(d.vertices()[1]) << ";"
               << to_string(d.vertices()[2]);
}

std::set<std::set<LatticePoint>> blocks(const LatticePolytope& p, const NefPartition& e)
{
    std::set<std::set<LatticePoint>> out;
    for (const auto& part : e) {
        std::set<LatticePoint> b;
        for (auto i : part) b.insert(p.vertices()[i]);
        out.insert(b);
    }
    return out;
}

void nef_duality(Outcome& out)
{
    const LatticePolytope cross({{1, 0}, {-1, 0}, {0, 1}, {0, -1}});
    const NefPartition e{{0, 1}, {2, 3}};
    out.require(nef_partition_check(cross, e).ok, "check");
    const auto d1 = dual_nef_partition(cross, e);
    out.require(is_reflexive(d1.polytope), "dual reflexive");
    bool valid = true;
    try {
        validate_partition(d1.polytope, d1.partition);
    } catch (const std::invalid_argument&) {
        valid = false;
    }
    out.require(valid, "dual partition valid");
    const auto d2 = dual_nef_partition(d1.polytope, d1.partition);
    out.require(as_set(d2.polytope.vertices()) == as_set(cross.vertices()) && blocks(d2.polytope, d2.partition) == blocks(cross, e),
                "double dual");
    const std::vector<std::vector<LatticePoint>> examples{
        {{-1}, {1}},
        {{1, 1}, {1, -1}, {-1, 1}, {-1, -1}},
        {{-1, -1}, {2, -1}, {-1, 2}},
        {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}}};
    for (const auto& pts : examples) {
        LatticePolytope p(pts);
        NefPartition all(1);
        for (std::size_t j = 0; j < pts.size(); ++j) all[0].push_back(j);
        const auto d = dual_nef_partition(p, all);
        out.require(as_set(d.polytope.vertices()) == as_set(polar_dual(p).vertices()), "s = 1 reduces to polar_dual");
    }
    out.detail << " dual " << to_string(d1.partition);
}

}  // namespace

int main()
{
    criterion(1, "elliptic classification", elliptic_classification);
    criterion(2, "realization round trip", realization_round_trip);
    criterion(3, "n = 1 solver exactness on the pillowcase", n1_exactness);
    criterion(4, "n = 2 manufactured solution on T4 and T4/+-1", n2_manufactured);
    criterion(5, "uniqueness of solutions", uniqueness);
    criterion(6, "volume conservation along Newton", volume_conservation);
    criterion(7, "Green identity", green_identity);
    criterion(8, "Poincare constant and inequality", poincare);
    criterion(9, "Sobolev probe stability", sobolev);
    criterion(10, "estimate diagnostics", estimate_diagnostics);
    criterion(11, "WPS algebra", wps_algebra);
    criterion(12, "stabilizer orders", stabilizers);
    criterion(13, "polytope duality", polytope_duality);
    criterion(14, "nef duality", nef_duality);
    std::printf("%d of 14 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
