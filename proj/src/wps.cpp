#include "orbifold/wps.hpp"

#include "orbifold/smith.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <set>
#include <stdexcept>

namespace orbifold {

WeightSystem::WeightSystem(std::vector<long> q) : weights(std::move(q))
{
    if (weights.empty()) throw std::invalid_argument("empty weight system");
    long g = 0;
    for (long w : weights) {
        if (w <= 0) throw std::invalid_argument("weights must be positive");
        g = std::gcd(g, w);
    }
    if (g != 1) throw std::invalid_argument("weights must have gcd 1");
}

ExponentMatrix::ExponentMatrix(std::vector<std::vector<long>> a, std::vector<std::string> vars)
    : rows(std::move(a)), variables(std::move(vars))
{
    if (rows.empty() || rows[0].empty()) throw std::invalid_argument("empty exponent matrix");
    const std::size_t n = rows[0].size();
    for (const auto& r : rows) {
        if (r.size() != n) throw std::invalid_argument("ragged exponent matrix");
        for (long e : r)
            if (e < 0) throw std::invalid_argument("negative exponent");
    }
    for (std::size_t j = 0; j < n; ++j) {
        bool seen = false;
        for (const auto& r : rows) seen = seen || r[j] != 0;
        if (!seen) throw std::invalid_argument("variable " + std::to_string(j) + " does not appear");
    }
    if (variables.empty())
        for (std::size_t j = 0; j < n; ++j) variables.push_back("x" + std::to_string(j));
    if (variables.size() != n) throw std::invalid_argument("variable names do not match the column count");
}

namespace {

std::string strip(std::string_view s)
{
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_any(std::string_view s, std::string_view seps)
{
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (seps.find(c) != std::string_view::npos) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

bool all_digits(const std::string& s)
{
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

bool valid_name(const std::string& s)
{
    if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
    return std::all_of(s.begin(), s.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

}  // namespace

ExponentMatrix parse_monomials(std::string_view text, const std::vector<std::string>& variables)
{
    std::vector<std::string> names = variables;
    const bool fixed = !variables.empty();
    std::vector<std::vector<std::pair<std::size_t, long>>> terms;

    for (const auto& raw : split_any(text, ",+")) {
        const std::string mono = strip(raw);
        if (mono.empty()) throw std::invalid_argument("empty monomial in '" + std::string(text) + "'");
        std::vector<std::pair<std::size_t, long>> term;
        for (const auto& f_raw : split_any(mono, "* ")) {
            const std::string factor = strip(f_raw);
            if (factor.empty()) continue;
            if (all_digits(factor)) continue;  // coefficient
            const auto caret = factor.find('^');
            const std::string name = strip(factor.substr(0, caret));
            long power = 1;
            if (caret != std::string::npos) {
                const std::string p = strip(factor.substr(caret + 1));
                if (!all_digits(p)) throw std::invalid_argument("bad exponent in '" + factor + "'");
                power = std::stol(p);
            }
            if (!valid_name(name)) throw std::invalid_argument("bad variable name '" + name + "'");
            auto it = std::find(names.begin(), names.end(), name);
            if (it == names.end()) {
                if (fixed) throw std::invalid_argument("unknown variable '" + name + "'");
                names.push_back(name);
                it = names.end() - 1;
            }
            term.emplace_back(static_cast<std::size_t>(it - names.begin()), power);
        }
        if (term.empty()) throw std::invalid_argument("constant monomial '" + mono + "'");
        terms.push_back(std::move(term));
    }
    std::vector<std::vector<long>> rows(terms.size(), std::vector<long>(names.size(), 0));
    for (std::size_t i = 0; i < terms.size(); ++i)
        for (const auto& [j, p] : terms[i]) rows[i][j] += p;
    return ExponentMatrix(std::move(rows), std::move(names));
}

PhaseVector reduce_phases(PhaseVector v)
{
    for (auto& x : v) x = frac(x);
    return v;
}

std::string to_string(const PhaseVector& v)
{
    std::string s = "(";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + to_string(v[i]);
    return s + ")";
}

QuasiHomogeneity quasihomogeneous_weights(const ExponentMatrix& a)
{
    const std::size_t m = a.monomials(), n = a.num_variables();
    // Gauss-Jordan on [A | 1] over Q.
    std::vector<std::vector<Rational>> aug(m, std::vector<Rational>(n + 1, 1));
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) aug[i][j] = a.rows[i][j];
    std::vector<std::size_t> pivots;
    std::size_t r = 0;
    for (std::size_t c = 0; c < n && r < m; ++c) {
        std::size_t p = r;
        while (p < m && aug[p][c] == 0) ++p;
        if (p == m) continue;
        std::swap(aug[p], aug[r]);
        const Rational inv = 1 / aug[r][c];
        for (auto& x : aug[r]) x *= inv;
        for (std::size_t i = 0; i < m; ++i) {
            if (i == r || aug[i][c] == 0) continue;
            const Rational f = aug[i][c];
            for (std::size_t j = 0; j <= n; ++j) aug[i][j] -= f * aug[r][j];
        }
        pivots.push_back(c);
        ++r;
    }
    QuasiHomogeneity out;
    for (std::size_t i = r; i < m; ++i)
        if (aug[i][n] != 0) {
            out.reason = "inconsistent: no weights give every monomial degree 1";
            return out;
        }
    if (r < n) {
        out.reason = "weights are not unique";
        return out;
    }
    std::vector<Rational> c(n);
    for (std::size_t i = 0; i < r; ++i) c[pivots[i]] = aug[i][n];
    for (std::size_t j = 0; j < n; ++j)
        if (c[j] <= 0) {
            out.reason = "non-positive weight " + to_string(c[j]) + " for " + a.variables[j];
            return out;
        }
    Rational sum = 0;
    for (const auto& x : c) sum += x;
    out.is_calabi_yau_type = sum == 1;
    out.weights = std::move(c);
    return out;
}

bool cy_complete_intersection(const WeightSystem& q, const std::vector<long>& degrees)
{
    long d = 0;
    for (long x : degrees) {
        if (x <= 0) throw std::invalid_argument("degrees must be positive");
        d += x;
    }
    return d == std::accumulate(q.weights.begin(), q.weights.end(), 0L);
}

long divisor_class_degree(const std::vector<long>& a, const WeightSystem& q)
{
    if (a.size() != q.size()) throw std::invalid_argument("divisor and weight lengths differ");
    long d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) d += a[i] * q.weights[i];
    return d;
}

long canonical_class_degree(const WeightSystem& q)
{
    return -std::accumulate(q.weights.begin(), q.weights.end(), 0L);
}

bool fixes_monomials(const ExponentMatrix& a, const PhaseVector& theta)
{
    if (theta.size() != a.num_variables()) throw std::invalid_argument("phase vector length mismatch");
    for (const auto& row : a.rows) {
        Rational s = 0;
        for (std::size_t j = 0; j < row.size(); ++j) s += row[j] * theta[j];
        if (!is_integer(s)) return false;
    }
    return true;
}

Integer phase_order(const PhaseVector& v)
{
    Integer o = 1;
    for (const auto& x : v) o = lcm(o, Rational(frac(x)).get_den());
    return o;
}

DiagonalGroup diagonal_symmetry_group(const ExponentMatrix& a)
{
    const std::size_t m = a.monomials(), n = a.num_variables();
    IntMatrix mat(m, std::vector<Integer>(n));
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) mat[i][j] = a.rows[i][j];
    const auto snf = smith_normal_form(mat);
    if (snf.rank < n) throw std::invalid_argument("exponent matrix has rank < number of variables: infinite symmetry group");

    // theta = V phi, D phi == 0 mod 1  =>  phi_k in (1/d_k) Z.
    DiagonalGroup g;
    for (std::size_t k = 0; k < n; ++k) {
        const Integer& d = snf.diagonal[k];
        g.order *= d;
        if (d == 1) continue;
        PhaseVector gen(n);
        for (std::size_t i = 0; i < n; ++i) gen[i] = Rational(snf.v[i][k], d);
        g.generators.push_back(reduce_phases(gen));
    }
    const auto qh = quasihomogeneous_weights(a);
    if (qh.weights) {
        PhaseVector j = reduce_phases(*qh.weights);
        // A c = 1, so J fixes every monomial; check rather than assume.
        g.contains_J = fixes_monomials(a, j);
        if (g.contains_J) {
            g.j_order = phase_order(j);
            g.quotient_order = g.order / g.j_order;
        }
        g.J = std::move(j);
    }
    if (!g.contains_J) g.quotient_order = g.order;
    return g;
}

std::vector<PhaseVector> enumerate_group(const std::vector<PhaseVector>& generators, std::size_t dimension,
                                         std::size_t cap)
{
    std::vector<PhaseVector> gens;
    for (const auto& g : generators) {
        if (g.size() != dimension) throw std::invalid_argument("generator length mismatch");
        gens.push_back(reduce_phases(g));
    }
    std::set<PhaseVector> seen;
    std::vector<PhaseVector> out;
    PhaseVector id(dimension, Rational(0));
    seen.insert(id);
    out.push_back(id);
    for (std::size_t head = 0; head < out.size(); ++head) {
        for (const auto& g : gens) {
            PhaseVector next(dimension);
            for (std::size_t i = 0; i < dimension; ++i) next[i] = frac(out[head][i] + g[i]);
            if (seen.insert(next).second) {
                if (out.size() >= cap) throw std::length_error("group enumeration exceeds the cap");
                out.push_back(std::move(next));
            }
        }
    }
    return out;
}

TransposeResult bhk_transpose(const ExponentMatrix& a)
{
    if (!a.is_square()) throw std::invalid_argument("transpose needs a square exponent matrix");
    const std::size_t n = a.num_variables();
    std::vector<std::vector<long>> t(n, std::vector<long>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) t[j][i] = a.rows[i][j];
    ExponentMatrix m(std::move(t), a.variables);
    auto w = quasihomogeneous_weights(m);
    return {std::move(m), std::move(w)};
}

PhasePoint::PhasePoint(std::vector<std::optional<Rational>> c) : coords(std::move(c))
{
    bool any = false;
    for (auto& x : coords)
        if (x) {
            any = true;
            *x = frac(*x);
        }
    if (!any) throw std::invalid_argument("point with every coordinate zero");
}

PhasePoint PhasePoint::parse(std::string_view text)
{
    std::vector<std::optional<Rational>> c;
    for (const auto& raw : split_any(text, ",")) {
        const std::string s = strip(raw);
        if (s == "-" || s == "ZERO" || s == "zero") c.emplace_back(std::nullopt);
        else c.emplace_back(parse_rational(s));
    }
    return PhasePoint(std::move(c));
}

std::string PhasePoint::str() const
{
    std::string s = "[";
    for (std::size_t i = 0; i < coords.size(); ++i) s += (i ? "," : "") + (coords[i] ? to_string(*coords[i]) : "-");
    return s + "]";
}

bool stabilizes(const PhaseVector& gamma, const WeightSystem& q, const PhasePoint& p)
{
    if (gamma.size() != q.size() || p.coords.size() != q.size()) throw std::invalid_argument("dimension mismatch");
    std::size_t i0 = 0;
    while (!p.coords[i0]) ++i0;
    // gamma_i p_i = lambda^{q_i} p_i on the support; lambda = e^{2 pi i mu}.
    const long qi0 = q.weights[i0];
    for (long j = 0; j < qi0; ++j) {
        const Rational mu = (gamma[i0] + j) / Rational(qi0);
        bool ok = true;
        for (std::size_t i = 0; i < q.size() && ok; ++i)
            if (p.coords[i]) ok = is_integer(gamma[i] - mu * q.weights[i]);
        if (ok) return true;
    }
    return false;
}

long stabilizer_order(const PhaseVector& generator, long gen_order, const WeightSystem& q, const PhasePoint& p)
{
    if (gen_order <= 0) throw std::invalid_argument("generator order must be positive");
    PhaseVector g = reduce_phases(generator);
    for (const auto& x : g)
        if (!is_integer(x * gen_order)) throw std::invalid_argument("generator order does not annihilate the generator");
    long count = 0;
    for (long k = 0; k < gen_order; ++k) {
        PhaseVector gamma(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) gamma[i] = frac(k * g[i]);
        if (stabilizes(gamma, q, p)) ++count;
    }
    return count;
}

long stabilizer_order(const std::vector<PhaseVector>& generators, const WeightSystem& q, const PhasePoint& p,
                      std::size_t cap)
{
    long count = 0;
    for (const auto& gamma : enumerate_group(generators, q.size(), cap))
        if (stabilizes(gamma, q, p)) ++count;
    return count;
}

}  // namespace orbifold
