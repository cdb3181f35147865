#include "orbifold/polytope.hpp"

#include "orbifold/exact.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <optional>
#include <set>
#include <stdexcept>

namespace orbifold {

namespace {

using Matrix = std::vector<LatticePoint>;

long dot(const LatticePoint& a, const LatticePoint& b)
{
    long s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Dense square block of size <= 4, row-major.
struct Small {
    std::size_t n = 0;
    long a[16] = {};
    long& at(std::size_t r, std::size_t c) { return a[r * 4 + c]; }
    long at(std::size_t r, std::size_t c) const { return a[r * 4 + c]; }
};

long det(const Small& m)
{
    const std::size_t n = m.n;
    if (n == 0) return 1;
    if (n == 1) return m.at(0, 0);
    if (n == 2) return m.at(0, 0) * m.at(1, 1) - m.at(0, 1) * m.at(1, 0);
    long s = 0;
    for (std::size_t c = 0; c < n; ++c) {
        if (m.at(0, c) == 0) continue;
        Small minor;
        minor.n = n - 1;
        for (std::size_t r = 1; r < n; ++r)
            for (std::size_t k = 0, kk = 0; k < n; ++k)
                if (k != c) minor.at(r - 1, kk++) = m.at(r, k);
        s += (c % 2 ? -1 : 1) * m.at(0, c) * det(minor);
    }
    return s;
}

std::size_t rank(const Matrix& rows, std::size_t d)
{
    std::vector<std::vector<Rational>> a;
    for (const auto& r : rows) a.emplace_back(r.begin(), r.end());
    std::size_t rk = 0;
    for (std::size_t c = 0; c < d && rk < a.size(); ++c) {
        std::size_t p = rk;
        while (p < a.size() && a[p][c] == 0) ++p;
        if (p == a.size()) continue;
        std::swap(a[p], a[rk]);
        for (std::size_t i = rk + 1; i < a.size(); ++i) {
            if (a[i][c] == 0) continue;
            const Rational f = a[i][c] / a[rk][c];
            for (std::size_t j = c; j < d; ++j) a[i][j] -= f * a[rk][j];
        }
        ++rk;
    }
    return rk;
}

// Vector orthogonal to the d-1 rows.
LatticePoint cross(const Matrix& rows, std::size_t d)
{
    LatticePoint n(d);
    for (std::size_t i = 0; i < d; ++i) {
        Small minor;
        minor.n = d - 1;
        for (std::size_t r = 0; r + 1 < d; ++r)
            for (std::size_t k = 0, kk = 0; k < d; ++k)
                if (k != i) minor.at(r, kk++) = rows[r][k];
        n[i] = (i % 2 ? -1 : 1) * det(minor);
    }
    return n;
}

LatticePoint primitive(LatticePoint v)
{
    long g = 0;
    for (long x : v) g = std::gcd(g, std::abs(x));
    if (g > 1)
        for (auto& x : v) x /= g;
    return v;
}

// Calls f on every k-subset of {0..n-1}.
template <class F>
void for_each_subset(std::size_t n, std::size_t k, F&& f)
{
    if (k > n) return;
    std::vector<std::size_t> idx(k);
    std::iota(idx.begin(), idx.end(), 0);
    while (true) {
        f(idx);
        std::size_t i = k;
        while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
        if (i == 0) return;
        ++idx[i - 1];
        for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
}

std::size_t check_dimension(const std::vector<LatticePoint>& pts)
{
    if (pts.empty()) throw std::invalid_argument("polytope without points");
    const std::size_t d = pts[0].size();
    if (d < 1 || d > 4) throw std::invalid_argument("polytope dimension must be 1..4");
    if (pts.size() > 64) throw std::invalid_argument("at most 64 points supported");
    for (const auto& p : pts)
        if (p.size() != d) throw std::invalid_argument("points of mixed dimension");
    Matrix diffs;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        LatticePoint v(d);
        for (std::size_t k = 0; k < d; ++k) v[k] = pts[i][k] - pts[0][k];
        diffs.push_back(std::move(v));
    }
    if (rank(diffs, d) < d) throw std::invalid_argument("polytope is not full-dimensional");
    return d;
}

std::vector<Facet> hull_facets(const std::vector<LatticePoint>& pts, std::size_t d)
{
    std::set<LatticePoint> seen;
    std::vector<Facet> out;
    for_each_subset(pts.size(), d, [&](const std::vector<std::size_t>& idx) {
        Matrix diffs;
        for (std::size_t i = 1; i < d; ++i) {
            LatticePoint v(d);
            for (std::size_t k = 0; k < d; ++k) v[k] = pts[idx[i]][k] - pts[idx[0]][k];
            diffs.push_back(std::move(v));
        }
        LatticePoint n = cross(diffs, d);
        if (std::all_of(n.begin(), n.end(), [](long x) { return x == 0; })) return;
        n = primitive(n);
        const long h = dot(pts[idx[0]], n);
        bool above = true, below = true;
        for (const auto& p : pts) {
            const long v = dot(p, n);
            above = above && v >= h;
            below = below && v <= h;
        }
        Facet f;
        if (above) f = {n, -h};
        else if (below) {
            for (auto& x : n) x = -x;
            f = {n, h};
        } else {
            return;
        }
        if (seen.insert(f.normal).second) out.push_back(std::move(f));
    });
    std::sort(out.begin(), out.end(), [](const Facet& a, const Facet& b) { return a.normal < b.normal; });
    return out;
}

bool is_vertex_of(const LatticePoint& v, const std::vector<Facet>& facets, std::size_t d)
{
    Matrix tight;
    for (const auto& f : facets)
        if (dot(v, f.normal) == -f.offset) tight.push_back(f.normal);
    return rank(tight, d) == d;
}

std::string trim(std::string_view s)
{
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

}  // namespace

LatticePolytope::LatticePolytope(std::vector<LatticePoint> vertices)
{
    dim_ = check_dimension(vertices);
    std::set<LatticePoint> uniq(vertices.begin(), vertices.end());
    if (uniq.size() != vertices.size()) throw std::invalid_argument("repeated vertex");
    const auto facets = hull_facets(vertices, dim_);
    for (const auto& v : vertices)
        if (!is_vertex_of(v, facets, dim_)) throw std::invalid_argument("point " + to_string(v) + " is not a vertex");
    vertices_ = std::move(vertices);
}

LatticePolytope LatticePolytope::from_points(const std::vector<LatticePoint>& points)
{
    std::vector<LatticePoint> uniq;
    std::set<LatticePoint> seen;
    for (const auto& p : points)
        if (seen.insert(p).second) uniq.push_back(p);
    const std::size_t d = check_dimension(uniq);
    const auto facets = hull_facets(uniq, d);
    std::vector<LatticePoint> verts;
    for (const auto& p : uniq)
        if (is_vertex_of(p, facets, d)) verts.push_back(p);
    return LatticePolytope(std::move(verts));
}

LatticePolytope LatticePolytope::parse(std::string_view text)
{
    std::vector<LatticePoint> pts;
    std::string cur;
    auto flush = [&] {
        std::string t = trim(cur);
        cur.clear();
        if (t.empty()) return;
        if (t.front() == '(') t.erase(0, 1);
        if (!t.empty() && t.back() == ')') t.pop_back();
        LatticePoint p;
        for (long x : parse_int_list(t)) p.push_back(x);
        pts.push_back(std::move(p));
    };
    for (char c : text) {
        if (c == ';') flush();
        else cur += c;
    }
    flush();
    return LatticePolytope(std::move(pts));
}

std::vector<Facet> facet_system(const LatticePolytope& p) { return hull_facets(p.vertices(), p.dim()); }

bool is_reflexive(const LatticePolytope& p)
{
    for (const auto& f : facet_system(p))
        if (f.offset != 1) return false;
    return true;
}

LatticePolytope polar_dual(const LatticePolytope& p)
{
    if (!is_reflexive(p)) throw std::invalid_argument("polar dual of a non-reflexive polytope is not a lattice polytope");
    std::vector<LatticePoint> verts;
    for (const auto& f : facet_system(p)) verts.push_back(f.normal);
    return LatticePolytope(std::move(verts));
}

namespace {

std::vector<LatticePoint> points_in(const LatticePolytope& p, bool strict)
{
    const std::size_t d = p.dim();
    LatticePoint lo = p.vertices()[0], hi = lo;
    for (const auto& v : p.vertices())
        for (std::size_t k = 0; k < d; ++k) lo[k] = std::min(lo[k], v[k]), hi[k] = std::max(hi[k], v[k]);
    const auto facets = facet_system(p);
    std::vector<LatticePoint> out;
    LatticePoint m = lo;
    while (true) {
        bool in = true;
        for (const auto& f : facets) {
            const long s = dot(m, f.normal) + f.offset;
            if (s < 0 || (strict && s == 0)) {
                in = false;
                break;
            }
        }
        if (in) out.push_back(m);
        std::size_t k = 0;
        while (k < d && m[k] == hi[k]) m[k] = lo[k], ++k;
        if (k == d) break;
        ++m[k];
    }
    return out;
}

}  // namespace

std::vector<LatticePoint> lattice_points(const LatticePolytope& p) { return points_in(p, false); }
std::vector<LatticePoint> interior_lattice_points(const LatticePolytope& p) { return points_in(p, true); }

NefPartition parse_partition(std::string_view text)
{
    NefPartition e;
    std::string cur;
    auto flush = [&] {
        std::vector<std::size_t> part;
        for (long x : parse_int_list(trim(cur))) {
            if (x < 0) throw std::invalid_argument("negative vertex index");
            part.push_back(static_cast<std::size_t>(x));
        }
        e.push_back(std::move(part));
        cur.clear();
    };
    for (char c : text) {
        if (c == '|') flush();
        else cur += c;
    }
    flush();
    return e;
}

std::string to_string(const NefPartition& e)
{
    std::string s;
    for (std::size_t i = 0; i < e.size(); ++i) {
        if (i) s += "|";
        for (std::size_t j = 0; j < e[i].size(); ++j) s += (j ? "," : "") + std::to_string(e[i][j]);
    }
    return s;
}

std::string to_string(const LatticePoint& v)
{
    std::string s = "(";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s + ")";
}

void validate_partition(const LatticePolytope& p, const NefPartition& e)
{
    if (e.empty()) throw std::invalid_argument("empty partition");
    std::vector<int> hits(p.vertices().size(), 0);
    for (const auto& part : e) {
        if (part.empty()) throw std::invalid_argument("empty part in partition");
        for (std::size_t j : part) {
            if (j >= hits.size()) throw std::invalid_argument("vertex index " + std::to_string(j) + " out of range");
            ++hits[j];
        }
    }
    for (std::size_t j = 0; j < hits.size(); ++j)
        if (hits[j] != 1) throw std::invalid_argument("vertex " + std::to_string(j) + " is not in exactly one part");
}

namespace {

// Solve l . v = value(v) for the vertices on one facet; nullopt when inconsistent.
std::optional<std::vector<Rational>> interpolate(const std::vector<LatticePoint>& pts, const std::vector<long>& vals,
                                                 std::size_t d)
{
    std::vector<std::vector<Rational>> a;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        std::vector<Rational> row(pts[i].begin(), pts[i].end());
        row.emplace_back(vals[i]);
        a.push_back(std::move(row));
    }
    std::vector<std::size_t> pivots;
    std::size_t r = 0;
    for (std::size_t c = 0; c < d && r < a.size(); ++c) {
        std::size_t p = r;
        while (p < a.size() && a[p][c] == 0) ++p;
        if (p == a.size()) continue;
        std::swap(a[p], a[r]);
        const Rational inv = 1 / a[r][c];
        for (auto& x : a[r]) x *= inv;
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (i == r || a[i][c] == 0) continue;
            const Rational f = a[i][c];
            for (std::size_t j = 0; j <= d; ++j) a[i][j] -= f * a[r][j];
        }
        pivots.push_back(c);
        ++r;
    }
    for (std::size_t i = r; i < a.size(); ++i)
        if (a[i][d] != 0) return std::nullopt;
    if (r < d) throw std::logic_error("facet vertices do not span");  // impossible for 0 in the interior
    std::vector<Rational> l(d);
    for (std::size_t i = 0; i < r; ++i) l[pivots[i]] = a[i][d];
    return l;
}

std::vector<long> indicator(const LatticePolytope& p, const std::vector<std::size_t>& part)
{
    std::vector<long> v(p.vertices().size(), 0);
    for (std::size_t j : part) v[j] = 1;
    return v;
}

// Vertices of { n : <a_j, n> >= b_j }; bounded systems only.
std::vector<LatticePoint> h_to_v(const std::vector<LatticePoint>& a, const std::vector<long>& b, std::size_t d)
{
    std::set<LatticePoint> out;
    for_each_subset(a.size(), d, [&](const std::vector<std::size_t>& idx) {
        Small m;
        m.n = d;
        for (std::size_t r = 0; r < d; ++r)
            for (std::size_t k = 0; k < d; ++k) m.at(r, k) = a[idx[r]][k];
        long den = det(m);
        if (den == 0) return;
        LatticePoint num(d);
        for (std::size_t k = 0; k < d; ++k) {
            Small mk = m;
            for (std::size_t r = 0; r < d; ++r) mk.at(r, k) = b[idx[r]];
            num[k] = det(mk);
        }
        if (den < 0) {
            den = -den;
            for (auto& x : num) x = -x;
        }
        for (std::size_t j = 0; j < a.size(); ++j)
            if (dot(a[j], num) < b[j] * den) return;
        for (auto& x : num) {
            if (x % den != 0) throw std::logic_error("dual nef polytope has a non-integral vertex");
            x /= den;
        }
        out.insert(num);
    });
    return {out.begin(), out.end()};
}

}  // namespace

NefCheck nef_partition_check(const LatticePolytope& p, const NefPartition& e)
{
    validate_partition(p, e);
    if (!is_reflexive(p)) throw std::invalid_argument("nef partitions need a reflexive polytope");
    const std::size_t d = p.dim();
    const auto& verts = p.vertices();
    const auto facets = facet_system(p);

    for (std::size_t i = 0; i < e.size(); ++i) {
        const auto vals = indicator(p, e[i]);
        std::vector<std::vector<Rational>> pieces;
        for (const auto& f : facets) {
            std::vector<LatticePoint> on;
            std::vector<long> v;
            for (std::size_t j = 0; j < verts.size(); ++j)
                if (dot(verts[j], f.normal) == -f.offset) on.push_back(verts[j]), v.push_back(vals[j]);
            auto l = interpolate(on, v, d);
            if (!l) return {false, "part " + std::to_string(i) + " is not linear on the cone over facet " + to_string(f.normal)};
            for (const auto& x : *l)
                if (!is_integer(x))
                    return {false, "part " + std::to_string(i) + " is not integral on the cone over facet " + to_string(f.normal)};
            pieces.push_back(std::move(*l));
        }
        // Convex and piecewise linear on the face fan  <=>  every piece lies below the
        // vertex values everywhere.
        for (std::size_t k = 0; k < pieces.size(); ++k)
            for (std::size_t j = 0; j < verts.size(); ++j) {
                Rational s = 0;
                for (std::size_t c = 0; c < d; ++c) s += pieces[k][c] * verts[j][c];
                if (s > vals[j])
                    return {false, "part " + std::to_string(i) + " is not convex (facet " + to_string(facets[k].normal) +
                                       " at vertex " + to_string(verts[j]) + ")"};
            }
    }
    return {true, ""};
}

NefDual dual_nef_partition(const LatticePolytope& p, const NefPartition& e)
{
    const auto check = nef_partition_check(p, e);
    if (!check.ok) throw std::invalid_argument("not a nef partition: " + check.reason);
    const std::size_t d = p.dim();
    NefDual out;
    std::vector<LatticePoint> all;
    for (const auto& part : e) {
        auto vals = indicator(p, part);
        for (auto& v : vals) v = -v;
        auto verts = h_to_v(p.vertices(), vals, d);
        if (verts.empty()) throw std::logic_error("empty dual nef polytope");
        all.insert(all.end(), verts.begin(), verts.end());
        out.parts.push_back(std::move(verts));
    }
    out.polytope = LatticePolytope::from_points(all);
    if (!is_reflexive(out.polytope)) throw std::logic_error("dual nef polytope is not reflexive");

    const auto& dv = out.polytope.vertices();
    out.partition.assign(e.size(), {});
    for (std::size_t j = 0; j < dv.size(); ++j) {
        std::vector<std::size_t> owners;
        for (std::size_t i = 0; i < e.size(); ++i) {
            const auto vals = indicator(p, e[i]);
            bool in = true;
            for (std::size_t k = 0; k < p.vertices().size() && in; ++k) in = dot(p.vertices()[k], dv[j]) >= -vals[k];
            if (in) owners.push_back(i);
        }
        if (owners.size() != 1)
            throw std::logic_error("dual vertex " + to_string(dv[j]) + " lies in " + std::to_string(owners.size()) + " parts");
        out.partition[owners[0]].push_back(j);
    }
    for (const auto& part : out.partition)
        if (part.empty()) throw std::logic_error("dual partition has an empty part");
    return out;
}

}  // namespace orbifold
