#include "orbifold/quotient_orbifold.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <set>

namespace orbifold {

namespace {

constexpr double kGeometryTol = 1e-9;

std::atomic<std::uint64_t> next_orbifold_id{1};

bool is_hermitian(const Eigen::MatrixXcd& m, double tol)
{
    return m.rows() == m.cols() && (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace

PeriodData::PeriodData(Eigen::MatrixXcd period_matrix_, Eigen::MatrixXcd metric)
    : complex_dim(static_cast<int>(period_matrix_.rows())),
      period_matrix(std::move(period_matrix_)),
      background_metric(std::move(metric))
{
    validate();
}

PeriodData::PeriodData(Eigen::MatrixXcd period_matrix_)
    : PeriodData(period_matrix_, Eigen::MatrixXcd::Identity(period_matrix_.rows(), period_matrix_.rows()))
{
}

Eigen::MatrixXd PeriodData::real_periods() const
{
    const int n = complex_dim;
    Eigen::MatrixXd p(2 * n, 2 * n);
    p.topRows(n) = period_matrix.real();
    p.bottomRows(n) = period_matrix.imag();
    return p;
}

double PeriodData::torus_volume() const
{
    return std::abs(real_periods().determinant()) * background_metric.determinant().real();
}

void PeriodData::validate() const
{
    const int n = complex_dim;
    if (n < 1) throw OrbifoldError("complex_dim must be >= 1");
    if (period_matrix.rows() != n || period_matrix.cols() != 2 * n)
        throw OrbifoldError("period_matrix must be n x 2n");
    if (background_metric.rows() != n || background_metric.cols() != n)
        throw OrbifoldError("background_metric must be n x n");
    if (std::abs(real_periods().determinant()) < 1e-12)
        throw OrbifoldError("period matrix does not span a full lattice");
    if (!is_hermitian(background_metric, 1e-12)) throw OrbifoldError("background_metric is not Hermitian");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(background_metric);
    if (es.eigenvalues().minCoeff() <= 0.0) throw OrbifoldError("background_metric is not positive definite");
}

bool GroupElement::is_identity() const
{
    if (!linear.isIdentity()) return false;
    return std::all_of(translation.begin(), translation.end(), [](const Rational& t) { return t == 0; });
}

GroupElement GroupElement::compose(const GroupElement& inner) const
{
    GroupElement out;
    out.linear = linear * inner.linear;
    const int d = real_dim();
    out.translation.resize(d);
    for (int a = 0; a < d; ++a) {
        Rational s = translation[a];
        for (int b = 0; b < d; ++b) s += Rational(linear(a, b)) * inner.translation[b];
        out.translation[a] = frac(s);
    }
    out.holomorphic = holomorphic * inner.holomorphic;
    return out;
}

bool GroupElement::same_map(const GroupElement& other) const
{
    return linear == other.linear && translation == other.translation;
}

GroupElement make_group_element(const PeriodData& periods, const Eigen::MatrixXi& linear,
                                std::vector<Rational> translation)
{
    const int d = periods.real_dim();
    if (linear.rows() != d || linear.cols() != d)
        throw OrbifoldError("linear part must be " + std::to_string(d) + "x" + std::to_string(d));
    const double det = linear.cast<double>().determinant();
    if (std::abs(std::abs(det) - 1.0) > 1e-9) throw OrbifoldError("linear part is not unimodular (|det M| != 1)");
    if (translation.empty()) translation.assign(d, Rational(0));
    if (static_cast<int>(translation.size()) != d) throw OrbifoldError("translation has wrong length");
    for (auto& t : translation) t = frac(t);

    // A Pi = Pi M, solved through the right pseudo-inverse of Pi.
    const Eigen::MatrixXcd& pi = periods.period_matrix;
    const Eigen::MatrixXcd pim = pi * linear.cast<std::complex<double>>();
    const Eigen::MatrixXcd pinv = pi.adjoint() * (pi * pi.adjoint()).inverse();
    Eigen::MatrixXcd a = pim * pinv;
    if ((a * pi - pim).cwiseAbs().maxCoeff() > kGeometryTol)
        throw OrbifoldError("action is not holomorphic: no A with Pi M = A Pi");
    const Eigen::MatrixXcd& g = periods.background_metric;
    if ((a.transpose() * g * a.conjugate() - g).cwiseAbs().maxCoeff() > kGeometryTol)
        throw OrbifoldError("holomorphic part is not an isometry of the background metric");

    GroupElement out;
    out.linear = linear;
    out.translation = std::move(translation);
    out.holomorphic = std::move(a);
    return out;
}

QuotientTorusOrbifold::QuotientTorusOrbifold(PeriodData periods, std::vector<GroupElement> elements,
                                             std::string name)
    : periods_(std::move(periods)), group_(std::move(elements)), name_(std::move(name)), id_(next_orbifold_id++)
{
    periods_.validate();
    if (group_.empty() || !group_.front().is_identity())
        throw OrbifoldError("group list must start with the identity");
    for (const auto& g : group_)
        for (const auto& h : group_) {
            const auto gh = g.compose(h);
            if (std::none_of(group_.begin(), group_.end(), [&](const GroupElement& e) { return e.same_map(gh); }))
                throw OrbifoldError("group list is not closed under composition");
        }
}

OrbifoldPtr build_orbifold(PeriodData periods, const std::vector<GroupElement>& generators,
                           std::size_t max_order, std::string name)
{
    periods.validate();
    const int d = periods.real_dim();
    std::vector<GroupElement> group;
    group.push_back(make_group_element(periods, Eigen::MatrixXi::Identity(d, d)));
    std::vector<GroupElement> gens;
    for (const auto& g : generators) {
        if (g.real_dim() != d) throw OrbifoldError("generator dimension does not match periods");
        // Re-derive the holomorphic part against these periods.
        gens.push_back(make_group_element(periods, g.linear, g.translation));
    }
    auto contains = [&](const GroupElement& e) {
        return std::any_of(group.begin(), group.end(), [&](const GroupElement& x) { return x.same_map(e); });
    };
    std::vector<GroupElement> frontier = {group.front()};
    while (!frontier.empty()) {
        std::vector<GroupElement> next;
        for (const auto& e : frontier)
            for (const auto& g : gens) {
                auto ge = g.compose(e);
                if (!contains(ge)) {
                    group.push_back(ge);
                    next.push_back(std::move(ge));
                    if (group.size() > max_order)
                        throw OrbifoldError("group closure exceeds " + std::to_string(max_order) +
                                            " elements; the action is not finite");
                }
            }
        frontier = std::move(next);
    }
    return std::make_shared<QuotientTorusOrbifold>(std::move(periods), std::move(group), std::move(name));
}

// ---------------------------------------------------------------------------
// Fields

std::size_t grid_size(const Resolution& resolution)
{
    std::size_t n = 1;
    for (int r : resolution) n *= static_cast<std::size_t>(r);
    return n;
}

SpectralField::SpectralField(OrbifoldPtr orbifold, Resolution resolution)
    : SpectralField(std::move(orbifold), std::move(resolution), {}, false)
{
}

SpectralField::SpectralField(OrbifoldPtr orbifold, Resolution resolution, std::vector<double> samples, bool invariant)
    : orbifold_(std::move(orbifold)), resolution_(std::move(resolution)), samples_(std::move(samples)),
      invariant_(invariant)
{
    if (!orbifold_) throw OrbifoldError("field needs an orbifold");
    if (static_cast<int>(resolution_.size()) != orbifold_->real_dim())
        throw OrbifoldError("resolution must have one entry per real axis");
    for (int r : resolution_)
        if (r < 1) throw OrbifoldError("resolution entries must be positive");
    if (samples_.empty()) samples_.assign(grid_size(resolution_), 0.0);
    if (samples_.size() != grid_size(resolution_)) throw OrbifoldError("sample count does not match resolution");
}

SpectralField SpectralField::constant(OrbifoldPtr orbifold, Resolution resolution, double value)
{
    SpectralField f(std::move(orbifold), std::move(resolution));
    std::fill(f.samples_.begin(), f.samples_.end(), value);
    f.invariant_ = true;
    return f;
}

SpectralField SpectralField::from_function(OrbifoldPtr orbifold, Resolution resolution,
                                           const std::function<double(std::span<const double>)>& f)
{
    SpectralField out(std::move(orbifold), std::move(resolution));
    for (std::size_t i = 0; i < out.size(); ++i) {
        const auto u = out.point(i);
        out.samples_[i] = f(u);
    }
    return out;
}

std::vector<double> SpectralField::point(std::size_t i) const
{
    const int d = static_cast<int>(resolution_.size());
    std::vector<double> u(d);
    for (int a = d - 1; a >= 0; --a) {
        const auto n = static_cast<std::size_t>(resolution_[a]);
        u[a] = static_cast<double>(i % n) / static_cast<double>(n);
        i /= n;
    }
    return u;
}

double SpectralField::mean() const
{
    double s = 0.0;
#pragma omp parallel for reduction(+ : s) schedule(static)
    for (std::size_t i = 0; i < samples_.size(); ++i) s += samples_[i];
    return s / static_cast<double>(samples_.size());
}

double SpectralField::sup_norm() const
{
    double m = 0.0;
#pragma omp parallel for reduction(max : m) schedule(static)
    for (std::size_t i = 0; i < samples_.size(); ++i) m = std::max(m, std::abs(samples_[i]));
    return m;
}

bool SpectralField::same_grid(const SpectralField& other) const
{
    return orbifold_ && other.orbifold_ && orbifold_->id() == other.orbifold_->id() &&
           resolution_ == other.resolution_;
}

SpectralField& SpectralField::operator+=(const SpectralField& other)
{
    if (!same_grid(other)) throw OrbifoldError("fields live on different grids");
    for (std::size_t i = 0; i < samples_.size(); ++i) samples_[i] += other.samples_[i];
    invariant_ = invariant_ && other.invariant_;
    return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& other)
{
    if (!same_grid(other)) throw OrbifoldError("fields live on different grids");
    for (std::size_t i = 0; i < samples_.size(); ++i) samples_[i] -= other.samples_[i];
    invariant_ = invariant_ && other.invariant_;
    return *this;
}

SpectralField& SpectralField::operator*=(double s)
{
    for (auto& v : samples_) v *= s;
    return *this;
}

SpectralField& SpectralField::operator+=(double c)
{
    for (auto& v : samples_) v += c;
    return *this;
}

SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
SpectralField operator*(double s, SpectralField a) { return a *= s; }

SpectralField pointwise_product(const SpectralField& a, const SpectralField& b)
{
    if (!a.same_grid(b)) throw OrbifoldError("fields live on different grids");
    SpectralField out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b[i];
    out.set_invariant_flag(a.invariant_flag() && b.invariant_flag());
    return out;
}

SpectralField pointwise_map(const SpectralField& a, const std::function<double(double)>& f)
{
    SpectralField out = a;
    for (auto& v : out.samples()) v = f(v);
    return out;
}

double max_abs_difference(const SpectralField& a, const SpectralField& b)
{
    if (!a.same_grid(b)) throw OrbifoldError("fields live on different grids");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

// ---------------------------------------------------------------------------
// Group action on grids

namespace {

struct GridMap {
    Eigen::MatrixXi scaled;    // M_ab N_a / N_b
    std::vector<long> shift;   // N_a t_a
};

std::optional<GridMap> grid_map(const GroupElement& g, const Resolution& res)
{
    const int d = g.real_dim();
    if (static_cast<int>(res.size()) != d) return std::nullopt;
    GridMap map{Eigen::MatrixXi(d, d), std::vector<long>(d)};
    for (int a = 0; a < d; ++a) {
        for (int b = 0; b < d; ++b) {
            const long num = static_cast<long>(g.linear(a, b)) * res[a];
            if (num % res[b] != 0) return std::nullopt;
            map.scaled(a, b) = static_cast<int>(num / res[b]);
        }
        const Rational s = g.translation[a] * res[a];
        if (!is_integer(s)) return std::nullopt;
        map.shift[a] = s.get_num().get_si();
    }
    return map;
}

}  // namespace

bool preserves_grid(const GroupElement& g, const Resolution& resolution)
{
    return grid_map(g, resolution).has_value();
}

std::vector<std::size_t> grid_permutation(const GroupElement& g, const Resolution& res)
{
    const auto map = grid_map(g, res);
    if (!map) throw OrbifoldError("group element does not preserve the grid (N * translation not integral)");
    const int d = g.real_dim();
    const std::size_t total = grid_size(res);
    std::vector<std::size_t> perm(total);
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < total; ++i) {
        long k[8];
        std::size_t rem = i;
        for (int a = d - 1; a >= 0; --a) {
            k[a] = static_cast<long>(rem % static_cast<std::size_t>(res[a]));
            rem /= static_cast<std::size_t>(res[a]);
        }
        std::size_t j = 0;
        for (int a = 0; a < d; ++a) {
            long v = map->shift[a];
            for (int b = 0; b < d; ++b) v += static_cast<long>(map->scaled(a, b)) * k[b];
            v %= res[a];
            if (v < 0) v += res[a];
            j = j * static_cast<std::size_t>(res[a]) + static_cast<std::size_t>(v);
        }
        perm[i] = j;
    }
    return perm;
}

void check_resolution(const QuotientTorusOrbifold& orb, const Resolution& resolution)
{
    if (static_cast<int>(resolution.size()) != orb.real_dim())
        throw OrbifoldError("resolution needs " + std::to_string(orb.real_dim()) + " entries");
    for (int r : resolution)
        if (r < 2 || r % 2 != 0) throw OrbifoldError("resolution entries must be even and >= 2");
    for (const auto& g : orb.group())
        if (!preserves_grid(g, resolution))
            throw OrbifoldError("resolution is incompatible with the group action");
}

SpectralField act(const GroupElement& g, const SpectralField& f)
{
    const auto perm = grid_permutation(g, f.resolution());
    SpectralField out(f.orbifold(), f.resolution());
    auto& dst = out.samples();
    const auto& src = f.samples();
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = src[perm[i]];
    out.set_invariant_flag(f.invariant_flag());
    return out;
}

SpectralField project_invariant(const SpectralField& f)
{
    const auto& group = f.orbifold()->group();
    SpectralField out(f.orbifold(), f.resolution());
    auto& dst = out.samples();
    const auto& src = f.samples();
    for (const auto& g : group) {
        const auto perm = grid_permutation(g, f.resolution());
#pragma omp parallel for schedule(static)
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[perm[i]];
    }
    const double w = 1.0 / static_cast<double>(group.size());
    for (auto& v : dst) v *= w;
    out.set_invariant_flag(true);
    return out;
}

double invariance_defect(const SpectralField& f)
{
    double m = 0.0;
    for (const auto& g : f.orbifold()->group()) m = std::max(m, max_abs_difference(act(g, f), f));
    return m;
}

double integrate(const SpectralField& f) { return f.orbifold()->volume() * f.mean(); }

// ---------------------------------------------------------------------------
// Fixed points (complex dimension one)

namespace {

using Point = std::vector<Rational>;

Point apply_exact(const GroupElement& g, const Point& u)
{
    const int d = g.real_dim();
    Point out(d);
    for (int a = 0; a < d; ++a) {
        Rational s = g.translation[a];
        for (int b = 0; b < d; ++b) s += Rational(g.linear(a, b)) * u[b];
        out[a] = frac(s);
    }
    return out;
}

bool point_less(const Point& a, const Point& b)
{
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] < b[i]) return true;
        if (b[i] < a[i]) return false;
    }
    return false;
}

struct PointLess {
    bool operator()(const Point& a, const Point& b) const { return point_less(a, b); }
};

/// All u in [0,1)^2 with (M - I) u + t in Z^2, for invertible M - I.
std::vector<Point> fixed_points(const GroupElement& g)
{
    const long a = g.linear(0, 0) - 1, b = g.linear(0, 1);
    const long c = g.linear(1, 0), d = g.linear(1, 1) - 1;
    const long det = a * d - b * c;
    if (det == 0) {
        if (g.linear.isIdentity()) return {};  // pure translation: free
        throw OrbifoldError("element with eigenvalue 1 that is not a translation; not a holomorphic n=1 action");
    }
    // u = (M - I)^{-1} (z - t) for z in Z^2; representatives z in a box of size |det| suffice.
    std::set<Point, PointLess> found;
    const long span = std::abs(det);
    for (long z0 = 0; z0 < span; ++z0)
        for (long z1 = 0; z1 < span; ++z1) {
            const Rational r0 = Rational(z0) - g.translation[0];
            const Rational r1 = Rational(z1) - g.translation[1];
            Point u = {frac((Rational(d) * r0 - Rational(b) * r1) / Rational(det)),
                       frac((Rational(-c) * r0 + Rational(a) * r1) / Rational(det))};
            found.insert(std::move(u));
        }
    return {found.begin(), found.end()};
}

}  // namespace

OrbifoldSignature fixed_point_data(const QuotientTorusOrbifold& orb)
{
    if (orb.complex_dim() != 1) throw OrbifoldError("fixed_point_data requires complex dimension 1");
    const auto& group = orb.group();
    std::set<Point, PointLess> points;
    for (const auto& g : group) {
        if (g.is_identity()) continue;
        for (auto& p : fixed_points(g)) points.insert(std::move(p));
    }
    // Group the fixed points into orbits; each orbit is one stacky point of the quotient.
    std::set<Point, PointLess> seen;
    std::vector<int> orders;
    Rational defect = 0;  // sum over orbits of (1 - 1/m)
    for (const auto& p : points) {
        if (seen.count(p)) continue;
        for (const auto& g : group) seen.insert(apply_exact(g, p));
        int stabilizer = 0;
        for (const auto& g : group)
            if (apply_exact(g, p) == p) ++stabilizer;
        if (stabilizer < 2) throw OrbifoldError("internal: fixed point with trivial stabilizer");
        orders.push_back(stabilizer);
        defect += Rational(1) - Rational(1, stabilizer);
    }
    // chi(T) = 0 = |G| (2 - 2g) - sum (|G|/m)(m - 1)  =>  2 - 2g = sum (1 - 1/m).
    const Rational genus = (Rational(2) - defect) / 2;
    if (!is_integer(genus) || genus < 0)
        throw OrbifoldError("Riemann-Hurwitz produced a non-integral genus " + to_string(genus));
    return OrbifoldSignature(static_cast<int>(genus.get_num().get_si()), std::move(orders));
}

}  // namespace orbifold
