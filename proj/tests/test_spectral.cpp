#include <doctest.h>

#include "orbifold/spectral.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <random>

using namespace orbifold;

namespace {

constexpr double pi = std::numbers::pi;

SpectralField cos_u1(const OrbifoldPtr& orb, const Resolution& res)
{
    return SpectralField::from_function(orb, res, [](std::span<const double> u) { return std::cos(2 * pi * u[0]); });
}

double max_abs(const std::vector<double>& v)
{
    double m = 0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace

TEST_CASE("complex hessian of cos on the square torus")
{
    auto orb = preset_orbifold("torus_square");
    const Resolution res{16, 16};
    auto f = cos_u1(orb, res);
    auto h = complex_hessian(f);
    CHECK(h.n == 1);
    double err = 0;
    for (std::size_t p = 0; p < f.size(); ++p) err = std::max(err, std::abs(h.at(p, 0, 0) + pi * pi * f[p]));
    CHECK(err < 1e-12);
    CHECK(h.hermitian_defect() < 1e-12);

    auto c = SpectralField::constant(orb, res, 3.0);
    auto hc = complex_hessian(c);
    double m = 0;
    for (auto v : hc.data) m = std::max(m, std::abs(v));
    CHECK(m < 1e-12);
}

TEST_CASE("laplacian eigenvalues on the unit square torus")
{
    auto orb = preset_orbifold("torus_square");
    const Resolution res{16, 16};
    for (int m = 0; m <= 3; ++m)
        for (int n = -2; n <= 2; ++n) {
            auto f = SpectralField::from_function(
                orb, res, [&](std::span<const double> u) { return std::cos(2 * pi * (m * u[0] + n * u[1])); });
            auto lf = laplacian(f);
            const double lambda = -pi * pi * (m * m + n * n);
            CHECK(max_abs_difference(lf, lambda * f) < 1e-10);
        }
}

TEST_CASE("hessian trace equals laplacian and is Hermitian for n = 2")
{
    auto orb = preset_orbifold("T4");
    const Resolution res{8, 8, 8, 8};
    std::mt19937_64 rng(3);
    auto f = random_band_limited(orb, res, 2, rng);
    auto h = complex_hessian(f);
    CHECK(h.hermitian_defect() < 1e-12);
    auto lf = laplacian(f);
    double err = 0;
    for (std::size_t p = 0; p < f.size(); ++p) err = std::max(err, std::abs(h.at(p, 0, 0).real() + h.at(p, 1, 1).real() - lf[p]));
    CHECK(err < 1e-10);
}

TEST_CASE("hessian is linear")
{
    auto orb = preset_orbifold("T4");
    const Resolution res{8, 8, 8, 8};
    std::mt19937_64 rng(5);
    auto a = random_band_limited(orb, res, 2, rng);
    auto b = random_band_limited(orb, res, 2, rng);
    auto ha = complex_hessian(a), hb = complex_hessian(b), hab = complex_hessian(2.0 * a + (-3.0) * b);
    double err = 0;
    for (std::size_t i = 0; i < ha.data.size(); ++i) err = std::max(err, std::abs(2.0 * ha.data[i] - 3.0 * hb.data[i] - hab.data[i]));
    CHECK(err < 1e-10);
}

TEST_CASE("laplacian_wrt reduces to the laplacian and scales")
{
    auto orb = preset_orbifold("torus_square");
    const Resolution res{16, 16};
    std::mt19937_64 rng(7);
    auto f = random_band_limited(orb, res, 3, rng);
    auto ident = HermitianMatrixField::constant(Eigen::MatrixXcd::Identity(1, 1), f.size());
    CHECK(max_abs_difference(laplacian_wrt(f, ident), laplacian(f)) < 1e-12);
    auto twice = HermitianMatrixField::constant(2.0 * Eigen::MatrixXcd::Identity(1, 1), f.size());
    CHECK(max_abs_difference(laplacian_wrt(f, twice), 2.0 * laplacian(f)) < 1e-12);
    auto c = SpectralField::constant(orb, res, 1.5);
    CHECK(laplacian_wrt(c, twice).sup_norm() < 1e-12);

    std::vector<std::string> warnings;
    auto neg = HermitianMatrixField::constant(-1.0 * Eigen::MatrixXcd::Identity(1, 1), f.size());
    laplacian_wrt(f, neg, &warnings);
    CHECK(warnings.size() == 1);
}

TEST_CASE("green solve inverts the laplacian")
{
    auto orb = preset_orbifold("torus_square");
    const Resolution res{32, 32};
    auto f = cos_u1(orb, res);
    auto phi = green_solve(f);
    CHECK(max_abs_difference(phi, (-1.0 / (pi * pi)) * f) < 1e-12);
    CHECK(green_solve(SpectralField(orb, res)).sup_norm() == 0.0);

    std::mt19937_64 rng(11);
    for (int i = 0; i < 5; ++i) {
        auto h = random_band_limited(orb, res, 4, rng);
        auto back = laplacian(green_solve(h));
        CHECK(max_abs_difference(back, h + SpectralField::constant(orb, res, -h.mean())) < 1e-12);
    }
}

TEST_CASE("stokes, self-adjointness and integration by parts")
{
    for (const char* name : {"torus_square", "pillowcase", "P1_632", "T4"}) {
        auto orb = preset_orbifold(name);
        const Resolution res(orb->real_dim(), orb->complex_dim() == 1 ? 24 : 8);
        std::mt19937_64 rng(13);
        auto phi = random_band_limited(orb, res, 2, rng);
        auto psi = random_band_limited(orb, res, 2, rng);
        CHECK(std::abs(integrate(laplacian(phi))) < 1e-13);
        const double lhs = integrate(pointwise_product(psi, laplacian(phi)));
        const double rhs = integrate(pointwise_product(phi, laplacian(psi)));
        CHECK(std::abs(lhs - rhs) < 1e-11);
        const double gsq = integrate(grad_sq(phi));
        CHECK(std::abs(gsq + integrate(pointwise_product(phi, laplacian(phi)))) < 1e-11);
        CHECK(grad_sq(phi).samples() == grad_sq(phi).samples());
    }
}

TEST_CASE("grad_sq of cos is a quarter of the euclidean gradient")
{
    auto orb = preset_orbifold("torus_square");
    const Resolution res{16, 16};
    auto g = grad_sq(cos_u1(orb, res));
    auto expect = SpectralField::from_function(orb, res, [](std::span<const double> u) {
        const double s = std::sin(2 * pi * u[0]);
        return pi * pi * s * s;
    });
    CHECK(max_abs_difference(g, expect) < 1e-12);
    CHECK(grad_sq(SpectralField::constant(orb, res, 2.0)).sup_norm() < 1e-12);
}

TEST_CASE("invariance commutes with the laplacian")
{
    for (const char* name : {"pillowcase", "P1_442", "P1_632", "P1_333"}) {
        auto orb = preset_orbifold(name);
        const Resolution res{24, 24};
        std::mt19937_64 rng(17);
        auto f = random_band_limited(orb, res, 4, rng);
        CHECK(max_abs_difference(project_invariant(laplacian(f)), laplacian(project_invariant(f))) < 1e-11);
        auto g = green_solve(project_invariant(f));
        CHECK(invariance_defect(g) < 1e-12);
    }
}

TEST_CASE("green identity on small grids")
{
    auto orb = preset_orbifold("pillowcase");
    const Resolution res{16, 16};
    std::mt19937_64 rng(19);
    for (int i = 0; i < 4; ++i) {
        auto phi = random_band_limited(orb, res, 3, rng);
        for (std::size_t x : {0ul, 17ul, 100ul}) {
            auto g = green_kernel(orb, res, x);
            const double lhs = integrate(pointwise_product(g, laplacian(phi)));
            CHECK(std::abs(lhs - (phi.mean() - phi[x])) < 1e-10);
        }
    }
}

TEST_CASE("poincare eigenvalue")
{
    auto torus = preset_orbifold("torus_square");
    CHECK(std::abs(poincare_lambda(torus, {32, 32}) - pi * pi) < 1e-9);
    auto pillow = preset_orbifold("pillowcase");
    CHECK(poincare_lambda(pillow, {32, 32}) >= pi * pi - 1e-9);

    // Doubling the periods divides lambda by 4.
    Eigen::MatrixXcd per(1, 2);
    per << 2.0, std::complex<double>(0, 2);
    auto big = build_orbifold(PeriodData(per), {});
    CHECK(std::abs(poincare_lambda(big, {32, 32}) - pi * pi / 4) < 1e-9);

    // Translations can remove modes: the half-shift u -> u + (1/2, 0) kills the odd k1.
    auto shift = make_group_element(torus->periods(), Eigen::MatrixXi::Identity(2, 2), {Rational(1, 2), Rational(0)});
    auto shifted = build_orbifold(torus->periods(), {shift});
    CHECK(std::abs(poincare_lambda(shifted, {32, 32}) - pi * pi) < 1e-9);  // (0, 1) survives
}

TEST_CASE("poincare eigenvalue matches a dense eigensolve")
{
    // Dense matrix of -Delta on invariant fields at 16^2, built column by column.
    for (const char* name : {"torus_square", "pillowcase", "P1_442"}) {
        auto orb = preset_orbifold(name);
        const Resolution res{16, 16};
        const std::size_t m = grid_size(res);
        Eigen::MatrixXd a(m, m);
        for (std::size_t j = 0; j < m; ++j) {
            SpectralField e(orb, res);
            e[j] = 1.0;
            auto col = laplacian(project_invariant(e));
            for (std::size_t i = 0; i < m; ++i) a(i, j) = -col[i];
        }
        // Restrict to invariants: P A P with P the averaging projection.
        Eigen::MatrixXd p(m, m);
        for (std::size_t j = 0; j < m; ++j) {
            SpectralField e(orb, res);
            e[j] = 1.0;
            auto col = project_invariant(e);
            for (std::size_t i = 0; i < m; ++i) p(i, j) = col[i];
        }
        Eigen::MatrixXd sym = p * a * p;
        sym = 0.5 * (sym + sym.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
        double lam = std::numeric_limits<double>::infinity();
        for (int i = 0; i < es.eigenvalues().size(); ++i)
            if (es.eigenvalues()[i] > 1e-8) lam = std::min(lam, es.eigenvalues()[i]);
        CHECK(std::abs(lam - poincare_lambda(orb, res)) < 1e-8);
    }
}

TEST_CASE("poincare inequality for random invariant fields")
{
    for (const char* name : {"torus_square", "pillowcase"}) {
        auto orb = preset_orbifold(name);
        const Resolution res{32, 32};
        const double lam = poincare_lambda(orb, res);
        std::mt19937_64 rng(23);
        for (int i = 0; i < 20; ++i) {
            auto f = project_invariant(random_band_limited(orb, res, 4, rng, true));
            f += -f.mean();
            const double l2 = std::sqrt(integrate(pointwise_product(f, f)));
            const double d2 = std::sqrt(integrate(grad_sq(f)));
            CHECK(l2 <= (1.0 / std::sqrt(lam)) * d2 * (1 + 1e-8) + 1e-15);
        }
    }
}

TEST_CASE("random fields are resolution independent")
{
    auto orb = preset_orbifold("torus_square");
    std::mt19937_64 a(29), b(29);
    auto coarse = random_band_limited(orb, {16, 16}, 3, a);
    auto fine = random_band_limited(orb, {32, 32}, 3, b);
    double err = 0;
    for (std::size_t i = 0; i < 16; ++i)
        for (std::size_t j = 0; j < 16; ++j) err = std::max(err, std::abs(coarse[i * 16 + j] - fine[2 * i * 32 + 2 * j]));
    CHECK(err < 1e-12);
}

TEST_CASE("fourier terms land on the right coefficients")
{
    auto orb = preset_orbifold("torus_square");
    const Resolution res{8, 8};
    auto f = field_from_terms(orb, res, {{{1, -2}, {0.3, 0.4}}, {{0, 3}, {1.0, 0.0}}});
    auto g = SpectralField::from_function(orb, res, [](std::span<const double> u) {
        const double th = 2 * pi * (u[0] - 2 * u[1]);
        return 0.3 * std::cos(th) - 0.4 * std::sin(th) + std::cos(2 * pi * 3 * u[1]);
    });
    CHECK(max_abs_difference(f, g) < 1e-12);
}

TEST_CASE("sobolev probe")
{
    CHECK_THROWS(sobolev_probe(preset_orbifold("torus_square"), {16, 16}, 3));
    auto orb = preset_orbifold("T4");
    auto c = SpectralField::constant(orb, {8, 8, 8, 8}, 2.0);
    // constants on a unit-volume torus: ||c||_4^2 / ||c||_2^2 = 1
    CHECK(std::abs(std::pow(lp_norm(c, 4.0), 2) / integrate(pointwise_product(c, c)) - 1.0) < 1e-12);
    auto probe = sobolev_probe(orb, {8, 8, 8, 8}, 5);
    CHECK(probe.all_finite);
    CHECK(probe.ratios.size() == 5);
    CHECK(probe.fitted_constant == probe.max_ratio);

    // Single mode cos(2 pi u1): ||f||_4^2 = sqrt(3/8), ||f||_2^2 = 1/2, ||df||^2 = pi^2/2.
    auto f = SpectralField::from_function(orb, {8, 8, 8, 8}, [](std::span<const double> u) { return std::cos(2 * pi * u[0]); });
    const double ratio = std::pow(lp_norm(f, 4.0), 2) / (integrate(pointwise_product(f, f)) + integrate(grad_sq(f)));
    CHECK(ratio == doctest::Approx(std::sqrt(3.0 / 8.0) / (0.5 + pi * pi / 2)).epsilon(1e-12));
}

TEST_CASE("dealias band is closed under the group")
{
    for (const char* name : {"P1_442", "P1_632", "P1_333", "T4_Z2"}) {
        auto orb = preset_orbifold(name);
        const Resolution res(orb->real_dim(), orb->complex_dim() == 1 ? 24 : 8);
        auto ctx = SpectralContext::get(orb, res);
        std::mt19937_64 rng(31);
        auto f = project_invariant(random_band_limited(orb, res, 4, rng));
        auto coeffs = ctx->forward(f.samples());
        ctx->truncate_to_band(coeffs);
        SpectralField g(orb, res, ctx->inverse(coeffs));
        CHECK(invariance_defect(g) < 1e-12);
    }
}
