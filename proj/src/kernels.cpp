#include "orbifold/kernels.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace orbifold::kernels {

namespace {

using MatX = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const MatX> point_matrix(int n, std::span<const cplx> h, std::size_t p)
{
    return Eigen::Map<const MatX>(h.data() + p * n * n, n, n);
}

MatX shifted(int n, std::span<const cplx> h, std::size_t p)
{
    return MatX::Identity(n, n) + point_matrix(n, h, p);
}

// Eigenvalues of the 2x2 Hermitian matrix [[a, b], [conj b, d]].
inline void eig2(double a, double d, cplx b, double& lo, double& hi)
{
    const double mid = 0.5 * (a + d);
    const double rad = std::sqrt(0.25 * (a - d) * (a - d) + std::norm(b));
    lo = mid - rad;
    hi = mid + rad;
}

}  // namespace

// ---------------------------------------------------------------------------
// OpenMP

namespace parallel {

double log_density(int n, std::span<const cplx> h, std::span<double> out)
{
    const std::size_t points = out.size();
    double min_eig = std::numeric_limits<double>::infinity();
    if (n == 1) {
#pragma omp parallel for reduction(min : min_eig) schedule(static)
        for (std::size_t p = 0; p < points; ++p) {
            const double a = 1.0 + h[p].real();
            min_eig = std::min(min_eig, a);
            out[p] = std::log(a);
        }
    } else if (n == 2) {
#pragma omp parallel for reduction(min : min_eig) schedule(static)
        for (std::size_t p = 0; p < points; ++p) {
            const cplx* m = h.data() + 4 * p;
            const double a = 1.0 + m[0].real(), d = 1.0 + m[3].real();
            double lo, hi;
            eig2(a, d, m[1], lo, hi);
            min_eig = std::min(min_eig, lo);
            out[p] = std::log(lo) + std::log(hi);
        }
    } else {
#pragma omp parallel for reduction(min : min_eig) schedule(static)
        for (std::size_t p = 0; p < points; ++p) {
            Eigen::SelfAdjointEigenSolver<MatX> es(shifted(n, h, p), Eigen::EigenvaluesOnly);
            const auto& ev = es.eigenvalues();
            min_eig = std::min(min_eig, ev.minCoeff());
            out[p] = ev.array().log().sum();
        }
    }
    return min_eig;
}

void eigen_bounds(int n, std::span<const cplx> h, std::span<double> min_out, std::span<double> max_out)
{
    const std::size_t points = min_out.size();
    if (n == 1) {
#pragma omp parallel for schedule(static)
        for (std::size_t p = 0; p < points; ++p) min_out[p] = max_out[p] = 1.0 + h[p].real();
    } else if (n == 2) {
#pragma omp parallel for schedule(static)
        for (std::size_t p = 0; p < points; ++p) {
            const cplx* m = h.data() + 4 * p;
            eig2(1.0 + m[0].real(), 1.0 + m[3].real(), m[1], min_out[p], max_out[p]);
        }
    } else {
#pragma omp parallel for schedule(static)
        for (std::size_t p = 0; p < points; ++p) {
            Eigen::SelfAdjointEigenSolver<MatX> es(shifted(n, h, p), Eigen::EigenvaluesOnly);
            min_out[p] = es.eigenvalues().minCoeff();
            max_out[p] = es.eigenvalues().maxCoeff();
        }
    }
}

void inverse_metric(int n, std::span<const cplx> h, std::span<cplx> out)
{
    const std::size_t points = out.size() / (n * n);
    if (n == 1) {
#pragma omp parallel for schedule(static)
        for (std::size_t p = 0; p < points; ++p) out[p] = 1.0 / (1.0 + h[p].real());
    } else if (n == 2) {
#pragma omp parallel for schedule(static)
        for (std::size_t p = 0; p < points; ++p) {
            const cplx* m = h.data() + 4 * p;
            const double a = 1.0 + m[0].real(), d = 1.0 + m[3].real();
            const cplx b = m[1];
            const double inv_det = 1.0 / (a * d - std::norm(b));
            cplx* o = out.data() + 4 * p;
            o[0] = d * inv_det;
            o[1] = -b * inv_det;
            o[2] = -std::conj(b) * inv_det;
            o[3] = a * inv_det;
        }
    } else {
#pragma omp parallel for schedule(static)
        for (std::size_t p = 0; p < points; ++p) {
            Eigen::Map<MatX>(out.data() + p * n * n, n, n) = shifted(n, h, p).inverse();
        }
    }
}

void trace_product(int n, std::span<const cplx> a, std::span<const cplx> b, std::span<double> out)
{
    const std::size_t points = out.size();
    const int nn = n * n;
#pragma omp parallel for schedule(static)
    for (std::size_t p = 0; p < points; ++p) {
        const cplx* x = a.data() + p * nn;
        const cplx* y = b.data() + p * nn;
        double t = 0.0;
        for (int j = 0; j < n; ++j)
            for (int l = 0; l < n; ++l) t += (x[j * n + l] * y[l * n + j]).real();
        out[p] = t;
    }
}

double sum(std::span<const double> x)
{
    double s = 0.0;
#pragma omp parallel for reduction(+ : s) schedule(static)
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i];
    return s;
}

double max_abs(std::span<const double> x)
{
    double m = 0.0;
#pragma omp parallel for reduction(max : m) schedule(static)
    for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x[i]));
    return m;
}

void axpy(double s, std::span<const double> x, std::span<double> y)
{
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += s * x[i];
}

}  // namespace parallel

// ---------------------------------------------------------------------------
// Serial reference

namespace serial {

double log_density(int n, std::span<const cplx> h, std::span<double> out)
{
    double min_eig = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < out.size(); ++p) {
        const MatX m = shifted(n, h, p);
        Eigen::SelfAdjointEigenSolver<MatX> es(m, Eigen::EigenvaluesOnly);
        min_eig = std::min(min_eig, es.eigenvalues().minCoeff());
        out[p] = std::log(m.determinant().real());
    }
    return min_eig;
}

void eigen_bounds(int n, std::span<const cplx> h, std::span<double> min_out, std::span<double> max_out)
{
    for (std::size_t p = 0; p < min_out.size(); ++p) {
        Eigen::SelfAdjointEigenSolver<MatX> es(shifted(n, h, p), Eigen::EigenvaluesOnly);
        min_out[p] = es.eigenvalues().minCoeff();
        max_out[p] = es.eigenvalues().maxCoeff();
    }
}

void inverse_metric(int n, std::span<const cplx> h, std::span<cplx> out)
{
    const std::size_t points = out.size() / (n * n);
    for (std::size_t p = 0; p < points; ++p)
        Eigen::Map<MatX>(out.data() + p * n * n, n, n) = shifted(n, h, p).inverse();
}

void trace_product(int n, std::span<const cplx> a, std::span<const cplx> b, std::span<double> out)
{
    for (std::size_t p = 0; p < out.size(); ++p)
        out[p] = (point_matrix(n, a, p) * point_matrix(n, b, p)).trace().real();
}

double sum(std::span<const double> x)
{
    double s = 0.0;
    for (double v : x) s += v;
    return s;
}

double max_abs(std::span<const double> x)
{
    double m = 0.0;
    for (double v : x) m = std::max(m, std::abs(v));
    return m;
}

void axpy(double s, std::span<const double> x, std::span<double> y)
{
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += s * x[i];
}

}  // namespace serial

}  // namespace orbifold::kernels
