#pragma once

#include <complex>
#include <cstddef>
#include <span>

// Pointwise kernels behind the Monge-Ampere solver.
//
// Each kernel acts on point-major arrays of n x n Hermitian matrices H given in a
// frame where the background metric is the identity, so the perturbed metric at a
// point is I + H.  `parallel` is the OpenMP implementation used by the library
// (closed forms for n <= 2); `serial` is a straightforward per-point Eigen
// reference kept for tests and the benchmark.

namespace orbifold::kernels {

using cplx = std::complex<double>;

namespace parallel {

/// log det(I + H) per point; returns the minimum eigenvalue of I + H over all points.
double log_density(int n, std::span<const cplx> h, std::span<double> out);
/// min/max eigenvalue of I + H per point.
void eigen_bounds(int n, std::span<const cplx> h, std::span<double> min_out, std::span<double> max_out);
/// (I + H)^{-1} per point.
void inverse_metric(int n, std::span<const cplx> h, std::span<cplx> out);
/// Re tr(A B) per point.
void trace_product(int n, std::span<const cplx> a, std::span<const cplx> b, std::span<double> out);
double sum(std::span<const double> x);
double max_abs(std::span<const double> x);
/// y += s x
void axpy(double s, std::span<const double> x, std::span<double> y);

}  // namespace parallel

namespace serial {

double log_density(int n, std::span<const cplx> h, std::span<double> out);
void eigen_bounds(int n, std::span<const cplx> h, std::span<double> min_out, std::span<double> max_out);
void inverse_metric(int n, std::span<const cplx> h, std::span<cplx> out);
void trace_product(int n, std::span<const cplx> a, std::span<const cplx> b, std::span<double> out);
double sum(std::span<const double> x);
double max_abs(std::span<const double> x);
void axpy(double s, std::span<const double> x, std::span<double> y);

}  // namespace serial

}  // namespace orbifold::kernels
