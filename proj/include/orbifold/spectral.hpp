#pragma once

#include "orbifold/quotient_orbifold.hpp"

#include <complex>
#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace orbifold {

using cplx = std::complex<double>;

/// Per-point n x n complex matrices, stored point-major (entry (j,l) of point p at p*n*n + j*n + l).
struct HermitianMatrixField {
    int n = 1;
    std::size_t points = 0;
    std::vector<cplx> data;

    HermitianMatrixField() = default;
    HermitianMatrixField(int n_, std::size_t points_) : n(n_), points(points_), data(points_ * n_ * n_) {}

    cplx& at(std::size_t p, int j, int l) { return data[p * n * n + j * n + l]; }
    const cplx& at(std::size_t p, int j, int l) const { return data[p * n * n + j * n + l]; }
    /// max |H - H^*| over all points.
    double hermitian_defect() const;
    /// Same constant matrix at every point.
    static HermitianMatrixField constant(const Eigen::MatrixXcd& m, std::size_t points);
};

/// Which complex frame derivatives are taken in: the z coordinates of the period
/// matrix, or a frame orthonormal for the background metric (g = I there).
enum class Frame { coordinate, unitary };

/// A Fourier term: the real function Re(c e^{2 pi i k.u}).
struct FourierTerm {
    std::vector<int> k;
    cplx c;
};

/// FFT plans, mode tables and derivative symbols for one orbifold at one resolution.
///
/// Spectra use the r2c half layout (last axis 0..N/2) and hold normalized
/// coefficients, so a field equals sum_k c_k e^{2 pi i k.u}.
class SpectralContext {
  public:
    SpectralContext(OrbifoldPtr orbifold, Resolution resolution);
    ~SpectralContext();
    SpectralContext(const SpectralContext&) = delete;
    SpectralContext& operator=(const SpectralContext&) = delete;

    /// Shared, cached context for (orbifold, resolution).
    static std::shared_ptr<const SpectralContext> get(const OrbifoldPtr& orbifold, const Resolution& resolution);
    static std::shared_ptr<const SpectralContext> get(const SpectralField& f)
    {
        return get(f.orbifold(), f.resolution());
    }

    const OrbifoldPtr& orbifold() const { return orbifold_; }
    const Resolution& resolution() const { return resolution_; }
    int complex_dim() const { return n_; }
    int real_dim() const { return 2 * n_; }
    std::size_t real_size() const { return real_size_; }
    std::size_t spectral_size() const { return spectral_size_; }

    void forward(const double* in, cplx* out) const;
    /// Input is preserved.
    void inverse(const cplx* in, double* out) const;
    std::vector<cplx> forward(const std::vector<double>& in) const;
    std::vector<double> inverse(const std::vector<cplx>& in) const;

    /// Integer mode vector of half-spectrum slot s.
    void mode(std::size_t s, int* k) const;
    std::vector<int> mode(std::size_t s) const;
    /// True when some axis sits at the Nyquist index N/2.
    bool nyquist(std::size_t s) const { return nyquist_[s] != 0; }
    /// Slot holding -k when both k and -k are stored (last index 0 or N/2); otherwise s itself.
    std::size_t conjugate_slot(std::size_t s) const;
    /// Weight of slot s in the full spectrum (1 or 2); used for Parseval sums.
    double parseval_weight(std::size_t s) const { return weight_[s]; }

    /// zeta_j(k) of slot s, so d/dz_j e^{2 pi i k.u} = 2 pi i zeta_j e^{2 pi i k.u}.
    cplx zeta(std::size_t s, int j, Frame frame) const;
    /// Symbol of d_j d_lbar with the Nyquist convention (mixed products vanish on Nyquist axes).
    cplx second_symbol(std::size_t s, int j, int l, Frame frame) const;
    /// Symbol of the background Laplacian, <= 0.
    double laplacian_symbol(std::size_t s) const { return lap_symbol_[s]; }
    /// Orbit-closed 2/3-rule band: every group image of the mode has |k_a| <= N_a / 3.
    bool in_dealias_band(std::size_t s) const { return band_[s] != 0; }

    /// Frame change Z (n x 2n) with zeta = Z k.
    const Eigen::MatrixXcd& frame_matrix(Frame frame) const
    {
        return frame == Frame::coordinate ? z_coord_ : z_unit_;
    }

    // Operators on spectra ---------------------------------------------------

    /// All Hessian entries d_j d_lbar of the field with coefficients `coeffs`.
    HermitianMatrixField hessian(const std::vector<cplx>& coeffs, Frame frame) const;
    /// d_j of the field: real and imaginary parts.
    void first_derivative(const std::vector<cplx>& coeffs, int j, Frame frame, std::vector<double>& re,
                          std::vector<double>& im) const;
    /// d_j d_m d_lbar of the field (real and imaginary parts).
    void third_derivative(const std::vector<cplx>& coeffs, int j, int m, int l, Frame frame,
                          std::vector<double>& re, std::vector<double>& im) const;
    /// Zero every slot outside the dealias band.
    void truncate_to_band(std::vector<cplx>& coeffs) const;
    /// Field with the given Fourier terms (aliased onto this grid).
    std::vector<cplx> coefficients_from_terms(const std::vector<FourierTerm>& terms) const;

  private:
    OrbifoldPtr orbifold_;
    Resolution resolution_;
    int n_;
    std::size_t real_size_ = 0;
    std::size_t spectral_size_ = 0;
    void* plan_forward_ = nullptr;
    void* plan_inverse_ = nullptr;
    Eigen::MatrixXcd z_coord_;
    Eigen::MatrixXcd z_unit_;
    std::vector<std::uint8_t> nyquist_;
    std::vector<std::uint8_t> band_;
    std::vector<double> weight_;
    std::vector<double> lap_symbol_;

    void slot_output(const std::vector<cplx>& coeffs, const std::function<cplx(std::size_t)>& mult, bool odd,
                     std::vector<double>& re, std::vector<double>& im) const;
};

// Operators on fields ---------------------------------------------------------

/// H_{j kbar} = d_{z_j} d_{zbar_k} phi in the z coordinates.
HermitianMatrixField complex_hessian(const SpectralField& phi);
/// Delta phi = tr(g^{-1} H(phi)).
SpectralField laplacian(const SpectralField& phi);
/// h^{j kbar} d_j d_kbar phi, i.e. tr(h_inv H(phi)) pointwise.  Non-positive h_inv
/// is reported through `warnings` when given.
SpectralField laplacian_wrt(const SpectralField& phi, const HermitianMatrixField& h_inv,
                            std::vector<std::string>* warnings = nullptr);
/// Zero-mean solution of Delta phi = h - mean(h).
SpectralField green_solve(const SpectralField& h);
/// g^{j kbar} d_j phi d_kbar phi = |d phi|^2_g.
SpectralField grad_sq(const SpectralField& phi);

/// Kernel column G_x with integrate(G_x Delta phi) = mean(phi) - phi(x).
SpectralField green_kernel(const OrbifoldPtr& orb, const Resolution& resolution, std::size_t point_index);

/// Smallest nonzero eigenvalue of -Delta on invariant functions.
double poincare_lambda(const OrbifoldPtr& orb, const Resolution& resolution);

/// Random real field with modes |k_a| <= band; identical across resolutions for a fixed rng state.
SpectralField random_band_limited(const OrbifoldPtr& orb, const Resolution& resolution, int band,
                                  std::mt19937_64& rng, bool zero_mean = false);
/// Same coefficient draw as random_band_limited, as Fourier terms.
std::vector<FourierTerm> random_terms(int real_dim, int band, std::mt19937_64& rng, bool zero_mean);
SpectralField field_from_terms(const OrbifoldPtr& orb, const Resolution& resolution,
                               const std::vector<FourierTerm>& terms);

struct SobolevProbe {
    double fitted_constant = 0.0;  ///< max ratio, an empirical lower bound for the optimal constant
    double max_ratio = 0.0;
    bool all_finite = true;
    std::vector<double> ratios;
};

/// ||f||^2_{2n/(n-1)} / (||f||^2_2 + ||df||^2_2) over random invariant fields.  Requires n >= 2.
SobolevProbe sobolev_probe(const OrbifoldPtr& orb, const Resolution& resolution, int num_samples,
                           std::uint64_t seed = 0, int band = 3);

/// L^p norm by grid quadrature with the orbifold measure.
double lp_norm(const SpectralField& f, double p);

}  // namespace orbifold
