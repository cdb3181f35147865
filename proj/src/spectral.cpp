#include "orbifold/spectral.hpp"

#include "orbifold/kernels.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>

namespace orbifold {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kFourPiSq = 4.0 * std::numbers::pi * std::numbers::pi;

std::mutex& planner_mutex()
{
    static std::mutex m;
    return m;
}

}  // namespace

double HermitianMatrixField::hermitian_defect() const
{
    double m = 0.0;
    for (std::size_t p = 0; p < points; ++p)
        for (int j = 0; j < n; ++j)
            for (int l = 0; l < n; ++l) m = std::max(m, std::abs(at(p, j, l) - std::conj(at(p, l, j))));
    return m;
}

HermitianMatrixField HermitianMatrixField::constant(const Eigen::MatrixXcd& m, std::size_t points)
{
    const int n = static_cast<int>(m.rows());
    HermitianMatrixField f(n, points);
    for (std::size_t p = 0; p < points; ++p)
        for (int j = 0; j < n; ++j)
            for (int l = 0; l < n; ++l) f.at(p, j, l) = m(j, l);
    return f;
}

// ---------------------------------------------------------------------------
// SpectralContext

SpectralContext::SpectralContext(OrbifoldPtr orbifold, Resolution resolution)
    : orbifold_(std::move(orbifold)), resolution_(std::move(resolution)), n_(orbifold_->complex_dim())
{
    check_resolution(*orbifold_, resolution_);
    const int d = real_dim();
    real_size_ = grid_size(resolution_);
    spectral_size_ = real_size_ / resolution_.back() * (resolution_.back() / 2 + 1);

    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        std::vector<double> in(real_size_);
        std::vector<cplx> out(spectral_size_);
        auto* cin = reinterpret_cast<fftw_complex*>(out.data());
        plan_forward_ = fftw_plan_dft_r2c(d, resolution_.data(), in.data(), cin, FFTW_ESTIMATE | FFTW_UNALIGNED);
        plan_inverse_ = fftw_plan_dft_c2r(d, resolution_.data(), cin, in.data(),
                                          FFTW_ESTIMATE | FFTW_UNALIGNED | FFTW_DESTROY_INPUT);
        if (!plan_forward_ || !plan_inverse_) throw OrbifoldError("FFTW planning failed");
    }

    // zeta = Z k with w = P^{-T} k the real gradient of k.u and zeta_j = (w_j - i w_{n+j}) / 2.
    const Eigen::MatrixXd w = orbifold_->periods().real_periods().transpose().inverse();
    const int n = n_;
    z_coord_ = 0.5 * (w.topRows(n).cast<cplx>() - cplx(0, 1) * w.bottomRows(n).cast<cplx>());
    Eigen::LLT<Eigen::MatrixXcd> llt(orbifold_->periods().background_metric);
    z_unit_ = llt.matrixL().solve(z_coord_);

    nyquist_.assign(spectral_size_, 0);
    band_.assign(spectral_size_, 0);
    weight_.assign(spectral_size_, 2.0);
    lap_symbol_.assign(spectral_size_, 0.0);
    const auto& group = orbifold_->group();
    const int last_half = resolution_.back() / 2;

#pragma omp parallel for schedule(static)
    for (std::size_t s = 0; s < spectral_size_; ++s) {
        int k[8];
        mode(s, k);
        bool nyq = false;
        for (int a = 0; a < d; ++a) nyq = nyq || (2 * std::abs(k[a]) == resolution_[a]);
        nyquist_[s] = nyq;
        const int last = static_cast<int>(s % static_cast<std::size_t>(last_half + 1));
        if (last == 0 || last == last_half) weight_[s] = 1.0;

        bool inside = true;
        for (const auto& g : group) {
            for (int a = 0; a < d && inside; ++a) {
                long v = 0;
                for (int b = 0; b < d; ++b) v += static_cast<long>(g.linear(b, a)) * k[b];
                if (3 * std::abs(v) > resolution_[a]) inside = false;
            }
            if (!inside) break;
        }
        band_[s] = inside;
    }
    for (std::size_t s = 0; s < spectral_size_; ++s) {
        double lap = 0.0;
        for (int j = 0; j < n; ++j) lap += second_symbol(s, j, j, Frame::unitary).real();
        lap_symbol_[s] = lap;
    }
}

SpectralContext::~SpectralContext()
{
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (plan_forward_) fftw_destroy_plan(static_cast<fftw_plan>(plan_forward_));
    if (plan_inverse_) fftw_destroy_plan(static_cast<fftw_plan>(plan_inverse_));
}

std::shared_ptr<const SpectralContext> SpectralContext::get(const OrbifoldPtr& orbifold, const Resolution& resolution)
{
    static std::mutex cache_mutex;
    static std::map<std::pair<std::uint64_t, Resolution>, std::shared_ptr<const SpectralContext>> cache;
    std::lock_guard<std::mutex> lock(cache_mutex);
    auto key = std::make_pair(orbifold->id(), resolution);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    auto ctx = std::make_shared<const SpectralContext>(orbifold, resolution);
    cache.emplace(std::move(key), ctx);
    return ctx;
}

void SpectralContext::forward(const double* in, cplx* out) const
{
    fftw_execute_dft_r2c(static_cast<fftw_plan>(plan_forward_), const_cast<double*>(in),
                         reinterpret_cast<fftw_complex*>(out));
    const double scale = 1.0 / static_cast<double>(real_size_);
#pragma omp parallel for schedule(static)
    for (std::size_t s = 0; s < spectral_size_; ++s) out[s] *= scale;
}

void SpectralContext::inverse(const cplx* in, double* out) const
{
    std::vector<cplx> scratch(in, in + spectral_size_);
    fftw_execute_dft_c2r(static_cast<fftw_plan>(plan_inverse_), reinterpret_cast<fftw_complex*>(scratch.data()), out);
}

std::vector<cplx> SpectralContext::forward(const std::vector<double>& in) const
{
    std::vector<cplx> out(spectral_size_);
    forward(in.data(), out.data());
    return out;
}

std::vector<double> SpectralContext::inverse(const std::vector<cplx>& in) const
{
    std::vector<double> out(real_size_);
    inverse(in.data(), out.data());
    return out;
}

void SpectralContext::mode(std::size_t s, int* k) const
{
    const int d = real_dim();
    const std::size_t last_len = static_cast<std::size_t>(resolution_.back() / 2 + 1);
    k[d - 1] = static_cast<int>(s % last_len);
    s /= last_len;
    for (int a = d - 2; a >= 0; --a) {
        const int na = resolution_[a];
        const int i = static_cast<int>(s % static_cast<std::size_t>(na));
        s /= static_cast<std::size_t>(na);
        k[a] = (2 * i > na) ? i - na : i;
    }
}

std::vector<int> SpectralContext::mode(std::size_t s) const
{
    std::vector<int> k(real_dim());
    mode(s, k.data());
    return k;
}

std::size_t SpectralContext::conjugate_slot(std::size_t s) const
{
    const int d = real_dim();
    int k[8];
    mode(s, k);
    const int last_half = resolution_.back() / 2;
    if (k[d - 1] != 0 && k[d - 1] != last_half) return s;
    std::size_t out = 0;
    for (int a = 0; a < d - 1; ++a) {
        const int na = resolution_[a];
        out = out * static_cast<std::size_t>(na) + static_cast<std::size_t>(((-k[a]) % na + na) % na);
    }
    return out * static_cast<std::size_t>(last_half + 1) + static_cast<std::size_t>(k[d - 1]);
}

cplx SpectralContext::zeta(std::size_t s, int j, Frame frame) const
{
    if (nyquist_[s]) return 0.0;
    int k[8];
    mode(s, k);
    const auto& z = frame_matrix(frame);
    cplx v = 0.0;
    for (int a = 0; a < real_dim(); ++a) v += z(j, a) * static_cast<double>(k[a]);
    return v;
}

cplx SpectralContext::second_symbol(std::size_t s, int j, int l, Frame frame) const
{
    const auto& z = frame_matrix(frame);
    const int d = real_dim();
    int k[8];
    mode(s, k);
    if (!nyquist_[s]) {
        cplx zj = 0.0, zl = 0.0;
        for (int a = 0; a < d; ++a) {
            zj += z(j, a) * static_cast<double>(k[a]);
            zl += z(l, a) * static_cast<double>(k[a]);
        }
        return -kFourPiSq * zj * std::conj(zl);
    }
    // Mixed products k_a k_b with a Nyquist axis average to zero over the two aliases.
    bool nyq[8];
    for (int a = 0; a < d; ++a) nyq[a] = 2 * std::abs(k[a]) == resolution_[a];
    cplx v = 0.0;
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
            if (a != b && (nyq[a] || nyq[b])) continue;
            v += z(j, a) * std::conj(z(l, b)) * static_cast<double>(k[a]) * static_cast<double>(k[b]);
        }
    return -kFourPiSq * v;
}

void SpectralContext::slot_output(const std::vector<cplx>& coeffs, const std::function<cplx(std::size_t)>& mult,
                                  bool odd, std::vector<double>& re, std::vector<double>& im) const
{
    // Real/imaginary parts of the (generally complex) output field have Hermitian multipliers
    // (m(k) + conj m(-k)) / 2 and (m(k) - conj m(-k)) / 2i; m(-k) = -m(k) for odd, m(k) for even symbols.
    std::vector<cplx> re_spec(spectral_size_), im_spec(spectral_size_);
#pragma omp parallel for schedule(static)
    for (std::size_t s = 0; s < spectral_size_; ++s) {
        const cplx m = mult(s);
        cplx a, b;
        if (odd) {
            a = cplx(0.0, m.imag());
            b = cplx(0.0, -m.real());
        } else {
            a = m.real();
            b = m.imag();
        }
        re_spec[s] = a * coeffs[s];
        im_spec[s] = b * coeffs[s];
    }
    re.resize(real_size_);
    im.resize(real_size_);
    inverse(re_spec.data(), re.data());
    inverse(im_spec.data(), im.data());
}

HermitianMatrixField SpectralContext::hessian(const std::vector<cplx>& coeffs, Frame frame) const
{
    const int n = n_;
    HermitianMatrixField h(n, real_size_);
    std::vector<double> re(real_size_), im(real_size_);
    std::vector<cplx> spec(spectral_size_);
    for (int j = 0; j < n; ++j) {
        for (int l = j; l < n; ++l) {
            if (j == l) {
#pragma omp parallel for schedule(static)
                for (std::size_t s = 0; s < spectral_size_; ++s)
                    spec[s] = second_symbol(s, j, j, frame).real() * coeffs[s];
                inverse(spec.data(), re.data());
#pragma omp parallel for schedule(static)
                for (std::size_t p = 0; p < real_size_; ++p) h.at(p, j, j) = re[p];
            } else {
                slot_output(
                    coeffs, [&](std::size_t s) { return second_symbol(s, j, l, frame); }, false, re, im);
#pragma omp parallel for schedule(static)
                for (std::size_t p = 0; p < real_size_; ++p) {
                    h.at(p, j, l) = cplx(re[p], im[p]);
                    h.at(p, l, j) = cplx(re[p], -im[p]);
                }
            }
        }
    }
    return h;
}

void SpectralContext::first_derivative(const std::vector<cplx>& coeffs, int j, Frame frame, std::vector<double>& re,
                                       std::vector<double>& im) const
{
    slot_output(
        coeffs, [&](std::size_t s) { return cplx(0.0, kTwoPi) * zeta(s, j, frame); }, true, re, im);
}

void SpectralContext::third_derivative(const std::vector<cplx>& coeffs, int j, int m, int l, Frame frame,
                                       std::vector<double>& re, std::vector<double>& im) const
{
    const cplx i_two_pi_cubed = std::pow(cplx(0.0, kTwoPi), 3);
    slot_output(
        coeffs,
        [&](std::size_t s) {
            return i_two_pi_cubed * zeta(s, j, frame) * zeta(s, m, frame) * std::conj(zeta(s, l, frame));
        },
        true, re, im);
}

void SpectralContext::truncate_to_band(std::vector<cplx>& coeffs) const
{
#pragma omp parallel for schedule(static)
    for (std::size_t s = 0; s < spectral_size_; ++s)
        if (!band_[s]) coeffs[s] = 0.0;
}

std::vector<cplx> SpectralContext::coefficients_from_terms(const std::vector<FourierTerm>& terms) const
{
    const int d = real_dim();
    std::vector<cplx> coeffs(spectral_size_, 0.0);
    auto slot_of = [&](std::vector<long> k, bool& stored_conj) -> std::size_t {
        for (int a = 0; a < d; ++a) {
            k[a] %= resolution_[a];
            if (k[a] < 0) k[a] += resolution_[a];
        }
        stored_conj = false;
        if (2 * k[d - 1] > resolution_[d - 1]) {
            // Only the conjugate partner -k is stored in the half layout.
            stored_conj = true;
            for (int a = 0; a < d; ++a) k[a] = (resolution_[a] - k[a]) % resolution_[a];
        }
        std::size_t s = 0;
        for (int a = 0; a < d - 1; ++a) s = s * static_cast<std::size_t>(resolution_[a]) + static_cast<std::size_t>(k[a]);
        return s * static_cast<std::size_t>(resolution_[d - 1] / 2 + 1) + static_cast<std::size_t>(k[d - 1]);
    };
    for (const auto& term : terms) {
        if (static_cast<int>(term.k.size()) != d) throw OrbifoldError("Fourier term has wrong dimension");
        // Re(c e^{i theta}) = (c e^{i theta} + conj(c) e^{-i theta}) / 2
        std::vector<long> kp(term.k.begin(), term.k.end()), km(d);
        for (int a = 0; a < d; ++a) km[a] = -kp[a];
        bool conj_p, conj_m;
        const std::size_t sp = slot_of(kp, conj_p);
        const std::size_t sm = slot_of(km, conj_m);
        const cplx half = 0.5 * term.c;
        if (!conj_p) coeffs[sp] += half;
        if (!conj_m) coeffs[sm] += std::conj(half);
    }
    return coeffs;
}

// ---------------------------------------------------------------------------
// Field operators

HermitianMatrixField complex_hessian(const SpectralField& phi)
{
    const auto ctx = SpectralContext::get(phi);
    return ctx->hessian(ctx->forward(phi.samples()), Frame::coordinate);
}

SpectralField laplacian(const SpectralField& phi)
{
    const auto ctx = SpectralContext::get(phi);
    auto coeffs = ctx->forward(phi.samples());
#pragma omp parallel for schedule(static)
    for (std::size_t s = 0; s < coeffs.size(); ++s) coeffs[s] *= ctx->laplacian_symbol(s);
    return SpectralField(phi.orbifold(), phi.resolution(), ctx->inverse(coeffs), phi.invariant_flag());
}

SpectralField laplacian_wrt(const SpectralField& phi, const HermitianMatrixField& h_inv,
                            std::vector<std::string>* warnings)
{
    const int n = phi.orbifold()->complex_dim();
    if (h_inv.n != n || h_inv.points != phi.size()) throw OrbifoldError("h_inv does not match the field grid");
    if (warnings) {
        double min_eig = std::numeric_limits<double>::infinity();
        for (std::size_t p = 0; p < h_inv.points; ++p) {
            Eigen::MatrixXcd m(n, n);
            for (int j = 0; j < n; ++j)
                for (int l = 0; l < n; ++l) m(j, l) = h_inv.at(p, j, l);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
            min_eig = std::min(min_eig, es.eigenvalues().minCoeff());
        }
        if (!(min_eig > 0.0))
            warnings->push_back("laplacian_wrt: h_inv is not positive definite (min eigenvalue " +
                                std::to_string(min_eig) + ")");
    }
    const auto h = complex_hessian(phi);
    SpectralField out(phi.orbifold(), phi.resolution());
    kernels::parallel::trace_product(n, h_inv.data, h.data, out.samples());
    return out;
}

SpectralField green_solve(const SpectralField& h)
{
    const auto ctx = SpectralContext::get(h);
    auto coeffs = ctx->forward(h.samples());
    coeffs[0] = 0.0;
#pragma omp parallel for schedule(static)
    for (std::size_t s = 1; s < coeffs.size(); ++s) coeffs[s] /= ctx->laplacian_symbol(s);
    return SpectralField(h.orbifold(), h.resolution(), ctx->inverse(coeffs), h.invariant_flag());
}

SpectralField grad_sq(const SpectralField& phi)
{
    const auto ctx = SpectralContext::get(phi);
    const auto coeffs = ctx->forward(phi.samples());
    SpectralField out(phi.orbifold(), phi.resolution());
    std::vector<double> re, im;
    for (int j = 0; j < ctx->complex_dim(); ++j) {
        ctx->first_derivative(coeffs, j, Frame::unitary, re, im);
        auto& o = out.samples();
        for (std::size_t p = 0; p < o.size(); ++p) o[p] += re[p] * re[p] + im[p] * im[p];
    }
    out.set_invariant_flag(phi.invariant_flag());
    return out;
}

SpectralField green_kernel(const OrbifoldPtr& orb, const Resolution& resolution, std::size_t point_index)
{
    // Delta G_x = 1/V - delta_x with delta_x the grid point mass of integral one.
    SpectralField mass(orb, resolution);
    if (point_index >= mass.size()) throw OrbifoldError("green_kernel: point index out of range");
    mass[point_index] = -static_cast<double>(mass.size()) / orb->volume();
    return green_solve(mass);
}

double poincare_lambda(const OrbifoldPtr& orb, const Resolution& resolution)
{
    const auto ctx = SpectralContext::get(orb, resolution);
    const int d = ctx->real_dim();
    const auto& group = orb->group();
    std::vector<std::vector<double>> shifts;
    for (const auto& g : group) {
        std::vector<double> t(d);
        for (int a = 0; a < d; ++a) t[a] = g.translation[a].get_d();
        shifts.push_back(std::move(t));
    }
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t s = 1; s < ctx->spectral_size(); ++s) {
        if (ctx->nyquist(s)) continue;
        const double lambda = -ctx->laplacian_symbol(s);
        if (lambda >= best) continue;
        const auto k = ctx->mode(s);
        bool survives = group.size() == 1;
        if (!survives) {
            // Project e_k onto invariants: (1/|G|) sum_g e^{2 pi i k.t_g} e_{M_g^T k}.
            std::map<std::vector<long>, cplx> image;
            for (std::size_t gi = 0; gi < group.size(); ++gi) {
                std::vector<long> kk(d, 0);
                double phase = 0.0;
                for (int a = 0; a < d; ++a) {
                    for (int b = 0; b < d; ++b) kk[a] += static_cast<long>(group[gi].linear(b, a)) * k[b];
                    phase += k[a] * shifts[gi][a];
                }
                image[kk] += std::polar(1.0, kTwoPi * phase);
            }
            for (const auto& [kk, c] : image) survives = survives || std::abs(c) > 1e-9;
        }
        if (survives) best = lambda;
    }
    return best;
}

std::vector<FourierTerm> random_terms(int real_dim, int band, std::mt19937_64& rng, bool zero_mean)
{
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<FourierTerm> terms;
    std::vector<int> k(real_dim, -band);
    while (true) {
        // Keep one of each +-k pair: first nonzero component positive.
        int first = 0;
        for (int v : k)
            if (v != 0) {
                first = v;
                break;
            }
        double norm2 = 0.0;
        for (int v : k) norm2 += static_cast<double>(v) * v;
        if (first > 0) {
            const double re = normal(rng), im = normal(rng);
            terms.push_back({k, cplx(re, im) / (1.0 + norm2)});
        } else if (first == 0 && !zero_mean) {
            terms.push_back({k, cplx(normal(rng), 0.0)});
        }
        int a = real_dim - 1;
        while (a >= 0 && k[a] == band) k[a--] = -band;
        if (a < 0) break;
        ++k[a];
    }
    return terms;
}

SpectralField field_from_terms(const OrbifoldPtr& orb, const Resolution& resolution,
                               const std::vector<FourierTerm>& terms)
{
    const auto ctx = SpectralContext::get(orb, resolution);
    return SpectralField(orb, resolution, ctx->inverse(ctx->coefficients_from_terms(terms)));
}

SpectralField random_band_limited(const OrbifoldPtr& orb, const Resolution& resolution, int band,
                                  std::mt19937_64& rng, bool zero_mean)
{
    return field_from_terms(orb, resolution, random_terms(orb->real_dim(), band, rng, zero_mean));
}

double lp_norm(const SpectralField& f, double p)
{
    return std::pow(integrate(pointwise_map(f, [p](double v) { return std::pow(std::abs(v), p); })), 1.0 / p);
}

SobolevProbe sobolev_probe(const OrbifoldPtr& orb, const Resolution& resolution, int num_samples,
                           std::uint64_t seed, int band)
{
    const int n = orb->complex_dim();
    if (n < 2) throw OrbifoldError("sobolev_probe needs complex dimension >= 2 (the exponent 2n/(n-1) is infinite)");
    const double p = 2.0 * n / (n - 1.0);
    std::mt19937_64 rng(seed);
    SobolevProbe probe;
    for (int i = 0; i < num_samples; ++i) {
        const auto f = project_invariant(random_band_limited(orb, resolution, band, rng));
        const double lp = lp_norm(f, p);
        const double l2sq = integrate(pointwise_product(f, f));
        const double dsq = integrate(grad_sq(f));
        const double ratio = lp * lp / (l2sq + dsq);
        probe.all_finite = probe.all_finite && std::isfinite(ratio);
        probe.ratios.push_back(ratio);
        probe.max_ratio = std::max(probe.max_ratio, ratio);
    }
    probe.fitted_constant = probe.max_ratio;
    return probe;
}

}  // namespace orbifold
