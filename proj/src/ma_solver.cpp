#include "orbifold/ma_solver.hpp"

#include "orbifold/kernels.hpp"
#include "orbifold/krylov.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace orbifold {

std::string to_string(Mode mode)
{
    return mode == Mode::prescribed_volume ? "prescribed_volume" : "kahler_einstein";
}

void SolverConfig::validate() const
{
    if (t_schedule.size() < 2) throw std::invalid_argument("t_schedule needs at least two nodes");
    if (t_schedule.front() != 0.0 || t_schedule.back() != 1.0)
        throw std::invalid_argument("t_schedule must start at 0 and end at 1");
    for (std::size_t i = 1; i < t_schedule.size(); ++i)
        if (!(t_schedule[i] > t_schedule[i - 1])) throw std::invalid_argument("t_schedule must be strictly increasing");
    if (!(newton_tol > 0) || !(linear_tol > 0) || !(min_step > 0) || !(positivity_margin_min > 0))
        throw std::invalid_argument("tolerances must be positive");
    if (max_newton < 1 || linear_max_iter < 1 || gmres_restart < 1 || max_bisections < 0)
        throw std::invalid_argument("iteration limits must be positive");
}

namespace {

/// Hessian and log density of an iterate, in the unitary frame (g = I).
struct Iterate {
    std::shared_ptr<const SpectralContext> ctx;
    std::vector<cplx> coeffs;
    HermitianMatrixField h;
    std::vector<double> log_density;
    double min_eig = 0.0;
};

Iterate evaluate(const SpectralField& phi)
{
    Iterate it;
    it.ctx = SpectralContext::get(phi);
    it.coeffs = it.ctx->forward(phi.samples());
    it.h = it.ctx->hessian(it.coeffs, Frame::unitary);
    it.log_density.resize(phi.size());
    it.min_eig = kernels::parallel::log_density(it.h.n, it.h.data, it.log_density);
    return it;
}

void require_positive(const Iterate& it)
{
    if (!(it.min_eig > 0.0))
        throw SolverError("g + ddbar phi is not positive definite (minimum eigenvalue " + std::to_string(it.min_eig) +
                          ")");
}

double volume_error_of(const Iterate& it)
{
    double s = 0.0;
#pragma omp parallel for reduction(+ : s) schedule(static)
    for (std::size_t p = 0; p < it.log_density.size(); ++p) s += std::expm1(it.log_density[p]);
    return std::abs(s / static_cast<double>(it.log_density.size()));
}

std::vector<double> residual_from(const Iterate& it, const SpectralField& phi, const SpectralField& F, double t,
                                  Mode mode, double c_t)
{
    std::vector<double> r(phi.size());
    const auto& f = F.samples();
    const auto& ph = phi.samples();
    if (mode == Mode::prescribed_volume) {
#pragma omp parallel for schedule(static)
        for (std::size_t p = 0; p < r.size(); ++p) r[p] = it.log_density[p] - t * f[p] - c_t;
    } else {
#pragma omp parallel for schedule(static)
        for (std::size_t p = 0; p < r.size(); ++p) r[p] = it.log_density[p] - t * f[p] - ph[p];
    }
    return r;
}

bool retained(const SpectralContext& ctx, std::size_t s, bool drop_mean, bool dealias)
{
    if (s == 0 && drop_mean) return false;
    if (ctx.nyquist(s)) return false;
    return !dealias || ctx.in_dealias_band(s);
}

/// Residual, Newton right-hand side and both residual norms of an iterate.
struct Measure {
    std::vector<double> r;
    std::vector<double> rhs;
    double grid = 0.0;
    double resolved = 0.0;
};

Measure measure(const Iterate& it, const SpectralField& phi, const SpectralField& F, double t, Mode mode,
                double c_t, bool dealias)
{
    Measure m;
    m.r = residual_from(it, phi, F, t, mode, c_t);
    m.grid = kernels::parallel::max_abs(m.r);
    m.rhs.resize(m.r.size());
    const bool pv = mode == Mode::prescribed_volume;
    if (pv) {
        // exponential form, multiplied through by the density
#pragma omp parallel for schedule(static)
        for (std::size_t p = 0; p < m.r.size(); ++p)
            m.rhs[p] = std::exp(it.log_density[p]) * (std::exp(-m.r[p]) - 1.0);
    } else {
#pragma omp parallel for schedule(static)
        for (std::size_t p = 0; p < m.r.size(); ++p) m.rhs[p] = -m.r[p];
    }
    auto coeffs = it.ctx->forward(m.rhs);
    for (std::size_t s = 0; s < coeffs.size(); ++s)
        if (!retained(*it.ctx, s, pv, dealias)) coeffs[s] = 0.0;
    m.resolved = kernels::parallel::max_abs(it.ctx->inverse(coeffs));
    return m;
}

void check_source(const SpectralField& phi, const SpectralField& F)
{
    if (!phi.same_grid(F)) throw std::invalid_argument("phi and F live on different grids");
}

// Linearized operator in band-limited coefficient space:
//   psi -> band( Re tr(C H(psi)) - sigma psi ),
// with unknowns the real and imaginary parts of the retained slots.
class LinearSystem {
  public:
    LinearSystem(std::shared_ptr<const SpectralContext> ctx, HermitianMatrixField c, double sigma, bool drop_mean,
                 bool dealias)
        : ctx_(std::move(ctx)), c_(std::move(c)), sigma_(sigma)
    {
        for (std::size_t s = 0; s < ctx_->spectral_size(); ++s)
            if (retained(*ctx_, s, drop_mean, dealias)) slots_.push_back(s);
        std::vector<std::size_t> where(ctx_->spectral_size(), npos);
        for (std::size_t i = 0; i < slots_.size(); ++i) where[slots_[i]] = i;
        partner_.resize(slots_.size());
        for (std::size_t i = 0; i < slots_.size(); ++i) partner_[i] = where[ctx_->conjugate_slot(slots_[i])];

        // Mode-wise inverse of the operator with C replaced by its mean.
        const int n = c_.n;
        Eigen::MatrixXcd cbar = Eigen::MatrixXcd::Zero(n, n);
        for (std::size_t p = 0; p < c_.points; ++p)
            for (int j = 0; j < n; ++j)
                for (int l = 0; l < n; ++l) cbar(j, l) += c_.at(p, j, l);
        cbar /= static_cast<double>(c_.points);
        precond_.resize(slots_.size());
        for (std::size_t i = 0; i < slots_.size(); ++i) {
            cplx sym = 0.0;
            for (int j = 0; j < n; ++j)
                for (int l = 0; l < n; ++l) sym += cbar(j, l) * ctx_->second_symbol(slots_[i], l, j, Frame::unitary);
            const double v = sym.real() - sigma_;
            precond_[i] = v != 0.0 ? 1.0 / v : 0.0;
        }
    }

    std::size_t unknowns() const { return 2 * slots_.size(); }

    double dot(const Vec& x, const Vec& y) const
    {
        double s = 0.0;
        for (std::size_t i = 0; i < slots_.size(); ++i)
            s += ctx_->parseval_weight(slots_[i]) * (x[2 * i] * y[2 * i] + x[2 * i + 1] * y[2 * i + 1]);
        return s;
    }

    std::vector<cplx> scatter(const Vec& x) const
    {
        std::vector<cplx> coeffs(ctx_->spectral_size(), 0.0);
        for (std::size_t i = 0; i < slots_.size(); ++i) {
            const cplx v(x[2 * i], x[2 * i + 1]);
            const std::size_t q = partner_[i];
            if (q == i) {
                coeffs[slots_[i]] = v.real();
            } else if (q != npos) {
                coeffs[slots_[i]] = 0.5 * (v + std::conj(cplx(x[2 * q], x[2 * q + 1])));
            } else {
                coeffs[slots_[i]] = v;
            }
        }
        return coeffs;
    }

    Vec gather(const std::vector<cplx>& coeffs) const
    {
        Vec x(unknowns());
        for (std::size_t i = 0; i < slots_.size(); ++i) {
            x[2 * i] = coeffs[slots_[i]].real();
            x[2 * i + 1] = coeffs[slots_[i]].imag();
        }
        return x;
    }

    void apply(const Vec& x, Vec& y) const
    {
        const auto coeffs = scatter(x);
        const auto h = ctx_->hessian(coeffs, Frame::unitary);
        std::vector<double> out(ctx_->real_size());
        kernels::parallel::trace_product(c_.n, c_.data, h.data, out);
        if (sigma_ != 0.0) {
            const auto psi = ctx_->inverse(coeffs);
            kernels::parallel::axpy(-sigma_, psi, out);
        }
        y = gather(ctx_->forward(out));
    }

    void precondition(const Vec& x, Vec& y) const
    {
        y.resize(x.size());
        for (std::size_t i = 0; i < slots_.size(); ++i) {
            y[2 * i] = precond_[i] * x[2 * i];
            y[2 * i + 1] = precond_[i] * x[2 * i + 1];
        }
    }

    /// Dense assembly and minimum-norm least-squares solve.
    Vec dense_solve(const Vec& b) const
    {
        const std::size_t m = unknowns();
        Eigen::MatrixXd a(m, m);
        Vec e(m, 0.0), col;
        for (std::size_t j = 0; j < m; ++j) {
            e[j] = 1.0;
            apply(e, col);
            e[j] = 0.0;
            for (std::size_t i = 0; i < m; ++i) a(i, j) = col[i];
        }
        Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(m));
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
        cod.setThreshold(1e-12);
        const Eigen::VectorXd sol = cod.solve(rhs);
        return Vec(sol.data(), sol.data() + m);
    }

  private:
    static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
    std::shared_ptr<const SpectralContext> ctx_;
    HermitianMatrixField c_;
    double sigma_;
    std::vector<std::size_t> slots_;
    std::vector<std::size_t> partner_;
    std::vector<double> precond_;
};

}  // namespace

SpectralField normalize_F(const SpectralField& F)
{
    const double vol = F.orbifold()->volume();
    const double a = std::log(vol / integrate(pointwise_map(F, [](double v) { return std::exp(v); })));
    SpectralField out = F;
    out += a;
    return out;
}

double c_shift(const SpectralField& F, double t)
{
    if (t == 0.0) return 0.0;
    const double vol = F.orbifold()->volume();
    return std::log(vol / integrate(pointwise_map(F, [t](double v) { return std::exp(t * v); })));
}

SpectralField ma_density(const SpectralField& phi)
{
    const auto it = evaluate(phi);
    require_positive(it);
    SpectralField out(phi.orbifold(), phi.resolution());
    auto& o = out.samples();
#pragma omp parallel for schedule(static)
    for (std::size_t p = 0; p < o.size(); ++p) o[p] = std::exp(it.log_density[p]);
    out.set_invariant_flag(phi.invariant_flag());
    return out;
}

SpectralField residual(const SpectralField& phi, const SpectralField& F, double t, Mode mode)
{
    check_source(phi, F);
    const auto it = evaluate(phi);
    require_positive(it);
    const double c_t = mode == Mode::prescribed_volume ? c_shift(F, t) : 0.0;
    return SpectralField(phi.orbifold(), phi.resolution(), residual_from(it, phi, F, t, mode, c_t));
}

double resolved_residual(const SpectralField& phi, const SpectralField& F, double t, Mode mode, bool dealias)
{
    check_source(phi, F);
    const auto it = evaluate(phi);
    require_positive(it);
    const double c_t = mode == Mode::prescribed_volume ? c_shift(F, t) : 0.0;
    return measure(it, phi, F, t, mode, c_t, dealias).resolved;
}

NewtonResult newton_step(const SpectralField& phi, const SpectralField& F, double t, Mode mode,
                         const SolverConfig& config)
{
    check_source(phi, F);
    const auto it = evaluate(phi);
    require_positive(it);
    const auto& ctx = it.ctx;
    const int n = it.h.n;
    const double c_t = mode == Mode::prescribed_volume ? c_shift(F, t) : 0.0;
    const auto m0 = measure(it, phi, F, t, mode, c_t, config.dealias);

    // Prescribed volume: tr(adj(I + H) H(psi)) = D (e^{-r} - 1), exact in dimension one.
    // KE: tr((I + H)^{-1} H(psi)) - psi = -r.
    HermitianMatrixField c(n, phi.size());
    kernels::parallel::inverse_metric(n, it.h.data, c.data);
    if (mode == Mode::prescribed_volume) {
#pragma omp parallel for schedule(static)
        for (std::size_t p = 0; p < phi.size(); ++p) {
            const double d = std::exp(it.log_density[p]);
            for (int q = 0; q < n * n; ++q) c.data[p * n * n + q] *= d;
        }
    }

    const bool pv = mode == Mode::prescribed_volume;
    const LinearSystem sys(ctx, std::move(c), pv ? 0.0 : 1.0, pv, config.dealias);
    const Vec b = sys.gather(ctx->forward(m0.rhs));
    Vec x(sys.unknowns(), 0.0);

    NewtonResult out;
    bool solved = false;
    if (!config.force_dense) {
        const auto res = gmres([&](const Vec& in, Vec& o) { sys.apply(in, o); },
                               [&](const Vec& in, Vec& o) { sys.precondition(in, o); },
                               [&](const Vec& u, const Vec& v) { return sys.dot(u, v); }, b, x, config.linear_tol,
                               config.gmres_restart, config.linear_max_iter, 1e-15);
        out.linear_iterations = res.iterations;
        solved = res.converged;
    }
    if (!solved) {
        if (sys.unknowns() > config.dense_limit)
            throw SolverError("inner solve did not reach linear_tol within " + std::to_string(config.linear_max_iter) +
                              " iterations");
        x = sys.dense_solve(b);
        out.dense_used = true;
    }

    SpectralField psi(phi.orbifold(), phi.resolution(), ctx->inverse(sys.scatter(x)));
    if (phi.orbifold()->order() > 1) psi = project_invariant(psi);

    for (double s = 1.0; s >= config.min_step; s *= 0.5) {
        SpectralField cand = phi;
        kernels::parallel::axpy(s, psi.samples(), cand.samples());
        cand.set_invariant_flag(phi.invariant_flag() && psi.invariant_flag());
        const auto cit = evaluate(cand);
        if (!(cit.min_eig >= config.positivity_margin_min)) continue;
        const auto mc = measure(cit, cand, F, t, mode, c_t, config.dealias);
        if (!(mc.resolved < m0.resolved)) continue;
        out.phi = std::move(cand);
        out.residual = mc.resolved;
        out.grid_residual = mc.grid;
        out.step = s;
        out.volume_error = volume_error_of(cit);
        out.positivity_min = cit.min_eig;
        return out;
    }
    throw SolverError("line search exhausted at t = " + std::to_string(t) + " (residual " + std::to_string(m0.resolved) + ")");
}

namespace {

/// Newton iterations at one continuity node; throws SolverError on failure.
SpectralField solve_node(SpectralField phi, const SpectralField& F, double t, Mode mode, const SolverConfig& config,
                         std::vector<ResidualRecord>& history)
{
    const auto it = evaluate(phi);
    require_positive(it);
    const double c_t = mode == Mode::prescribed_volume ? c_shift(F, t) : 0.0;
    const auto m0 = measure(it, phi, F, t, mode, c_t, config.dealias);
    double res = m0.resolved;
    history.push_back({t, 0, res, m0.grid, volume_error_of(it), it.min_eig});
    for (int k = 1; res > config.newton_tol; ++k) {
        if (k > config.max_newton)
            throw SolverError("Newton did not converge at t = " + std::to_string(t) + " (residual " +
                              std::to_string(res) + ")");
        auto step = newton_step(phi, F, t, mode, config);
        phi = std::move(step.phi);
        res = step.residual;
        history.push_back({t, k, res, step.grid_residual, step.volume_error, step.positivity_min});
    }
    return phi;
}

}  // namespace

MASolution solve_continuity(const SpectralField& F, const SolverConfig& config, Mode mode,
                            const std::optional<SpectralField>& initial_guess)
{
    config.validate();
    if (F.orbifold()->order() > 1 && invariance_defect(F) > 1e-9)
        throw std::invalid_argument("source F is not invariant under the group");

    MASolution sol;
    sol.mode = mode;
    sol.F = mode == Mode::prescribed_volume ? normalize_F(F) : F;
    sol.F.set_invariant_flag(true);
    const auto ctx = SpectralContext::get(F);

    SpectralField phi(F.orbifold(), F.resolution());
    if (initial_guess) {
        if (!initial_guess->same_grid(F)) throw std::invalid_argument("initial guess is on a different grid");
        // Iterates stay in the dealiasing band, so the guess is truncated to it.
        auto coeffs = ctx->forward(initial_guess->samples());
        if (config.dealias) ctx->truncate_to_band(coeffs);
        if (mode == Mode::prescribed_volume) coeffs[0] = 0.0;
        phi = SpectralField(F.orbifold(), F.resolution(), ctx->inverse(coeffs));
        if (F.orbifold()->order() > 1) phi = project_invariant(phi);
    }
    phi.set_invariant_flag(true);

    const auto& schedule = config.t_schedule;
    phi = solve_node(phi, sol.F, 0.0, mode, config, sol.residual_history);
    double t_done = 0.0;
    sol.c_table.emplace_back(0.0, 0.0);
    for (std::size_t node = 1; node < schedule.size(); ++node) {
        const double target = schedule[node];
        double attempt = target;
        int halvings = 0;
        while (true) {
            auto history = sol.residual_history;
            try {
                phi = solve_node(phi, sol.F, attempt, mode, config, history);
                sol.residual_history = std::move(history);
                t_done = attempt;
                sol.c_table.emplace_back(attempt, mode == Mode::prescribed_volume ? c_shift(sol.F, attempt) : 0.0);
                if (attempt == target) break;
                attempt = target;
            } catch (const SolverError& e) {
                if (++halvings > config.max_bisections)
                    throw SolverError(std::string("continuity path stalled before t = ") + std::to_string(target) +
                                      ": " + e.what());
                ++sol.bisections;
                attempt = 0.5 * (t_done + attempt);
            }
        }
    }
    if (mode == Mode::prescribed_volume) phi += -phi.mean();
    phi.set_invariant_flag(true);
    sol.final_t = t_done;
    sol.diagnostics = diagnostics(phi, sol.F, 1.0, mode);
    sol.phi = std::move(phi);
    return sol;
}

MASolution solve_ke(const SpectralField& F, const SolverConfig& config,
                    const std::optional<SpectralField>& initial_guess)
{
    return solve_continuity(F, config, Mode::kahler_einstein, initial_guess);
}

PointwiseDiagnostics pointwise_diagnostics(const SpectralField& phi)
{
    const auto ctx = SpectralContext::get(phi);
    const int n = ctx->complex_dim();
    const std::size_t points = phi.size();
    const auto coeffs = ctx->forward(phi.samples());
    const auto h = ctx->hessian(coeffs, Frame::unitary);

    // Q = ddbar (Delta phi); T_{jml} = d_j d_m dbar_l phi for j <= m.
    std::vector<cplx> lap_coeffs(coeffs.size());
    for (std::size_t s = 0; s < coeffs.size(); ++s) lap_coeffs[s] = ctx->laplacian_symbol(s) * coeffs[s];
    const auto q = ctx->hessian(lap_coeffs, Frame::unitary);
    auto t_index = [n](int j, int m, int l) {
        if (j > m) std::swap(j, m);
        return (j * n + m) * n + l;
    };
    std::vector<std::vector<cplx>> third(static_cast<std::size_t>(n * n * n));
    std::vector<double> re, im;
    for (int j = 0; j < n; ++j)
        for (int m = j; m < n; ++m)
            for (int l = 0; l < n; ++l) {
                ctx->third_derivative(coeffs, j, m, l, Frame::unitary, re, im);
                auto& dst = third[t_index(j, m, l)];
                dst.resize(points);
                for (std::size_t p = 0; p < points; ++p) dst[p] = cplx(re[p], im[p]);
            }

    PointwiseDiagnostics out;
    out.s_norm_sq.resize(points);
    out.margin.resize(points);
#pragma omp parallel for schedule(static)
    for (std::size_t p = 0; p < points; ++p) {
        Eigen::MatrixXcd g(n, n), qm(n, n);
        for (int j = 0; j < n; ++j)
            for (int l = 0; l < n; ++l) {
                g(j, l) = h.at(p, j, l) + (j == l ? 1.0 : 0.0);
                qm(j, l) = q.at(p, j, l);
            }
        const Eigen::MatrixXcd gi = g.inverse();
        auto T = [&](int j, int m, int l) { return third[t_index(j, m, l)][p]; };

        // S^k_{jm} = g^{k lbar} T_{jml}; g^{k lbar} = gi(l, k).
        std::vector<cplx> s(static_cast<std::size_t>(n * n * n), 0.0);
        for (int k = 0; k < n; ++k)
            for (int j = 0; j < n; ++j)
                for (int m = 0; m < n; ++m) {
                    cplx v = 0.0;
                    for (int l = 0; l < n; ++l) v += gi(l, k) * T(j, m, l);
                    s[(k * n + j) * n + m] = v;
                }
        cplx s2 = 0.0;
        for (int k = 0; k < n; ++k)
            for (int r = 0; r < n; ++r)
                for (int j = 0; j < n; ++j)
                    for (int pp = 0; pp < n; ++pp)
                        for (int m = 0; m < n; ++m)
                            for (int qq = 0; qq < n; ++qq)
                                s2 += gi(pp, j) * gi(qq, m) * g(k, r) * s[(k * n + j) * n + m] *
                                      std::conj(s[(r * n + pp) * n + qq]);
        out.s_norm_sq[p] = s2.real();

        // Laplacian of log tr against the perturbed metric, and the flat trace of its Ricci form.
        const double tr = g.trace().real();
        std::vector<cplx> a(n, 0.0);
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) a[j] += T(j, k, k);
        cplx lap_hat = 0.0;
        for (int j = 0; j < n; ++j)
            for (int l = 0; l < n; ++l) lap_hat += gi(l, j) * (qm(j, l) / tr - a[j] * std::conj(a[l]) / (tr * tr));
        cplx lap_logdet = (gi * qm).trace();
        for (int k = 0; k < n; ++k) {
            Eigen::MatrixXcd ak(n, n), bk(n, n);
            for (int m = 0; m < n; ++m)
                for (int l = 0; l < n; ++l) {
                    ak(m, l) = T(k, m, l);
                    bk(m, l) = std::conj(T(k, l, m));
                }
            lap_logdet -= (gi * bk * gi * ak).trace();
        }
        out.margin[p] = (lap_hat - lap_logdet / tr).real();
    }
    return out;
}

DiagnosticsReport diagnostics(const SpectralField& phi, const SpectralField& F, double t, Mode mode)
{
    (void)F;
    (void)t;
    (void)mode;
    const auto it = evaluate(phi);
    const int n = it.h.n;
    const std::size_t points = phi.size();
    DiagnosticsReport rep;
    rep.c0_norm = phi.sup_norm();
    std::vector<double> lo(points), hi(points);
    kernels::parallel::eigen_bounds(n, it.h.data, lo, hi);
    rep.equivalence_min = *std::min_element(lo.begin(), lo.end());
    rep.equivalence_max = *std::max_element(hi.begin(), hi.end());
    rep.trace_min = std::numeric_limits<double>::infinity();
    rep.trace_max = -std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < points; ++p) {
        double tr = n;
        for (int j = 0; j < n; ++j) tr += it.h.at(p, j, j).real();
        rep.trace_min = std::min(rep.trace_min, tr);
        rep.trace_max = std::max(rep.trace_max, tr);
    }
    const auto pw = pointwise_diagnostics(phi);
    rep.s_norm_sup = std::sqrt(std::max(0.0, *std::max_element(pw.s_norm_sq.begin(), pw.s_norm_sq.end())));
    rep.lemma52_margin = *std::min_element(pw.margin.begin(), pw.margin.end());
    rep.volume_error = rep.equivalence_min > 0.0 ? volume_error_of(it) : std::numeric_limits<double>::infinity();
    return rep;
}

}  // namespace orbifold
