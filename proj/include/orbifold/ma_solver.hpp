#pragma once

#include "orbifold/spectral.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace orbifold {

/// prescribed_volume: (omega + i ddbar phi)^n = e^{tF + c_t} omega^n.
/// kahler_einstein:   (omega + i ddbar phi)^n = e^{tF + phi} omega^n.
enum class Mode { prescribed_volume, kahler_einstein };

std::string to_string(Mode mode);

/// Raised when Newton or the continuity path cannot proceed.
class SolverError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct SolverConfig {
    std::vector<double> t_schedule{0.0, 0.25, 0.5, 0.75, 1.0};
    double newton_tol = 1e-10;
    int max_newton = 30;
    double min_step = 1.0 / 1024.0;
    double positivity_margin_min = 1e-3;
    double linear_tol = 1e-12;
    int linear_max_iter = 400;
    int gmres_restart = 60;
    bool dealias = true;
    /// Skip GMRES and assemble the dense Jacobian (only for small grids).
    bool force_dense = false;
    /// Dense fallback is allowed below this many real unknowns.
    std::size_t dense_limit = 10000;
    int max_bisections = 10;

    /// Throws std::invalid_argument.
    void validate() const;
};

struct DiagnosticsReport {
    double c0_norm = 0.0;
    double equivalence_min = 1.0, equivalence_max = 1.0;
    double trace_min = 0.0, trace_max = 0.0;
    double s_norm_sup = 0.0;
    double lemma52_margin = 0.0;
    double volume_error = 0.0;
};

struct ResidualRecord {
    double t = 0.0;
    int iteration = 0;
    double residual = 0.0;        ///< resolved residual, the convergence measure
    double grid_residual = 0.0;   ///< sup |r| over all grid points
    double volume_error = 0.0;    ///< |mean(density) - 1| of this iterate
    double positivity_min = 1.0;  ///< smallest eigenvalue of g^{-1}(g + ddbar phi)
};

struct MASolution {
    SpectralField phi;
    SpectralField F;  ///< the (normalized, for prescribed volume) source actually solved
    Mode mode = Mode::prescribed_volume;
    double final_t = 0.0;
    std::vector<ResidualRecord> residual_history;
    std::vector<std::pair<double, double>> c_table;  ///< (t, c_t) at each accepted node
    DiagnosticsReport diagnostics;
    int bisections = 0;
};

/// F + log(vol / integral e^F).
SpectralField normalize_F(const SpectralField& F);
/// c_t = log(vol / integral e^{tF}).
double c_shift(const SpectralField& F, double t);

/// det(g + ddbar phi) / det g pointwise.  Throws SolverError with the minimum
/// eigenvalue when g + ddbar phi is not positive definite somewhere.
SpectralField ma_density(const SpectralField& phi);

/// log density - tF - c_t (prescribed volume) or log density - tF - phi (KE).
SpectralField residual(const SpectralField& phi, const SpectralField& F, double t, Mode mode);

/// Sup norm of the part of the Newton right-hand side the discretization resolves
/// (projection onto the retained modes).  Equals the grid residual to round-off when
/// the solution is band-limited.
double resolved_residual(const SpectralField& phi, const SpectralField& F, double t, Mode mode,
                         bool dealias = true);

struct NewtonResult {
    SpectralField phi;
    double residual = 0.0;       ///< resolved residual after the step
    double grid_residual = 0.0;  ///< sup |r| after the step
    double step = 1.0;           ///< accepted line-search factor
    int linear_iterations = 0;
    bool dense_used = false;
    double volume_error = 0.0;
    double positivity_min = 1.0;
};

/// One damped Newton step.  Throws SolverError when the line search or the inner solve fails.
NewtonResult newton_step(const SpectralField& phi, const SpectralField& F, double t, Mode mode,
                         const SolverConfig& config = {});

/// Continuity method from t = 0 to 1.  F must be invariant.  Prescribed-volume
/// solutions are returned with mean zero.
MASolution solve_continuity(const SpectralField& F, const SolverConfig& config = {},
                            Mode mode = Mode::prescribed_volume,
                            const std::optional<SpectralField>& initial_guess = std::nullopt);
MASolution solve_ke(const SpectralField& F, const SolverConfig& config = {},
                    const std::optional<SpectralField>& initial_guess = std::nullopt);

/// Estimate quantities of an iterate; the Ricci term uses the iterate's own density.
DiagnosticsReport diagnostics(const SpectralField& phi, const SpectralField& F, double t, Mode mode);

/// |S|^2 and the pointwise margin of the Laplacian inequality per grid point (exposed for tests).
struct PointwiseDiagnostics {
    std::vector<double> s_norm_sq;
    std::vector<double> margin;
};
PointwiseDiagnostics pointwise_diagnostics(const SpectralField& phi);

}  // namespace orbifold
