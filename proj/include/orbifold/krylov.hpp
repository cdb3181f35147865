#pragma once

#include <functional>
#include <vector>

namespace orbifold {

using Vec = std::vector<double>;
using LinearOp = std::function<void(const Vec& in, Vec& out)>;
using InnerProduct = std::function<double(const Vec&, const Vec&)>;

struct GmresResult {
    bool converged = false;
    int iterations = 0;
    double relative_residual = 0.0;
};

/// Restarted GMRES with right preconditioning: solves A x = b, x = M^{-1} y.
/// Stops when ||b - A x|| <= max(tol ||b||, abs_tol) in the given inner product.
GmresResult gmres(const LinearOp& a, const LinearOp& precond, const InnerProduct& dot, const Vec& b, Vec& x,
                  double tol, int restart, int max_iter, double abs_tol = 0.0);

}  // namespace orbifold
