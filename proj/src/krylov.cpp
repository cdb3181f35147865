#include "orbifold/krylov.hpp"

#include <algorithm>
#include <cmath>

namespace orbifold {

GmresResult gmres(const LinearOp& a, const LinearOp& precond, const InnerProduct& dot, const Vec& b, Vec& x,
                  double tol, int restart, int max_iter, double abs_tol)
{
    const std::size_t m = b.size();
    GmresResult result;
    if (x.size() != m) x.assign(m, 0.0);
    const double b_norm = std::sqrt(dot(b, b));
    if (b_norm <= abs_tol) {
        x.assign(m, 0.0);
        result.converged = true;
        return result;
    }

    const double target = std::max(tol * b_norm, abs_tol);
    Vec r(m), w(m), z(m);
    auto residual = [&]() {
        a(x, w);
        for (std::size_t i = 0; i < m; ++i) r[i] = b[i] - w[i];
        return std::sqrt(dot(r, r));
    };

    double beta = residual();
    result.relative_residual = beta / b_norm;
    while (result.iterations < max_iter) {
        if (beta <= target) {
            result.converged = true;
            return result;
        }
        std::vector<Vec> v(1, r);
        for (double& e : v[0]) e /= beta;
        std::vector<Vec> h;  // column j holds H(0..j+1, j)
        std::vector<double> cs, sn, g{beta};
        int k = 0;
        for (; k < restart && result.iterations < max_iter; ++k) {
            ++result.iterations;
            precond(v[k], z);
            a(z, w);
            Vec col(k + 2, 0.0);
            // modified Gram-Schmidt, done twice for stability
            for (int pass = 0; pass < 2; ++pass)
                for (int i = 0; i <= k; ++i) {
                    const double hij = dot(w, v[i]);
                    col[i] += hij;
                    for (std::size_t q = 0; q < m; ++q) w[q] -= hij * v[i][q];
                }
            col[k + 1] = std::sqrt(dot(w, w));
            for (int i = 0; i < k; ++i) {
                const double t = cs[i] * col[i] + sn[i] * col[i + 1];
                col[i + 1] = -sn[i] * col[i] + cs[i] * col[i + 1];
                col[i] = t;
            }
            const double denom = std::hypot(col[k], col[k + 1]);
            const double c = denom == 0.0 ? 1.0 : col[k] / denom;
            const double s = denom == 0.0 ? 0.0 : col[k + 1] / denom;
            const double hk1 = col[k + 1];
            col[k] = denom;
            col[k + 1] = 0.0;
            cs.push_back(c);
            sn.push_back(s);
            g.push_back(-s * g[k]);
            g[k] *= c;
            h.push_back(std::move(col));
            if (hk1 != 0.0) {
                v.push_back(w);
                for (double& e : v.back()) e /= hk1;
            }
            if (std::abs(g[k + 1]) <= target || hk1 == 0.0) {
                ++k;
                break;
            }
        }
        // back substitution for y, then x += M^{-1} V y
        std::vector<double> y(k, 0.0);
        for (int i = k - 1; i >= 0; --i) {
            double s = g[i];
            for (int j = i + 1; j < k; ++j) s -= h[j][i] * y[j];
            y[i] = s / h[i][i];
        }
        Vec update(m, 0.0);
        for (int j = 0; j < k; ++j)
            for (std::size_t q = 0; q < m; ++q) update[q] += y[j] * v[j][q];
        precond(update, z);
        for (std::size_t q = 0; q < m; ++q) x[q] += z[q];
        beta = residual();
        result.relative_residual = beta / b_norm;
    }
    result.converged = beta <= target;
    return result;
}

}  // namespace orbifold
