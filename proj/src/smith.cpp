#include "orbifold/smith.hpp"

#include <stdexcept>
#include <utility>

namespace orbifold {

IntMatrix identity_matrix(std::size_t n)
{
    IntMatrix m(n, std::vector<Integer>(n, 0));
    for (std::size_t i = 0; i < n; ++i) m[i][i] = 1;
    return m;
}

IntMatrix multiply(const IntMatrix& a, const IntMatrix& b)
{
    const std::size_t m = a.size(), k = b.size(), n = b.empty() ? 0 : b[0].size();
    IntMatrix c(m, std::vector<Integer>(n, 0));
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t l = 0; l < k; ++l)
            if (a[i][l] != 0)
                for (std::size_t j = 0; j < n; ++j) c[i][j] += a[i][l] * b[l][j];
    return c;
}

IntMatrix transpose(const IntMatrix& a)
{
    if (a.empty()) return {};
    IntMatrix t(a[0].size(), std::vector<Integer>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a[0].size(); ++j) t[j][i] = a[i][j];
    return t;
}

Integer determinant(const IntMatrix& a_in)
{
    const std::size_t n = a_in.size();
    for (const auto& row : a_in)
        if (row.size() != n) throw std::invalid_argument("determinant of a non-square matrix");
    if (n == 0) return 1;
    IntMatrix a = a_in;
    Integer sign = 1, prev = 1;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (a[k][k] == 0) {
            std::size_t p = k + 1;
            while (p < n && a[p][k] == 0) ++p;
            if (p == n) return 0;
            std::swap(a[k], a[p]);
            sign = -sign;
        }
        for (std::size_t i = k + 1; i < n; ++i)
            for (std::size_t j = k + 1; j < n; ++j) {
                a[i][j] = a[i][j] * a[k][k] - a[i][k] * a[k][j];
                mpz_divexact(a[i][j].get_mpz_t(), a[i][j].get_mpz_t(), prev.get_mpz_t());
            }
        prev = a[k][k];
    }
    return sign * a[n - 1][n - 1];
}

namespace {

void swap_rows(IntMatrix& m, std::size_t i, std::size_t j) { std::swap(m[i], m[j]); }

void swap_cols(IntMatrix& m, std::size_t i, std::size_t j)
{
    for (auto& row : m) std::swap(row[i], row[j]);
}

// row_i += q row_j
void add_row(IntMatrix& m, std::size_t i, std::size_t j, const Integer& q)
{
    for (std::size_t c = 0; c < m[i].size(); ++c) m[i][c] += q * m[j][c];
}

// col_i += q col_j
void add_col(IntMatrix& m, std::size_t i, std::size_t j, const Integer& q)
{
    for (auto& row : m) row[i] += q * row[j];
}

}  // namespace

SmithDecomposition smith_normal_form(const IntMatrix& a)
{
    const std::size_t m = a.size();
    const std::size_t n = m == 0 ? 0 : a[0].size();
    for (const auto& row : a)
        if (row.size() != n) throw std::invalid_argument("ragged integer matrix");
    SmithDecomposition out;
    out.d = a;
    out.u = identity_matrix(m);
    out.v = identity_matrix(n);
    auto& d = out.d;

    const std::size_t steps = std::min(m, n);
    for (std::size_t t = 0; t < steps; ++t) {
        // pivot: smallest nonzero magnitude in the trailing block
        bool found = false;
        std::size_t pi = t, pj = t;
        for (std::size_t i = t; i < m; ++i)
            for (std::size_t j = t; j < n; ++j)
                if (d[i][j] != 0 && (!found || abs(d[i][j]) < abs(d[pi][pj]))) {
                    found = true;
                    pi = i;
                    pj = j;
                }
        if (!found) break;
        swap_rows(d, t, pi);
        swap_rows(out.u, t, pi);
        swap_cols(d, t, pj);
        swap_cols(out.v, t, pj);

        while (true) {
            bool clean = true;
            for (std::size_t i = t + 1; i < m; ++i) {
                if (d[i][t] == 0) continue;
                Integer q;
                mpz_fdiv_q(q.get_mpz_t(), d[i][t].get_mpz_t(), d[t][t].get_mpz_t());
                add_row(d, i, t, -q);
                add_row(out.u, i, t, -q);
                if (d[i][t] != 0) {
                    clean = false;
                    swap_rows(d, t, i);
                    swap_rows(out.u, t, i);
                }
            }
            for (std::size_t j = t + 1; j < n; ++j) {
                if (d[t][j] == 0) continue;
                Integer q;
                mpz_fdiv_q(q.get_mpz_t(), d[t][j].get_mpz_t(), d[t][t].get_mpz_t());
                add_col(d, j, t, -q);
                add_col(out.v, j, t, -q);
                if (d[t][j] != 0) {
                    clean = false;
                    swap_cols(d, t, j);
                    swap_cols(out.v, t, j);
                }
            }
            if (!clean) continue;
            // divisibility: pull a non-multiple into row t and repeat
            bool divides = true;
            for (std::size_t i = t + 1; i < m && divides; ++i)
                for (std::size_t j = t + 1; j < n; ++j)
                    if (!mpz_divisible_p(d[i][j].get_mpz_t(), d[t][t].get_mpz_t())) {
                        add_row(d, t, i, 1);
                        add_row(out.u, t, i, 1);
                        divides = false;
                        break;
                    }
            if (divides) break;
        }
        if (d[t][t] < 0) {
            for (auto& x : d[t]) x = -x;
            for (auto& x : out.u[t]) x = -x;
        }
    }
    for (std::size_t t = 0; t < steps; ++t) {
        out.diagonal.push_back(d[t][t]);
        if (d[t][t] != 0) ++out.rank;
    }
    return out;
}

}  // namespace orbifold
