#pragma once

#include "orbifold/exact.hpp"

#include <vector>

namespace orbifold {

using IntMatrix = std::vector<std::vector<Integer>>;

IntMatrix identity_matrix(std::size_t n);
IntMatrix multiply(const IntMatrix& a, const IntMatrix& b);
IntMatrix transpose(const IntMatrix& a);
/// Exact determinant (Bareiss).  Square input only.
Integer determinant(const IntMatrix& a);

/// U A V = D with U, V unimodular and D diagonal, d_1 | d_2 | ... , d_i >= 0.
struct SmithDecomposition {
    IntMatrix u, v, d;
    std::vector<Integer> diagonal;  ///< first min(m, n) entries of D
    std::size_t rank = 0;
};

SmithDecomposition smith_normal_form(const IntMatrix& a);

}  // namespace orbifold
