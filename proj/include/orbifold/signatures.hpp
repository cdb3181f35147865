#pragma once

#include "orbifold/exact.hpp"

#include <memory>
#include <string>
#include <vector>

namespace orbifold {

class QuotientTorusOrbifold;

/// Genus of the underlying Riemann surface plus the stabilizer orders of the
/// stacky points, kept sorted descending.
struct OrbifoldSignature {
    int genus = 0;
    std::vector<int> orders;

    OrbifoldSignature() = default;
    /// Sorts the orders descending and validates genus >= 0, every order >= 2.
    OrbifoldSignature(int genus, std::vector<int> orders);

    bool operator==(const OrbifoldSignature&) const = default;
    std::string str() const;  ///< "(0; 4,4,2)"
};

/// 2g - 2 + n - sum 1/m_i, exactly.
Rational canonical_degree(const OrbifoldSignature& sig);

/// Every signature of genus g with at least one stacky point and zero canonical degree.
std::vector<OrbifoldSignature> enumerate_flat(int genus);

/// Torus quotient realizing one of the four flat genus-0 signatures.
std::shared_ptr<const QuotientTorusOrbifold> realize(const OrbifoldSignature& sig);

struct ChernStatus {
    bool real_c1_zero = false;
    bool integral_c1_zero = false;
    long torsion_order = 1;  ///< lcm of the stabilizer orders
};

ChernStatus chern_status(const OrbifoldSignature& sig);

}  // namespace orbifold
