#pragma once

#include "orbifold/exact.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace orbifold {

/// Positive integer weights with gcd 1.
struct WeightSystem {
    std::vector<long> weights;

    WeightSystem() = default;
    explicit WeightSystem(std::vector<long> q);  ///< throws std::invalid_argument
    std::size_t size() const { return weights.size(); }
};

/// Rows are monomials, columns variables.
struct ExponentMatrix {
    std::vector<std::vector<long>> rows;
    std::vector<std::string> variables;

    ExponentMatrix() = default;
    /// Validates entries >= 0, rectangular, no zero column.  Variables default to x0, x1, ...
    explicit ExponentMatrix(std::vector<std::vector<long>> a, std::vector<std::string> vars = {});

    std::size_t monomials() const { return rows.size(); }
    std::size_t num_variables() const { return rows.empty() ? 0 : rows[0].size(); }
    bool is_square() const { return monomials() == num_variables(); }
    bool operator==(const ExponentMatrix& o) const { return rows == o.rows; }
};

/// "x^2*y, y^3 + x*z^2".  Monomials split on ',' or '+', factors on '*' or spaces;
/// integer coefficients are ignored.  Variables are ordered by first appearance unless
/// `variables` is given.
ExponentMatrix parse_monomials(std::string_view text, const std::vector<std::string>& variables = {});

using PhaseVector = std::vector<Rational>;

/// Entries reduced into [0, 1).
PhaseVector reduce_phases(PhaseVector v);
std::string to_string(const PhaseVector& v);

struct QuasiHomogeneity {
    std::optional<std::vector<Rational>> weights;
    bool is_calabi_yau_type = false;  ///< sum c_i = 1
    std::string reason;               ///< why weights is empty
};

/// Solves A c = (1,...,1) exactly.  Requires a unique, positive solution.
QuasiHomogeneity quasihomogeneous_weights(const ExponentMatrix& a);

bool cy_complete_intersection(const WeightSystem& q, const std::vector<long>& degrees);
long divisor_class_degree(const std::vector<long>& a, const WeightSystem& q);
long canonical_class_degree(const WeightSystem& q);

/// A theta == 0 mod 1 for every row.
bool fixes_monomials(const ExponentMatrix& a, const PhaseVector& theta);

struct DiagonalGroup {
    std::vector<PhaseVector> generators;
    Integer order = 1;
    bool contains_J = false;
    std::optional<PhaseVector> J;
    Integer j_order = 1;         ///< order of J when present
    Integer quotient_order = 1;  ///< order / j_order
};

/// Solutions of A theta == 0 mod 1 via Smith normal form.  Throws std::invalid_argument
/// when the group is infinite (rank-deficient A).
DiagonalGroup diagonal_symmetry_group(const ExponentMatrix& a);

/// All elements of the group generated by `generators`.  Throws std::length_error past `cap`.
std::vector<PhaseVector> enumerate_group(const std::vector<PhaseVector>& generators, std::size_t dimension,
                                         std::size_t cap = 10000);

/// Order of a phase vector in Q/Z^n.
Integer phase_order(const PhaseVector& v);

struct TransposeResult {
    ExponentMatrix matrix;
    QuasiHomogeneity weights;
};

/// Throws std::invalid_argument for non-square A.
TransposeResult bhk_transpose(const ExponentMatrix& a);

/// Coordinates are ZERO (nullopt) or a phase in Q/Z.
struct PhasePoint {
    std::vector<std::optional<Rational>> coords;

    PhasePoint() = default;
    explicit PhasePoint(std::vector<std::optional<Rational>> c);  ///< throws if all ZERO
    /// "0,1/4,-": '-' marks a zero coordinate.
    static PhasePoint parse(std::string_view text);
    std::string str() const;
};

/// Number of k in [0, gen_order) with generator^k fixing p up to weighted rescaling.
long stabilizer_order(const PhaseVector& generator, long gen_order, const WeightSystem& q, const PhasePoint& p);
/// Same over the full group generated by `generators`.
long stabilizer_order(const std::vector<PhaseVector>& generators, const WeightSystem& q, const PhasePoint& p,
                      std::size_t cap = 10000);
/// Whether gamma acts on p as a weighted rescaling.
bool stabilizes(const PhaseVector& gamma, const WeightSystem& q, const PhasePoint& p);

}  // namespace orbifold
