#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace orbifold {

using LatticePoint = std::vector<long>;

/// Full-dimensional lattice polytope given by its vertices (1 <= dim <= 4).
class LatticePolytope {
  public:
    LatticePolytope() = default;
    /// Every listed point must be a vertex; throws std::invalid_argument otherwise.
    explicit LatticePolytope(std::vector<LatticePoint> vertices);
    /// Convex hull of arbitrary lattice points; non-vertices are dropped, order kept.
    static LatticePolytope from_points(const std::vector<LatticePoint>& points);
    /// "(-1,-1);(2,-1);(-1,2)"
    static LatticePolytope parse(std::string_view text);

    std::size_t dim() const { return dim_; }
    const std::vector<LatticePoint>& vertices() const { return vertices_; }

  private:
    std::size_t dim_ = 0;
    std::vector<LatticePoint> vertices_;
};

/// P = { m : <m, normal> >= -offset }.
struct Facet {
    LatticePoint normal;  ///< primitive, inward
    long offset = 0;
    bool operator==(const Facet&) const = default;
};

/// Sorted lexicographically by normal.
std::vector<Facet> facet_system(const LatticePolytope& p);
bool is_reflexive(const LatticePolytope& p);
/// Throws std::invalid_argument for non-reflexive input.
LatticePolytope polar_dual(const LatticePolytope& p);

std::vector<LatticePoint> lattice_points(const LatticePolytope& p);
std::vector<LatticePoint> interior_lattice_points(const LatticePolytope& p);

/// parts[i] holds vertex indices of E_i.
using NefPartition = std::vector<std::vector<std::size_t>>;

/// "0,1|2,3"
NefPartition parse_partition(std::string_view text);
std::string to_string(const NefPartition& e);

/// Throws std::invalid_argument unless `e` partitions the vertex indices into nonempty parts.
void validate_partition(const LatticePolytope& p, const NefPartition& e);

struct NefCheck {
    bool ok = false;
    std::string reason;
};

/// Each phi_i (1 on the vertices of E_i, 0 on the others) must be integral linear on the cone
/// over every facet and convex across the face fan.  P must be reflexive.
NefCheck nef_partition_check(const LatticePolytope& p, const NefPartition& e);

struct NefDual {
    LatticePolytope polytope;
    NefPartition partition;
    std::vector<std::vector<LatticePoint>> parts;  ///< vertices of each Delta'_i
};

/// Batyrev-Borisov dual.  Throws std::invalid_argument when the check fails and
/// std::logic_error when the result is not reflexive or not a partition.
NefDual dual_nef_partition(const LatticePolytope& p, const NefPartition& e);

std::string to_string(const LatticePoint& v);

}  // namespace orbifold
