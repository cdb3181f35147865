#pragma once

#include "orbifold/exact.hpp"
#include "orbifold/signatures.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace orbifold {

/// Raised when an orbifold description violates its invariants.
class OrbifoldError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Flat complex torus C^n / Lambda.  Points are z = Pi * u with u in R^2n / Z^2n.
struct PeriodData {
    int complex_dim = 1;
    Eigen::MatrixXcd period_matrix;      ///< n x 2n, columns generate the lattice
    Eigen::MatrixXcd background_metric;  ///< n x n Hermitian positive definite, g_{j kbar}

    PeriodData() = default;
    PeriodData(Eigen::MatrixXcd period_matrix, Eigen::MatrixXcd metric);
    /// Identity metric.
    explicit PeriodData(Eigen::MatrixXcd period_matrix);

    int real_dim() const { return 2 * complex_dim; }
    /// [Re Pi; Im Pi], maps lattice coordinates u to real coordinates (x, y).
    Eigen::MatrixXd real_periods() const;
    /// Riemannian volume of the covering torus: |det real_periods| * det g.
    double torus_volume() const;
    void validate() const;
};

/// Holomorphic isometry u -> M u + t of the torus.
struct GroupElement {
    Eigen::MatrixXi linear;             ///< 2n x 2n, |det| = 1
    std::vector<Rational> translation;  ///< 2n entries in [0, 1)
    Eigen::MatrixXcd holomorphic;       ///< n x n, Pi * M = A * Pi

    int real_dim() const { return static_cast<int>(linear.rows()); }
    bool is_identity() const;
    /// (*this) o inner : u -> M (M' u + t') + t.
    GroupElement compose(const GroupElement& inner) const;
    bool same_map(const GroupElement& other) const;
};

/// Validates M and t against the periods and derives the holomorphic part.
/// Throws OrbifoldError for non-unimodular, non-holomorphic or non-isometric actions.
GroupElement make_group_element(const PeriodData& periods, const Eigen::MatrixXi& linear,
                                std::vector<Rational> translation = {});

class QuotientTorusOrbifold {
  public:
    QuotientTorusOrbifold(PeriodData periods, std::vector<GroupElement> elements, std::string name = {});

    const PeriodData& periods() const { return periods_; }
    /// Closed under composition; element 0 is the identity.
    const std::vector<GroupElement>& group() const { return group_; }
    std::size_t order() const { return group_.size(); }
    int complex_dim() const { return periods_.complex_dim; }
    int real_dim() const { return periods_.real_dim(); }
    double torus_volume() const { return periods_.torus_volume(); }
    /// Orbifold volume (1/|G|) Vol(T).
    double volume() const { return torus_volume() / static_cast<double>(order()); }
    const std::string& name() const { return name_; }
    /// Distinct per constructed instance; used to key spectral caches.
    std::uint64_t id() const { return id_; }

  private:
    PeriodData periods_;
    std::vector<GroupElement> group_;
    std::string name_;
    std::uint64_t id_;
};

using OrbifoldPtr = std::shared_ptr<const QuotientTorusOrbifold>;

/// Group closure of the generators (identity always included).
OrbifoldPtr build_orbifold(PeriodData periods, const std::vector<GroupElement>& generators,
                           std::size_t max_order = 1024, std::string name = {});

using Resolution = std::vector<int>;

/// Samples of a real function on the regular grid u = k / N of the covering torus.
class SpectralField {
  public:
    SpectralField() = default;
    SpectralField(OrbifoldPtr orbifold, Resolution resolution);
    SpectralField(OrbifoldPtr orbifold, Resolution resolution, std::vector<double> samples,
                  bool invariant = false);

    static SpectralField constant(OrbifoldPtr orbifold, Resolution resolution, double value);
    /// Evaluates f at every grid point u (lattice coordinates in [0,1)).
    static SpectralField from_function(OrbifoldPtr orbifold, Resolution resolution,
                                       const std::function<double(std::span<const double>)>& f);

    const OrbifoldPtr& orbifold() const { return orbifold_; }
    const Resolution& resolution() const { return resolution_; }
    std::size_t size() const { return samples_.size(); }
    const std::vector<double>& samples() const { return samples_; }
    std::vector<double>& samples() { return samples_; }
    double operator[](std::size_t i) const { return samples_[i]; }
    double& operator[](std::size_t i) { return samples_[i]; }

    bool invariant_flag() const { return invariant_; }
    void set_invariant_flag(bool flag) { invariant_ = flag; }

    /// Lattice coordinates of grid point i (row-major, last axis fastest).
    std::vector<double> point(std::size_t i) const;
    double mean() const;
    double sup_norm() const;
    bool same_grid(const SpectralField& other) const;

    SpectralField& operator+=(const SpectralField& other);
    SpectralField& operator-=(const SpectralField& other);
    SpectralField& operator*=(double s);
    SpectralField& operator+=(double c);

  private:
    OrbifoldPtr orbifold_;
    Resolution resolution_;
    std::vector<double> samples_;
    bool invariant_ = false;
};

SpectralField operator+(SpectralField a, const SpectralField& b);
SpectralField operator-(SpectralField a, const SpectralField& b);
SpectralField operator*(double s, SpectralField a);
/// Pointwise product.
SpectralField pointwise_product(const SpectralField& a, const SpectralField& b);
SpectralField pointwise_map(const SpectralField& a, const std::function<double(double)>& f);
double max_abs_difference(const SpectralField& a, const SpectralField& b);

std::size_t grid_size(const Resolution& resolution);
/// True when u -> M u + t permutes the grid of this resolution.
bool preserves_grid(const GroupElement& g, const Resolution& resolution);
/// perm[i] = grid index of g(u_i).  Throws OrbifoldError when the grid is not preserved.
std::vector<std::size_t> grid_permutation(const GroupElement& g, const Resolution& resolution);
/// Throws OrbifoldError unless every group element preserves the grid and the resolution is even.
void check_resolution(const QuotientTorusOrbifold& orb, const Resolution& resolution);

/// Pullback f o g, an exact grid permutation.
SpectralField act(const GroupElement& g, const SpectralField& f);
/// (1/|G|) sum_g f o g; the result carries the invariant flag.
SpectralField project_invariant(const SpectralField& f);
/// max over g of |f o g - f|.
double invariance_defect(const SpectralField& f);
/// Orbifold integral (1/|G|) Vol(T) mean(f).
double integrate(const SpectralField& f);

/// Stabilizer signature of a one-dimensional quotient, via exact fixed points and Riemann-Hurwitz.
OrbifoldSignature fixed_point_data(const QuotientTorusOrbifold& orb);

/// Named presets: torus_square, pillowcase, P1_442, P1_632, P1_333, T4, T4_Z2.
OrbifoldPtr preset_orbifold(const std::string& name);
std::vector<std::string> preset_names();

}  // namespace orbifold
