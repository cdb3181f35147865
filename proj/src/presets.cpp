#include "orbifold/quotient_orbifold.hpp"

#include <cmath>
#include <numbers>

namespace orbifold {

namespace {

using cd = std::complex<double>;

PeriodData square_torus()
{
    Eigen::MatrixXcd pi(1, 2);
    pi << cd(1, 0), cd(0, 1);
    return PeriodData(pi);
}

/// Lattice Z + Z tau with tau = e^{i pi/3}, scaled to unit covolume.
PeriodData hexagonal_torus()
{
    const double scale = std::sqrt(2.0 / std::sqrt(3.0));
    const cd tau = std::polar(1.0, std::numbers::pi / 3.0);
    Eigen::MatrixXcd pi(1, 2);
    pi << scale, scale * tau;
    return PeriodData(pi);
}

PeriodData square_four_torus()
{
    Eigen::MatrixXcd pi = Eigen::MatrixXcd::Zero(2, 4);
    pi(0, 0) = 1.0;
    pi(0, 1) = cd(0, 1);
    pi(1, 2) = 1.0;
    pi(1, 3) = cd(0, 1);
    return PeriodData(pi);
}

Eigen::MatrixXi mat2(int a, int b, int c, int d)
{
    Eigen::MatrixXi m(2, 2);
    m << a, b, c, d;
    return m;
}

}  // namespace

std::vector<std::string> preset_names()
{
    return {"torus_square", "pillowcase", "P1_442", "P1_632", "P1_333", "T4", "T4_Z2"};
}

OrbifoldPtr preset_orbifold(const std::string& name)
{
    if (name == "torus_square") return build_orbifold(square_torus(), {}, 1024, name);
    if (name == "pillowcase") {
        auto p = square_torus();
        return build_orbifold(p, {make_group_element(p, -Eigen::MatrixXi::Identity(2, 2))}, 1024, name);
    }
    if (name == "P1_442") {
        // multiplication by i: u1 + i u2 -> -u2 + i u1
        auto p = square_torus();
        return build_orbifold(p, {make_group_element(p, mat2(0, -1, 1, 0))}, 1024, name);
    }
    if (name == "P1_632") {
        // multiplication by tau, using tau^2 = tau - 1
        auto p = hexagonal_torus();
        return build_orbifold(p, {make_group_element(p, mat2(0, -1, 1, 1))}, 1024, name);
    }
    if (name == "P1_333") {
        // multiplication by tau^2 = e^{2 pi i/3}
        auto p = hexagonal_torus();
        return build_orbifold(p, {make_group_element(p, mat2(-1, -1, 1, 0))}, 1024, name);
    }
    if (name == "T4") return build_orbifold(square_four_torus(), {}, 1024, name);
    if (name == "T4_Z2") {
        auto p = square_four_torus();
        return build_orbifold(p, {make_group_element(p, -Eigen::MatrixXi::Identity(4, 4))}, 1024, name);
    }
    throw OrbifoldError("unknown orbifold preset '" + name + "'");
}

}  // namespace orbifold
