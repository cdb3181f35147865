#include <doctest.h>

#include "orbifold/quotient_orbifold.hpp"
#include "orbifold/signatures.hpp"

#include <algorithm>
#include <functional>
#include <random>

using namespace orbifold;

TEST_CASE("canonical degree")
{
    CHECK(canonical_degree(OrbifoldSignature(0, {3, 3, 3})) == 0);
    CHECK(canonical_degree(OrbifoldSignature(1, {})) == 0);
    // 0 - 2 + 1 - 1/2
    CHECK(canonical_degree(OrbifoldSignature(0, {2})) == Rational(-3, 2));
    CHECK(canonical_degree(OrbifoldSignature(2, {5, 3})) == Rational(2 + 2 - Rational(8, 15)));
}

TEST_CASE("signature invariants")
{
    OrbifoldSignature s(0, {2, 6, 3});
    CHECK(s.orders == std::vector<int>{6, 3, 2});
    CHECK(s.str() == "(0; 6,3,2)");
    CHECK_THROWS(OrbifoldSignature(0, {1, 2}));
    CHECK_THROWS(OrbifoldSignature(-1, {2}));
}

TEST_CASE("flat signatures")
{
    auto flat = enumerate_flat(0);
    REQUIRE(flat.size() == 4);
    std::vector<OrbifoldSignature> expect{OrbifoldSignature(0, {2, 2, 2, 2}), OrbifoldSignature(0, {6, 3, 2}),
                                          OrbifoldSignature(0, {4, 4, 2}), OrbifoldSignature(0, {3, 3, 3})};
    for (const auto& e : expect) CHECK(std::find(flat.begin(), flat.end(), e) != flat.end());
    for (int g = 1; g <= 5; ++g) CHECK(enumerate_flat(g).empty());
    CHECK_THROWS(enumerate_flat(-1));

    // brute force over orders <= 12 and n <= 5
    int count = 0;
    std::vector<int> m;
    std::function<void(int)> rec = [&](int lo) {
        if (!m.empty() && canonical_degree(OrbifoldSignature(0, m)) == 0) ++count;
        if (m.size() == 5) return;
        for (int x = lo; x <= 12; ++x) {
            m.push_back(x);
            rec(x);
            m.pop_back();
        }
    };
    rec(2);
    CHECK(count == 4);
}

TEST_CASE("realizations round-trip")
{
    for (const auto& sig : enumerate_flat(0)) {
        auto orb = realize(sig);
        CHECK(canonical_degree(sig) == 0);
        CHECK(fixed_point_data(*orb) == sig);
        CHECK(orb->torus_volume() == doctest::Approx(1.0).epsilon(1e-14));
    }
    CHECK(realize(OrbifoldSignature(0, {2, 2, 2, 2}))->order() == 2);
    CHECK(realize(OrbifoldSignature(0, {4, 4, 2}))->order() == 4);
    CHECK(realize(OrbifoldSignature(0, {6, 3, 2}))->order() == 6);
    CHECK(realize(OrbifoldSignature(0, {3, 3, 3}))->order() == 3);
    CHECK_THROWS(realize(OrbifoldSignature(0, {2, 3, 7})));
}

TEST_CASE("chern status")
{
    auto a = chern_status(OrbifoldSignature(0, {2, 2, 2, 2}));
    CHECK(a.real_c1_zero);
    CHECK_FALSE(a.integral_c1_zero);
    CHECK(a.torsion_order == 2);
    auto b = chern_status(OrbifoldSignature(0, {6, 3, 2}));
    CHECK(b.real_c1_zero);
    CHECK_FALSE(b.integral_c1_zero);
    CHECK(b.torsion_order == 6);
    auto c = chern_status(OrbifoldSignature(0, {2}));
    CHECK_FALSE(c.real_c1_zero);
    CHECK_FALSE(c.integral_c1_zero);
    CHECK(c.torsion_order == 2);
}

TEST_CASE("degree splits into the coarse degree plus point contributions")
{
    std::mt19937_64 rng(9);
    std::uniform_int_distribution<int> g(0, 4), n(0, 6), m(2, 20);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<int> orders(n(rng));
        for (auto& x : orders) x = m(rng);
        OrbifoldSignature s(g(rng), orders);
        Rational rhs = 2 * s.genus - 2;
        for (int x : s.orders) rhs += Rational(x - 1, x);
        CHECK(canonical_degree(s) == rhs);
    }
}
