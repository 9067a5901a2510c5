#include <catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "support.hpp"

using namespace tconn;
using tsup::Rng;

namespace {
GaussianRational gr(long long n, long long d = 1) {
    return GaussianRational::from_ratio(n, d);
}
GaussianRational gri(long long rn, long long rd, long long in, long long id) {
    return GaussianRational(BigRat(rn, rd), BigRat(in, id));
}
}  // namespace

TEST_CASE("exact arithmetic basics") {
    // (1+i)(1-i) = 2
    GaussianRational a = gri(1, 1, 1, 1), b = gri(1, 1, -1, 1);
    CHECK(a * b == gr(2));
    // additive identity
    CHECK(a + GaussianRational::zero() == a);
    // multiplicative inverse
    CHECK(gr(3, 2) * gr(2, 3) == gr(1));
    CHECK_THROWS_AS(a / GaussianRational::zero(), DivByZero);
}

TEST_CASE("exact field axioms on random values") {
    Rng rng(20260809);
    for (int k = 0; k < 200; ++k) {
        auto a = tsup::random_scalar<GaussianRational>(rng);
        auto b = tsup::random_scalar<GaussianRational>(rng);
        auto c = tsup::random_scalar<GaussianRational>(rng);
        CHECK((a * b) * c == a * (b * c));
        CHECK(a * (b + c) == a * b + a * c);
        if (!b.is_zero()) CHECK((a / b) * b == a);
    }
}

TEST_CASE("approximate field arithmetic and tolerance equality") {
    ApproxComplex a(1.0, 1.0), b(1.0, -1.0);
    CHECK(a * b == ApproxComplex(2.0, 0.0));
    CHECK(ApproxComplex(1.0, 0.0) == ApproxComplex(1.0 + 1e-12, 0.0));
    CHECK(ApproxComplex(1.0, 0.0) != ApproxComplex(1.1, 0.0));
    CHECK_THROWS_AS(a / ApproxComplex::zero(), DivByZero);
}

TEST_CASE("canonical square roots") {
    CHECK(sqrt_unit(gr(4)) == gr(2));
    CHECK(sqrt_unit(gr(-4)) == GaussianRational(BigRat(0), BigRat(2)));  // 2i
    CHECK_THROWS_AS(sqrt_unit(gr(2)), NotASquareInField);
    // 2i = (1+i)^2
    CHECK(sqrt_unit(gri(0, 1, 2, 1)) == gri(1, 1, 1, 1));
    // rational components: (3/2 + 2i)^2 = 9/4 - 4 + 6i
    GaussianRational s = gri(3, 2, 2, 1);
    CHECK(sqrt_unit(s * s) == s);
    // canonical branch: sqrt of (-3/2 - 2i)^2 is still +3/2 + 2i
    GaussianRational t = -s;
    CHECK(sqrt_unit(t * t) == s);

    auto f = sqrt_unit(ApproxComplex(-4.0, 0.0));
    CHECK(std::abs(f.to_complex() - std::complex<double>(0, 2)) < 1e-12);
}

TEST_CASE("exact n-th roots") {
    CHECK(nth_root_unit(gr(8), 3) == gr(2));
    CHECK(nth_root_unit(gr(-8), 3) == gr(-2));
    CHECK(nth_root_unit(gr(16), 4) == gr(2));
    CHECK(nth_root_unit(gr(1), 12) == gr(1));
    CHECK(nth_root_unit(gr(1, 27), 3) == gr(1, 3));
    CHECK_THROWS_AS(nth_root_unit(gr(2), 4), RootNotInField);
    CHECK_THROWS_AS(nth_root_unit(gr(3), 3), RootNotInField);
    // -4 = (1+i)^4: canonical fourth root is 1+i
    CHECK(nth_root_unit(gr(-4), 4) == gri(1, 1, 1, 1));
    // Gaussian cube: (1/2 + i/3)^3
    GaussianRational w = gri(1, 2, 1, 3);
    CHECK(nth_root_unit(w * w * w, 3) == w);
    // i has order 4, no cube root lies in Q(i)... except i^3 = -i, so the
    // cube root of -i is i
    CHECK(nth_root_unit(-GaussianRational::i(), 3) == GaussianRational::i());
    CHECK_THROWS_AS(nth_root_unit(GaussianRational::i(), 8), RootNotInField);
}

TEST_CASE("root-of-unity power comparison") {
    using G = GaussianRational;
    CHECK(equals_primitive_root_power(G::one(), 5, 0));
    CHECK(equals_primitive_root_power(G::i(), 8, 2));
    CHECK_FALSE(equals_primitive_root_power(-G::one(), 5, 1));
    CHECK(equals_primitive_root_power(-G::one(), 8, 4));
    CHECK(equals_primitive_root_power(-G::i(), 4, 3));
    CHECK_FALSE(equals_primitive_root_power(G::one(), 3, 1));
    CHECK_FALSE(equals_primitive_root_power(gr(2), 4, 0));
}

TEST_CASE("root-of-unity comparison agrees with numerics") {
    using G = GaussianRational;
    const G candidates[] = {G::one(), -G::one(), G::i(), -G::i()};
    for (int r = 1; r <= 12; ++r)
        for (int m = 0; m < r; ++m)
            for (const G& u : candidates) {
                bool exact = equals_primitive_root_power(u, r, m);
                auto target = std::polar(1.0, 2 * M_PI * double(m) / double(r));
                bool numeric = std::abs(u.to_complex() - target) < 1e-12;
                INFO("r=" << r << " m=" << m << " u=" << u.str());
                CHECK(exact == numeric);
            }
}

TEST_CASE("approximate root-of-unity comparison") {
    auto z5 = std::polar(1.0, 2 * M_PI / 5);
    CHECK(equals_primitive_root_power(ApproxComplex(z5.real(), z5.imag()), 5, 1));
    CHECK_FALSE(equals_primitive_root_power(ApproxComplex(z5.real(), z5.imag()), 5, 2));
}

TEST_CASE("sqrt canonical branch is deterministic") {
    Rng rng(7);
    for (int k = 0; k < 50; ++k) {
        auto v = tsup::random_nonzero_scalar<GaussianRational>(rng);
        GaussianRational sq = v * v;
        GaussianRational s = sqrt_unit(sq);
        CHECK(s * s == sq);
        CHECK((s.re() > 0 || (s.re() == 0 && s.im() > 0)));
        CHECK(sqrt_unit(sq) == s);
    }
}
