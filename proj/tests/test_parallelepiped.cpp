#include <doctest.h>

#include <cmath>
#include <random>

#include "measinf/parallelepiped.hpp"

using namespace measinf;

namespace {

Parallelepiped with_lengths(const TailedSequence& l) {
    return Parallelepiped::from_lengths(TailedSequence::constant(0.0), l);
}

// 2 sum_{j<=J} 2^(-j-1) eps, summed exactly in long double.
long double boundary_oracle(double eps, int J) {
    long double s = 0.0L;
    for (int j = 1; j <= J; ++j) s += 2.0L * std::ldexp(1.0L, -j - 1) * eps;
    return s;
}

} // namespace

TEST_CASE("volume axioms") {
    auto unit = volume(Parallelepiped::unit_cube());
    CHECK(unit.is_finite());
    CHECK(unit.value == 1.0);
    CHECK(unit.err == 0.0);
    auto half = volume(with_lengths(TailedSequence({0.5}, Constant{1.0})));
    CHECK(half.is_finite());
    CHECK(half.value == 0.5);
    CHECK(volume(with_lengths(TailedSequence({}, make_periodic({0.5, 2.0})))).is_undefined());
    CHECK(volume(with_lengths(TailedSequence::constant(2.0))).is_infinite());
}

TEST_CASE("constructor rejects inverted sides") {
    CHECK_THROWS_AS(Parallelepiped(TailedSequence::constant(1.0), TailedSequence::constant(0.0)), Error);
}

TEST_CASE("translate keeps volume") {
    auto cube = Parallelepiped::unit_cube();
    auto t0 = translate(cube, TailedSequence::constant(0.0));
    CHECK(t0.lower()(3) == 0.0);
    CHECK(t0.upper()(3) == 1.0);
    auto t5 = volume(translate(cube, TailedSequence({5.0}, Constant{0.0})));
    CHECK(t5.is_finite());
    CHECK(t5.value == 1.0);
    auto drift = with_lengths(TailedSequence({}, make_geometric_drift(1.0, 0.5)));
    auto a = volume(drift), b = volume(translate(drift, TailedSequence::constant(1.0)));
    REQUIRE(a.is_finite());
    REQUIRE(b.is_finite());
    CHECK(std::abs(a.value - b.value) <= a.err + b.err);
    CHECK(a.value == doctest::Approx(2.384231029).epsilon(1e-9));
}

TEST_CASE("intersect") {
    auto cube = Parallelepiped::unit_cube();
    auto self = intersect(cube, cube);
    REQUIRE(self);
    CHECK(volume(*self).value == 1.0);
    Parallelepiped far(TailedSequence({2.0}, Constant{0.0}), TailedSequence({3.0}, Constant{1.0}));
    CHECK_FALSE(intersect(cube, far));
    auto c0 = Parallelepiped::cube(TailedSequence::constant(0.0), 1.0);
    auto ch = Parallelepiped::cube(TailedSequence::constant(0.5), 1.0);
    auto both = intersect(c0, ch);
    REQUIRE(both);
    CHECK(both->lengths()(17) == 0.5);
    CHECK(volume(*both).is_zero());
    // Partial-product oracle: (1/2)^60 is already far below any positive bound.
    CHECK(truncated_volume(*both, 60) == std::ldexp(1.0, -60));
}

TEST_CASE("truncated_volume") {
    CHECK(truncated_volume(Parallelepiped::unit_cube(), 10) == 1.0);
    CHECK(truncated_volume(with_lengths(TailedSequence({}, make_geometric_drift(1.0, 0.5))), 2) == 1.875);
    CHECK(truncated_volume(with_lengths(TailedSequence({}, make_periodic({0.5, 2.0}))), 3) == 0.5);
}

TEST_CASE("tail_deviation_index") {
    CHECK(tail_deviation_index(Parallelepiped::unit_cube(), 0.1) == 1);
    CHECK(tail_deviation_index(with_lengths(TailedSequence({}, make_geometric_drift(1.0, 0.5))), 0.01) == 7);
    try {
        tail_deviation_index(with_lengths(TailedSequence::constant(0.9)), 0.1);
        FAIL("expected NotFinitePositive");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NotFinitePositive);
    }
}

TEST_CASE("rho_diameter") {
    auto u = rho_diameter(Parallelepiped::unit_cube());
    CHECK(std::abs(u.value - 0.5) <= u.err + 1e-15);
    CHECK(rho_diameter(with_lengths(TailedSequence::constant(0.0))).value == 0.0);
    auto three = rho_diameter(with_lengths(TailedSequence::constant(3.0)));
    CHECK(std::abs(three.value - 0.75) <= three.err + 1e-15);
}

TEST_CASE("cover_upper_bound picks the cheapest valid cover") {
    auto cube = Parallelepiped::unit_cube();
    auto est = cover_upper_bound({cube}, {{cube}});
    CHECK(est.best_bound == 1.0);
    // Two slabs of volume 0.7 overlapping in the first coordinate.
    Parallelepiped s1 = with_lengths(TailedSequence({0.7}, Constant{1.0}));
    Parallelepiped s2(TailedSequence({0.3}, Constant{0.0}), TailedSequence({1.0}, Constant{1.0}));
    est = cover_upper_bound({cube}, {{cube}, {s1, s2}});
    CHECK(est.best_bound == 1.0);
    CHECK(est.best_index == 0);
    CHECK_THROWS_AS(cover_upper_bound({cube}, {{s1}}), Error);
}

TEST_CASE("diameter cap is enforced") {
    auto cube = Parallelepiped::unit_cube();
    try {
        cover_upper_bound({cube}, {{cube}}, 0.25);
        FAIL("expected CapViolated");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::CapViolated);
    }
}

TEST_CASE("boundary cover totals are dyadic") {
    auto one = boundary_cover(1.0, 1);
    CHECK(one.size() == 2);
    double s = 0.0;
    for (const auto& p : one) s += volume(p).value;
    CHECK(s == 0.5);
    for (int J : {1, 5, 20, 40}) {
        auto slabs = boundary_cover(0.5, J);
        double total = 0.0;
        for (const auto& p : slabs) total += volume(p).value;
        CHECK(total == static_cast<double>(boundary_oracle(0.5, J)));
        CHECK(total == 0.5 * (1.0 - std::ldexp(1.0, -J)));
        auto est = cover_upper_bound(unit_cube_faces(J), {slabs});
        CHECK(est.best_bound == total);
    }
    // Each face lies in its slab.
    auto slabs = boundary_cover(0.3, 6);
    auto faces = unit_cube_faces(6);
    REQUIRE(faces.size() == slabs.size());
    for (std::size_t i = 0; i < faces.size(); ++i) CHECK(contains(slabs[i], faces[i]) == Tri::Yes);
}

TEST_CASE("translation invariance on random pairs") {
    std::mt19937_64 g(3);
    std::uniform_real_distribution<double> u(0.2, 1.8), sh(-4.0, 4.0);
    for (int t = 0; t < 200; ++t) {
        auto lengths = TailedSequence({u(g), u(g)}, make_geometric_drift(u(g) - 1.0, 0.5));
        auto box = Parallelepiped::from_lengths(TailedSequence({}, make_geometric_drift(sh(g), 0.5, 0.0)), lengths);
        auto x = TailedSequence({sh(g)}, make_geometric_drift(sh(g), 0.5, sh(g)));
        auto a = volume(box), b = volume(translate(box, x));
        REQUIRE(a.kind == b.kind);
        if (a.is_finite()) CHECK(std::abs(a.value - b.value) <= a.err + b.err);
    }
}

TEST_CASE("monotonicity under containment") {
    auto inner = with_lengths(TailedSequence({0.5}, make_geometric_drift(-0.25, 0.5)));
    auto outer = with_lengths(TailedSequence({0.75}, make_geometric_drift(0.25, 0.5)));
    REQUIRE(contains(outer, inner) == Tri::Yes);
    auto vi = volume(inner), vo = volume(outer);
    CHECK(vi.lower() <= vo.upper());
}
