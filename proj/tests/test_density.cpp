#include <doctest.h>

#include <cmath>

#include "measinf/density.hpp"
#include "oracles.hpp"

using namespace measinf;
using oracle::brute_mass;

namespace {

Parallelepiped with_lengths(const TailedSequence& l) {
    return Parallelepiped::from_lengths(TailedSequence::constant(0.0), l);
}

Parallelepiped origin_cube() { return Parallelepiped::cube(TailedSequence::constant(0.0), 1.0); }

} // namespace

TEST_CASE("core truncated volume") {
    auto cube = make_core_spec(Parallelepiped::unit_cube(), 0.5);
    CHECK(core_truncated_volume(cube, 0, 20) == std::ldexp(1.0, -20));
    auto full = make_core_spec(with_lengths(TailedSequence({}, make_geometric_drift(1.0, 0.5))), 1.0);
    CHECK(core_truncated_volume(full, 3, 12) == truncated_volume(full.base, 12));
    auto drift = make_core_spec(with_lengths(TailedSequence({}, make_geometric_drift(1.0, 0.5))), 0.5);
    long double oracle = std::ldexp(1.0L, -20);
    for (int i = 1; i <= 24; ++i) oracle *= 1.0L + std::ldexp(1.0L, -i);
    CHECK(core_truncated_volume(drift, 4, 24) <= static_cast<double>(oracle) * (1 + 1e-15));
    // Ratio per extra coordinate tends to delta.
    for (std::size_t d = 30; d < 60; ++d)
        CHECK(core_truncated_volume(drift, 4, d + 1) / core_truncated_volume(drift, 4, d) <= 0.5 + 1e-6);
}

TEST_CASE("core nullity within 60 extra coordinates") {
    auto spec = make_core_spec(Parallelepiped::unit_cube(), 0.5);
    std::size_t extra = 1;
    while (core_truncated_volume(spec, 5, 5 + extra) >= 1e-10) ++extra;
    // (1/2)^34 is the first power below 1e-10.
    CHECK(extra == 34);
    CHECK(extra <= 60);
}

TEST_CASE("core parameter validation") {
    CHECK_THROWS_AS(make_core_spec(Parallelepiped::unit_cube(), 1.5), Error);
    try {
        make_core_spec(with_lengths(TailedSequence::constant(2.0)), 0.5);
        FAIL("expected NotFiniteBase");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NotFiniteBase);
    }
}

TEST_CASE("in_core") {
    auto spec = make_core_spec(origin_cube(), 0.5);
    auto centre = in_core(TailedSequence::constant(0.0), spec, 10);
    CHECK(centre.answer == Tri::Yes);
    CHECK(centre.from == 0);
    CHECK(in_core(TailedSequence::constant(0.4), spec, 10).answer == Tri::No);
    Opaque o;
    o.term = [](std::size_t) { return 0.1; };
    auto opaque = in_core(TailedSequence({}, o), spec, 100);
    CHECK(opaque.answer == Tri::Unknown);
    CHECK(opaque.depth == 100);
    // Nesting: Yes at 1/2 implies Yes at 3/4.
    auto x = TailedSequence({0.45, -0.3}, make_geometric_drift(0.2, 0.5, 0.0));
    REQUIRE(in_core(x, spec, 10).answer == Tri::Yes);
    CHECK(in_core(x, make_core_spec(origin_cube(), 0.75), 10).answer == Tri::Yes);
}

TEST_CASE("shrink family stage volumes are eta^m times the base") {
    auto fam = ShrinkFamily::around(TailedSequence::constant(0.4), 1.0, 0.5);
    for (std::size_t m = 0; m <= 12; ++m) {
        auto v = volume(fam.stage(m));
        REQUIRE(v.is_finite());
        CHECK(v.value == std::ldexp(1.0, -static_cast<int>(m)));
    }
    auto outer = fam.stage(3), inner = fam.stage(4);
    CHECK(contains(outer, inner) == Tri::Yes);
}

TEST_CASE("self density is 1") {
    auto fam = ShrinkFamily::around(TailedSequence::constant(0.5), 1.0);
    auto rep = density_sequence({fam.base}, fam, 12);
    CHECK(rep.verdict == DensityReport::Verdict::Converged);
    CHECK(rep.limit == doctest::Approx(1.0));
    for (const auto& s : rep.stages) CHECK(s.average == doctest::Approx(1.0));
    // Two halves meeting in a null face.
    Parallelepiped left(TailedSequence::constant(0.0), TailedSequence({0.5}, Constant{1.0}));
    Parallelepiped right(TailedSequence({0.5}, Constant{0.0}), TailedSequence::constant(1.0));
    auto halves = density_sequence({left, right}, fam, 12);
    CHECK(halves.verdict == DensityReport::Verdict::Converged);
    for (const auto& s : halves.stages) CHECK(s.average == doctest::Approx(1.0));
}

TEST_CASE("density of the unit cube at an interior point of a shifted cube is zero") {
    // Base cube centred at Constant(0.4): each tail coordinate keeps 0.9 of its side.
    auto fam = ShrinkFamily::around(TailedSequence::constant(0.4), 1.0);
    auto rep = density_sequence({Parallelepiped::unit_cube()}, fam, 10);
    CHECK(rep.verdict == DensityReport::Verdict::ZeroCertificate);
    for (const auto& s : rep.stages) CHECK(s.average <= std::pow(0.75, static_cast<double>(s.m)) + 1e-12);
    REQUIRE_FALSE(rep.witnesses.empty());
    CHECK(rep.witnesses.front().bound < kZeroThreshold);
}

TEST_CASE("a coordinate outside the cube zeroes the averages") {
    auto centre = TailedSequence({0.5, 0.5, 1.3}, Constant{0.5});
    auto fam = ShrinkFamily::around(centre, 1.0);
    auto rep = density_sequence({Parallelepiped::unit_cube()}, fam, 8);
    // Stage 3 shrinks side 3 to [1.05, 1.55], disjoint from [0, 1].
    CHECK(rep.stages[0].average > 0.0);
    for (std::size_t m = 3; m <= 8; ++m) CHECK(rep.stages[m - 1].average == 0.0);
}

TEST_CASE("oscillating density in one dimension") {
    auto osc = oscillating_density_1d(12);
    CHECK(osc.integral_unit == Rational(2, 3));
    CHECK(osc.normalized_symmetric == Rational(1, 3));
    for (const auto& r : osc.rows) {
        CHECK(r.average == (r.k % 2 == 0 ? Rational(1, 3) : Rational(1, 6)));
    }
    CHECK(osc.oscillating);
    CHECK(osc.liminf == Rational(1, 6));
    CHECK(osc.limsup == Rational(1, 3));
    CHECK_THROWS_AS(oscillating_density_1d(0), Error);
}

TEST_CASE("dyadic brute force matches the closed-form mass up to the unresolved tail") {
    const std::size_t res = 2 * 12 + 4;
    for (std::size_t k = 1; k <= 12; ++k) {
        // Cells below 2^-res are lumped into one cell; the remainder is at most 2^-res.
        Rational diff = oscillating_mass(k) - brute_mass(k, res);
        if (diff < 0) diff = -diff;
        CHECK(diff <= Rational(1) / Rational(boost::multiprecision::cpp_int(1) << res));
    }
}

TEST_CASE("overlap bound") {
    CHECK(overlap_bound(9.0 / 8.0, 9.0 / 32.0) == 25.0 / 32.0);
    // Brute-force interval intersection for l = 7/8, offset = 7/32.
    const double l = 7.0 / 8.0, off = 7.0 / 32.0;
    const double lo = std::max(-l / 2, off - 0.5), hi = std::min(l / 2, off + 0.5);
    CHECK(overlap_bound(l, off) == hi - lo);
    CHECK(overlap_bound(l, off) <= kOverlapCap);
    CHECK(overlap_bound(1.0, 1.0) == 0.0);
    CHECK_THROWS_AS(overlap_bound(1.2, 0.5), Error);
    CHECK_THROWS_AS(overlap_bound(1.0, 0.1), Error);
    for (double ll = 7.0 / 8.0; ll <= 9.0 / 8.0; ll += 1.0 / 64.0)
        for (double o = ll / 4; o < 2.0; o += 1.0 / 128.0) CHECK(overlap_bound(ll, o) <= kOverlapCap);
}

TEST_CASE("non-density certificate") {
    auto rep = non_density_check({origin_cube()}, TailedSequence::constant(0.4));
    CHECK(rep.verdict == DensityReport::Verdict::ZeroCertificate);
    REQUIRE(rep.witnesses.size() == 1);
    const auto& w = rep.witnesses[0];
    CHECK(w.bound < 1e-10);
    // log(1e-10) / log(25/32) = 93.3, so 94 factors.
    CHECK(w.coordinates.size() == 94);
    CHECK(w.coordinates.size() <= 95);
    for (double f : w.factors) CHECK(f <= 25.0 / 32.0);
    for (double f : w.observed) CHECK(f <= 25.0 / 32.0);
    try {
        non_density_check({origin_cube()}, TailedSequence::constant(0.0));
        FAIL("expected PreconditionViolated");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::PreconditionViolated);
    }
    CHECK(non_density_check({}, TailedSequence::constant(0.4)).verdict == DensityReport::Verdict::ZeroCertificate);
    Opaque o;
    o.term = [](std::size_t) { return 0.4; };
    try {
        non_density_check({origin_cube()}, TailedSequence({}, o));
        FAIL("expected CoreMembershipUnknown");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::CoreMembershipUnknown);
    }
}

TEST_CASE("Lebesgue neighbourhoods at continuity points") {
    auto f = ProductFunction{make_linear_tail(TailedSequence({}, make_geometric_drift(1.0, 0.5, 0.0)))};
    auto cert = lebesgue_point_at_continuity(f, TailedSequence::constant(0.5), 0.1);
    CHECK(cert.side == doctest::Approx(0.19));
    CHECK(cert.deviation_bound < 0.1);
    auto c = ProductFunction{make_linear_tail(TailedSequence::constant(0.0), 2.0)};
    CHECK(lebesgue_point_at_continuity(c, TailedSequence::constant(0.5), 0.1).deviation_bound == 0.0);
    auto ind = ProductFunction{Indicator{Parallelepiped::unit_cube(), 1.0}};
    auto ci = lebesgue_point_at_continuity(ind, TailedSequence::constant(0.5), 0.1);
    CHECK(ci.deviation_bound == 0.0);
    CHECK(contains(Parallelepiped::unit_cube(), ci.neighbourhood) == Tri::Yes);
    OpaqueFunction op = limsup_function();
    CHECK_THROWS_AS(lebesgue_point_at_continuity(ProductFunction{op}, TailedSequence::constant(0.5), 0.1), Error);
}
