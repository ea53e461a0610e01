#include <doctest.h>

#include <cmath>
#include <random>

#include "measinf/sequences.hpp"

using namespace measinf;

namespace {

// Independent oracle: long double partial product over i <= 64; the tail
// factor lies in [1, exp(sum_{i>64} 2^-i)] = [1, exp(2^-64)].
long double geometric_product_oracle() {
    long double p = 1.0L;
    for (int i = 1; i <= 64; ++i) p *= 1.0L + std::ldexp(1.0L, -i);
    return p;
}

} // namespace

TEST_CASE("eval reads prefix and tail formulas") {
    CHECK(eval(TailedSequence({3.0}, Constant{1.0}), 1) == 3.0);
    CHECK(eval(TailedSequence({}, make_power_drift(1.0, 2.0)), 2) == 1.25);
    CHECK(eval(TailedSequence({}, make_periodic({0.5, 2.0})), 4) == 2.0);
    CHECK(eval(TailedSequence({}, make_geometric_drift(1.0, 0.5)), 3) == 1.125);
    // Tail formulas use the absolute index, so materialising changes nothing.
    TailedSequence s({7.0}, make_power_drift(0.5, 3.0));
    auto m = s.materialized(50);
    for (std::size_t i = 1; i <= 80; ++i) CHECK(m(i) == s(i));
}

TEST_CASE("descriptor parameters are validated") {
    CHECK_THROWS_AS(make_power_drift(1.0, 1.0), Error);
    CHECK_THROWS_AS(make_geometric_drift(1.0, 1.0), Error);
    CHECK_THROWS_AS(make_periodic({}), Error);
}

TEST_CASE("infinite_product classifications") {
    auto unit = infinite_product(TailedSequence::constant(1.0));
    CHECK(unit.is_finite());
    CHECK(unit.value == 1.0);
    CHECK(unit.err == 0.0);
    CHECK(infinite_product(TailedSequence::constant(2.0)).is_infinite());
    CHECK(infinite_product(TailedSequence::constant(0.5)).is_zero());
    CHECK(infinite_product(TailedSequence({}, make_periodic({0.5, 2.0}))).is_undefined());
    CHECK(infinite_product(TailedSequence({}, make_periodic({0.5, 0.5, 2.0}))).is_zero());
    CHECK(infinite_product(TailedSequence({}, make_periodic({2.0, 0.75}))).is_infinite());
    CHECK(infinite_product(TailedSequence({2.0, 0.0}, Constant{3.0})).is_zero());
    auto pre = infinite_product(TailedSequence({2.0, 0.25}, Constant{1.0}));
    CHECK(pre.is_finite());
    CHECK(pre.value == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("negative term is an error with its index") {
    try {
        infinite_product(TailedSequence({1.0, -1.0}, Constant{1.0}));
        FAIL("expected NegativeTerm");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NegativeTerm);
        REQUIRE(e.index());
        CHECK(*e.index() == 2);
    }
}

TEST_CASE("geometric drift product matches the partial-product oracle") {
    auto v = infinite_product(TailedSequence({}, make_geometric_drift(1.0, 0.5)));
    REQUIRE(v.is_finite());
    const double oracle = static_cast<double>(geometric_product_oracle());
    CHECK(std::abs(v.value - oracle) <= 1e-9);
    CHECK(v.err <= 1e-9);
    CHECK(v.lower() <= oracle + 1e-15);
    CHECK(v.upper() >= oracle - 1e-15);
    CHECK(oracle == doctest::Approx(2.384231029).epsilon(1e-9));
}

TEST_CASE("power drift product brackets a long partial product") {
    // prod (1 + i^-2) = sinh(pi)/pi
    TailedSequence s({}, make_power_drift(1.0, 2.0));
    auto v = infinite_product(s, 1e-5);
    REQUIRE(v.is_finite());
    const double exact = std::sinh(M_PI) / M_PI;
    CHECK(std::abs(v.value - exact) <= v.err + 1e-12);
    // The default tolerance would need about 10^12 terms.
    try {
        infinite_product(s);
        FAIL("expected WindowCapExceeded");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::WindowCapExceeded);
    }
}

TEST_CASE("tail-bound soundness under tighter tolerance") {
    TailedSequence s({}, make_power_drift(-0.3, 3.0));
    auto coarse = infinite_product(s, 1e-6);
    auto fine = infinite_product(s, 1e-12);
    REQUIRE(coarse.is_finite());
    REQUIRE(fine.is_finite());
    CHECK(fine.value >= coarse.lower());
    CHECK(fine.value <= coarse.upper());
}

TEST_CASE("opaque tails need a bound") {
    Opaque o;
    o.term = [](std::size_t i) { return 1.0 + std::ldexp(1.0, -static_cast<int>(i)); };
    CHECK(infinite_product(TailedSequence({}, o)).is_undefined());
    o.log_tail_bound = [](std::size_t n) { return std::ldexp(1.0, -static_cast<int>(n)); };
    auto v = infinite_product(TailedSequence({}, o));
    REQUIRE(v.is_finite());
    CHECK(std::abs(v.value - static_cast<double>(geometric_product_oracle())) <= v.err + 1e-12);
}

TEST_CASE("periodic classification agrees with a brute-force scan") {
    std::mt19937_64 g(7);
    std::uniform_real_distribution<double> u(0.3, 2.5);
    for (int trial = 0; trial < 40; ++trial) {
        std::vector<double> cycle(1 + trial % 4);
        for (auto& c : cycle) c = u(g);
        auto v = infinite_product(TailedSequence({}, make_periodic(cycle)));
        // Partial products over whole cycles drift monotonically in log space.
        double logp = 0.0;
        const std::size_t terms = 10000 - 10000 % cycle.size();
        for (std::size_t i = 0; i < terms; ++i) logp += std::log(cycle[i % cycle.size()]);
        if (logp < 0) CHECK(v.is_zero());
        else if (logp > 0) CHECK(v.is_infinite());
    }
    for (auto cycle : {std::vector<double>{0.5, 2.0}, {4.0, 0.25, 1.0}, {0.8, 1.25, 2.0, 0.5}}) {
        double p = 1.0;
        bool bounded = true;
        for (std::size_t i = 0; i < 10000; ++i) {
            p *= cycle[i % cycle.size()];
            bounded = bounded && p > 1e-3 && p < 1e3;
        }
        CHECK(bounded);
        CHECK(infinite_product(TailedSequence({}, make_periodic(cycle))).is_undefined());
    }
}

TEST_CASE("rho_distance examples and metric properties") {
    auto zero = TailedSequence::constant(0.0);
    auto one = TailedSequence::constant(1.0);
    CHECK(rho_distance(zero, zero).value == 0.0);
    auto d01 = rho_distance(zero, one);
    CHECK(std::abs(d01.value - 0.5) <= d01.err + 1e-15);
    auto e1 = TailedSequence({1.0}, Constant{0.0});
    auto d = rho_distance(e1, zero);
    CHECK(std::abs(d.value - 0.25) <= d.err + 1e-15);

    std::mt19937_64 g(11);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    auto rnd = [&] {
        std::vector<double> pre(5);
        for (auto& p : pre) p = u(g);
        return TailedSequence(pre, make_periodic({u(g), u(g)}));
    };
    for (int t = 0; t < 50; ++t) {
        auto x = rnd(), y = rnd(), z = rnd();
        auto xy = rho_distance(x, y), yx = rho_distance(y, x);
        CHECK(xy.value == yx.value);
        auto xz = rho_distance(x, z), zy = rho_distance(z, y);
        CHECK(xy.value <= xz.value + zy.value + xy.err + xz.err + zy.err);
    }
}

TEST_CASE("descriptor algebra stays closed or overflows") {
    TailedSequence a({1.0}, make_geometric_drift(1.0, 0.5));
    TailedSequence b({}, make_geometric_drift(2.0, 0.5));
    auto s = a + b;
    for (std::size_t i = 1; i < 30; ++i) CHECK(s(i) == doctest::Approx(a(i) + b(i)));
    TailedSequence c({}, make_geometric_drift(1.0, 0.25));
    CHECK_THROWS_AS(a + c, Error);
    auto k = 3.0 * TailedSequence({}, make_periodic({1.0, 2.0}));
    CHECK(k(2) == 6.0);
}

TEST_CASE("monotone products") {
    TailedSequence lo({}, make_geometric_drift(0.5, 0.5));
    TailedSequence hi({}, make_geometric_drift(1.0, 0.5));
    auto vl = infinite_product(lo), vh = infinite_product(hi);
    CHECK(vl.value - vl.err <= vh.value + vh.err);
}

TEST_CASE("settle_index and sign profile") {
    TailedSequence s({}, make_geometric_drift(1.0, 0.5));
    auto n = settle_index(s, 1.0, 0.01);
    REQUIRE(n);
    CHECK(*n == 7);
    auto prof = sign_profile(TailedSequence({1.0, -2.0, 3.0}, Constant{1.0}));
    CHECK(prof.kind == SignProfile::Kind::FinitelyNegative);
    CHECK(prof.first_negative == 2);
    CHECK(all_nonnegative(TailedSequence::constant(-1.0)) == Tri::No);
}
