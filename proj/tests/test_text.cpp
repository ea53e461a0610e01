#include <doctest.h>

#include "measinf/text.hpp"

using namespace measinf;

TEST_CASE("sequence literals round-trip") {
    for (const char* lit : {"prefix=[1, 0.5]; tail=Constant(1)", "tail=PowerDrift(a=1, p=2)",
                            "tail=GeometricDrift(a=1, q=0.5)", "tail=Periodic([0.5, 2])",
                            "prefix=[3]; tail=GeometricDrift(a=-0.25, q=0.5, base=2)"}) {
        auto s = text::parse_sequence(lit);
        auto again = text::parse_sequence(text::format(s));
        CHECK(text::format(again) == text::format(s));
        for (std::size_t i = 1; i < 20; ++i) CHECK(again(i) == s(i));
    }
}

TEST_CASE("numbers use the shortest round-trip form") {
    CHECK(text::format_number(0.1) == "0.1");
    CHECK(text::parse_number(text::format_number(1.0 / 3.0)) == 1.0 / 3.0);
    CHECK_THROWS_AS(text::parse_number("1.5x"), Error);
}

TEST_CASE("parallelepiped and function literals round-trip") {
    auto box = text::parse_parallelepiped("lower={tail=Constant(0)}; upper={prefix=[0.5]; tail=Constant(1)}");
    CHECK(box.lengths()(1) == 0.5);
    CHECK(text::format(text::parse_parallelepiped(text::format(box))) == text::format(box));
    for (const char* lit : {"Linear(weights={tail=GeometricDrift(a=1, q=0.5, base=0)})",
                            "Poly(indices=[1, 2]; terms=[[1, 2, 0], [0.5, 0, 1]])",
                            "Table(indices=[1]; cells=2; values=[0, 1])", "Opaque(limsup)"}) {
        auto f = text::parse_function(lit);
        CHECK(text::format(text::parse_function(text::format(f))) == text::format(f));
    }
}

TEST_CASE("parse errors carry line and column") {
    try {
        text::parse_sequence("prefix=[1, 2]; tail=Bogus(1)");
        FAIL("expected ParseError");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ParseError);
        CHECK(e.line() == 1);
        CHECK(e.column() == 21);
    }
    try {
        text::parse_sequence("prefix=[1,\n 2;");
        FAIL("expected ParseError");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ParseError);
        CHECK(e.line() == 2);
    }
}
