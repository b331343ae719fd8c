#include <doctest.h>

#include "momdp/rational.hpp"

using namespace momdp;

TEST_CASE("rational parsing is exact") {
    CHECK(parse_rational("7/10") == Rat(7, 10));
    CHECK(parse_rational("0.7") == Rat(7, 10));
    CHECK(parse_rational("0.8") == Rat(4, 5));
    CHECK(parse_rational(".25") == Rat(1, 4));
    CHECK(parse_rational("3") == Rat(3));
    CHECK(parse_rational("-3/4") == Rat(-3, 4));
    CHECK(parse_rational("1e-2") == Rat(1, 100));
    CHECK(parse_rational("2.5e2") == Rat(250));
    CHECK(parse_rational(" 1 / 2 ") == Rat(1, 2));
    CHECK(parse_rational("0.0001") == Rat(1, 10000));
    CHECK_THROWS(parse_rational(""));
    CHECK_THROWS(parse_rational("x"));
}

TEST_CASE("rational rendering") {
    CHECK(rational_to_string(Rat(7, 10)) == "7/10");
    CHECK(rational_to_string(Rat(4)) == "4");
    CHECK(rational_to_string(Rat(-1, 3)) == "-1/3");
}

TEST_CASE("extended rationals order with infinity") {
    ExtRat inf = ExtRat::infinity();
    ExtRat one{Rat(1)};
    CHECK(one < inf);
    CHECK(inf >= one);
    CHECK(inf == ExtRat::infinity());
    CHECK(inf.is_infinite());
    CHECK(parse_ext_rational("inf").is_infinite());
    CHECK(parse_ext_rational("0.5") == ExtRat(Rat(1, 2)));
    CHECK(inf.to_string() == "inf");
}
