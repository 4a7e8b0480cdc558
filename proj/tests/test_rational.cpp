#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "tsnbound/rational.hpp"

#include <random>
#include <sstream>

using tsnbound::BigInt;
using tsnbound::Rational;

TEST_CASE("construction normalizes to lowest terms") {
    Rational r(BigInt(6), BigInt(-4));
    CHECK(r.num() == -3);
    CHECK(r.den() == 2);
    CHECK(Rational(0, 5) == Rational(0));
    CHECK_THROWS(Rational(1, 0));
}

TEST_CASE("arithmetic is exact") {
    Rational a(1, 3), b(1, 6);
    CHECK(a + b == Rational(1, 2));
    CHECK(a - b == Rational(1, 6));
    CHECK(a * b == Rational(1, 18));
    CHECK(a / b == Rational(2));
    CHECK(-a == Rational(-1, 3));
    CHECK_THROWS(a / Rational(0));
}

TEST_CASE("ordering") {
    CHECK(Rational(1, 3) < Rational(1, 2));
    CHECK(Rational(-1, 2) < Rational(-1, 3));
    CHECK(tsnbound::max(Rational(3), Rational(5)) == Rational(5));
    CHECK(tsnbound::min(Rational(-3), Rational(5)) == Rational(-3));
}

TEST_CASE("floor and ceil") {
    CHECK(Rational(7, 2).floor() == 3);
    CHECK(Rational(7, 2).ceil() == 4);
    CHECK(Rational(-7, 2).floor() == -4);
    CHECK(Rational(-7, 2).ceil() == -3);
    CHECK(Rational(4).floor() == 4);
    CHECK(Rational(4).ceil() == 4);
}

TEST_CASE("decimal rendering") {
    CHECK(Rational(1, 2).to_decimal_string() == "0.5");
    CHECK(Rational(140).to_decimal_string() == "140");
    CHECK(Rational(1, 3).to_decimal_string(6) == "0.333333~");
    CHECK(Rational(-11, 8).to_decimal_string() == "-1.375");
}

TEST_CASE("picosecond conversions") {
    Rational us80 = Rational(80, 1000000);  // 80 us in seconds
    CHECK(tsnbound::seconds_to_ps(us80) == 80000000);
    CHECK(tsnbound::ps_to_seconds(80000000) == us80);
    CHECK_THROWS(tsnbound::seconds_to_ps(Rational(1, 3000000000000LL)));
}

TEST_CASE("field axioms on random values") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 200; ++i) {
        auto draw = [&] {
            return Rational(BigInt(static_cast<long long>(rng() % 2001) - 1000),
                            BigInt(static_cast<long long>(rng() % 999) + 1));
        };
        Rational a = draw(), b = draw(), c = draw();
        CHECK(a + b == b + a);
        CHECK((a + b) + c == a + (b + c));
        CHECK(a * (b + c) == a * b + a * c);
        if (!b.is_zero()) CHECK(a / b * b == a);
    }
}

TEST_CASE("stream output") {
    std::ostringstream os;
    os << Rational(7, 3);
    CHECK(os.str() == "7/3");
}
