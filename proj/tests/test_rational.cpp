#include <blens/rational.hpp>
#include <blens/scalar.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <stdexcept>
#include <string>

using blens::Rational;
using rtraits = blens::scalar_traits<Rational>;
using dtraits = blens::scalar_traits<double>;

TEST_CASE("rational parsing covers fractions, integers, and exact decimals") {
    CHECK(Rational::parse("3/4").str() == "3/4");
    CHECK(Rational::parse("6/8").str() == "3/4");    // canonicalized
    CHECK(Rational::parse("-6/8").str() == "-3/4");
    CHECK(Rational::parse("4/2").str() == "2");
    CHECK(Rational::parse("7").str() == "7");
    CHECK(Rational::parse("+7").str() == "7");
    CHECK(Rational::parse("-0").str() == "0");
    CHECK(Rational::parse("0.25").str() == "1/4");
    CHECK(Rational::parse("0.3").str() == "3/10");   // exact, not a binary float
    CHECK(Rational::parse("-1.5").str() == "-3/2");
    CHECK(Rational::parse("2.0").str() == "2");
}

TEST_CASE("rational parsing rejects malformed input") {
    CHECK_THROWS_AS(Rational::parse(""), std::invalid_argument);
    CHECK_THROWS_AS(Rational::parse("abc"), std::invalid_argument);
    CHECK_THROWS_AS(Rational::parse("1/0"), std::invalid_argument);
    CHECK_THROWS_AS(Rational::parse("1/"), std::invalid_argument);
    CHECK_THROWS_AS(Rational::parse("/2"), std::invalid_argument);
    CHECK_THROWS_AS(Rational::parse("1."), std::invalid_argument);
    CHECK_THROWS_AS(Rational::parse("1.2.3"), std::invalid_argument);
    CHECK_THROWS_AS(Rational::parse("1/2/3"), std::invalid_argument);
    CHECK_THROWS_AS(Rational::parse("1e3"), std::invalid_argument);
    CHECK_THROWS_AS(Rational(1, 0), std::invalid_argument);
}

TEST_CASE("rational arithmetic is exact") {
    CHECK(Rational(1, 3) + Rational(1, 6) == Rational(1, 2));
    CHECK(Rational(1, 3) * Rational(3, 5) == Rational(1, 5));
    CHECK(Rational(1, 2) - Rational(1, 3) == Rational(1, 6));
    CHECK(Rational(2, 3) / Rational(4, 9) == Rational(3, 2));
    CHECK(abs(Rational(-5, 7)) == Rational(5, 7));
    CHECK(Rational(1, 3) < Rational(1, 2));
    CHECK(Rational(1, 10) + Rational(2, 10) == Rational(3, 10));  // no float drift
}

TEST_CASE("rational arithmetic survives long quotient chains without overflow") {
    // A float-hostile chain: repeated products and quotients of awkward
    // fractions must come back to exactly 1.
    Rational acc(1);
    for (long k = 2; k <= 40; ++k) acc = acc * Rational(k - 1, k);
    for (long k = 2; k <= 40; ++k) acc = acc / Rational(k - 1, k);
    CHECK(acc == Rational(1));

    // Large numerators: 10^30 style values stay exact.
    Rational big = Rational::parse("1000000000000000000000000000000/3");
    CHECK((big * Rational(3)).str() == "1000000000000000000000000000000");
}

TEST_CASE("scalar traits expose both numeric modes consistently") {
    CHECK(rtraits::exact);
    CHECK_FALSE(dtraits::exact);
    CHECK(rtraits::cmp_eps() == Rational(0));
    CHECK(rtraits::ratio(3, 12) == Rational(1, 4));
    CHECK(rtraits::parse("5/8") == Rational(5, 8));
    CHECK(rtraits::to_text(Rational(9, 13)) == "9/13");
    CHECK(std::string(rtraits::mode_name()) == "rational");

    CHECK(dtraits::parse("0.25") == 0.25);
    CHECK(dtraits::parse("1/4") == 0.25);             // fraction spelling accepted
    CHECK(dtraits::to_text(0.1) == "0.1");            // shortest round-trip form
    CHECK(dtraits::parse(dtraits::to_text(0.30000000000000004)) == 0.30000000000000004);
    CHECK(std::string(dtraits::mode_name()) == "float");
    CHECK_THROWS_AS(dtraits::parse("nope"), std::invalid_argument);
}

TEST_CASE("approx_eq uses exact equality at zero tolerance") {
    CHECK(blens::approx_eq(Rational(1, 3), Rational(1, 3), Rational(0)));
    CHECK_FALSE(blens::approx_eq(Rational(1, 3), Rational(1, 3) + Rational(1, 1000000),
                                 Rational(0)));
    CHECK(blens::approx_eq(0.1 + 0.2, 0.3, 1e-9));
    CHECK_FALSE(blens::approx_eq(0.1, 0.2, 1e-9));
}
