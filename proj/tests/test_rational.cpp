#include "doctest.h"

#include <sstream>

#include "oscid/error.hpp"
#include "oscid/rational.hpp"

using oscid::Rational;

TEST_CASE("rational normalizes sign and common factors") {
  CHECK(Rational(6, -4) == Rational(-3, 2));
  CHECK(Rational(0, 7) == Rational(0));
  CHECK(Rational(10, 4).str() == "5/2");
  CHECK(Rational(8).str() == "8");
  CHECK_THROWS_AS(Rational(1, 0), oscid::Error);
}

TEST_CASE("rational arithmetic is exact") {
  CHECK(Rational(1, 3) + Rational(1, 6) == Rational(1, 2));
  CHECK(Rational(1, 3) - Rational(1, 2) == Rational(-1, 6));
  CHECK(Rational(4000) * Rational(1, 2500) == Rational(8, 5));
  CHECK(Rational(16) / Rational(8, 5) == Rational(10));
  CHECK(Rational(1, 3) < Rational(1, 2));
  CHECK_THROWS_AS(Rational(1) / Rational(0), oscid::Error);
}

TEST_CASE("rational from double recovers short fractions") {
  CHECK(Rational::from_double(4e-4) == Rational(1, 2500));
  CHECK(Rational::from_double(0.1) == Rational(1, 10));
  CHECK(Rational::from_double(-2.5) == Rational(-5, 2));
  CHECK(Rational::from_double(3.0) == Rational(3));
}

TEST_CASE("rational parses integers, fractions and decimals") {
  CHECK(Rational::parse("7") == Rational(7));
  CHECK(Rational::parse("7/2") == Rational(7, 2));
  CHECK(Rational::parse("2.5") == Rational(5, 2));
  CHECK_THROWS_AS(Rational::parse("x"), oscid::Error);
  std::ostringstream out;
  out << Rational(125, 8);
  CHECK(out.str() == "125/8");
}
