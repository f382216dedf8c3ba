#include <gtest/gtest.h>

#include "perfeq/rational.hpp"

using perfeq::Rational;

TEST(Rational, LowestTerms) {
  Rational r(6, -8);
  EXPECT_EQ(r.str(), "-3/4");
  EXPECT_EQ(r.den(), 4);
  EXPECT_EQ(Rational::parse("10/4"), Rational(5, 2));
  EXPECT_EQ(Rational::parse("-7").str(), "-7");
}

TEST(Rational, ParseRejectsGarbage) {
  for (const char* s : {"", "1/0", "a/2", "1/-2", "1.5", "/3", "3/"})
    EXPECT_THROW(Rational::parse(s), perfeq::ParseError) << s;
}

TEST(Rational, ArithmeticIsExact) {
  Rational third(1, 3);
  EXPECT_EQ(third + third + third, Rational(1));
  EXPECT_EQ(Rational(1, 2).pow(10), Rational(1, 1024));
  EXPECT_EQ(Rational(-2, 3).abs(), Rational(2, 3));
  EXPECT_LT(Rational(1, 3), Rational(1, 2));
  EXPECT_THROW(third / Rational(0), perfeq::InvalidArgument);
}

TEST(Rational, BracketScale) {
  perfeq::Bracket b{Rational(1), Rational(2)};
  auto n = perfeq::scale(b, Rational(-1));
  EXPECT_EQ(n.lower, Rational(-2));
  EXPECT_EQ(n.upper, Rational(-1));
}
