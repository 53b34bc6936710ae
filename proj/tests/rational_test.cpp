// Copyright 2026 The mps Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mps/rational.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <unordered_set>

namespace mps {
namespace {

TEST(RationalParse, Fraction) { EXPECT_EQ(Rational::parse("1/3"), Rational(1, 3)); }
TEST(RationalParse, DecimalIsExact) { EXPECT_EQ(Rational::parse("0.25"), Rational(1, 4)); }
TEST(RationalParse, LeadingZerosAreDecimal) {
  EXPECT_EQ(Rational::parse("010/3"), Rational(10, 3));
  EXPECT_EQ(Rational::parse("0.08"), Rational(2, 25));
  EXPECT_EQ(Rational::parse("09"), Rational(9));
}
TEST(RationalParse, ReducesToLowestTerms) {
  const Rational r = Rational::parse("2/6");
  EXPECT_EQ(r, Rational(1, 3));
  EXPECT_EQ(r.str(), "1/3");
}
TEST(RationalParse, IntegersAndEdgeDecimals) {
  EXPECT_EQ(Rational::parse("7"), Rational(7));
  EXPECT_EQ(Rational::parse(" 3. "), Rational(3));
  EXPECT_EQ(Rational::parse(".5"), Rational(1, 2));
  EXPECT_EQ(Rational::parse("0.6"), Rational(3, 5));
}
TEST(RationalParse, RejectsMalformed) {
  for (const char* bad : {"", "abc", "1/", "/2", "1/2/3", "-1/3", "1.2.3", ".", "1e3"}) {
    EXPECT_THROW(Rational::parse(bad), std::invalid_argument) << bad;
  }
}
TEST(RationalParse, RejectsZeroDenominator) { EXPECT_THROW(Rational::parse("1/0"), std::invalid_argument); }

TEST(Rational, CanonicalString) {
  EXPECT_EQ(Rational(4).str(), "4/1");
  EXPECT_EQ(Rational(0).str(), "0/1");
  EXPECT_EQ(Rational(-6, 4).str(), "-3/2");
}

TEST(Rational, FloorCeil) {
  EXPECT_EQ(Rational(7, 2).floor(), 3);
  EXPECT_EQ(Rational(7, 2).ceil(), 4);
  EXPECT_EQ(Rational(-7, 2).floor(), -4);
  EXPECT_EQ(Rational(-7, 2).ceil(), -3);
  EXPECT_EQ(Rational(6, 3).ceil_long(), 2);
}

TEST(Rational, DivisionByZeroThrows) { EXPECT_THROW(Rational(1) / Rational(0), std::domain_error); }

TEST(Rational, AdditionIsExact) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<long> num(-1'000'000, 1'000'000);
  std::uniform_int_distribution<long> den(1, 1'000'000);
  for (int i = 0; i < 2000; ++i) {
    const Rational a(num(rng), den(rng));
    const Rational b(num(rng), den(rng));
    EXPECT_EQ((a + b) - b, a);
    if (!b.is_zero()) {
      EXPECT_EQ((a * b) / b, a);
    }
  }
}

TEST(Rational, HashAgreesWithEquality) {
  std::unordered_set<Rational> s{Rational(1, 3), Rational(2, 6), Rational(3, 9)};
  EXPECT_EQ(s.size(), 1u);
}

TEST(CeilLog, Examples) {
  EXPECT_EQ(ceil_log(Rational(2), Rational(3, 2)), 2);
  EXPECT_EQ(ceil_log(Rational(1), Rational(2)), 0);
  EXPECT_EQ(ceil_log(Rational(13, 24), Rational(2)), 0);
}

TEST(CeilLog, ExactPowersAndNegatives) {
  EXPECT_EQ(ceil_log(Rational(8), Rational(2)), 3);
  EXPECT_EQ(ceil_log(Rational(9), Rational(2)), 4);
  EXPECT_EQ(ceil_log(Rational(1, 4), Rational(2)), -2);
  EXPECT_EQ(ceil_log(Rational(1, 5), Rational(2)), -2);
  EXPECT_EQ(ceil_log(Rational(4), Rational(5, 4)), 7);
  EXPECT_EQ(ceil_log(Rational(9), Rational(5, 4)), 10);
  EXPECT_EQ(ceil_log(Rational(7), Rational(4, 3)), 7);
}

TEST(CeilLog, RejectsBadArguments) {
  EXPECT_THROW(ceil_log(Rational(0), Rational(2)), std::domain_error);
  EXPECT_THROW(ceil_log(Rational(2), Rational(1)), std::domain_error);
}

TEST(CeilLog, BracketsAndMatchesFloatingPoint) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<long> xn(1, 5000), xd(1, 200), bn(1, 40), bd(1, 20);
  int compared = 0;
  for (int i = 0; i < 1000; ++i) {
    const Rational x(xn(rng), xd(rng));
    const long d = bd(rng);
    const Rational base(d + bn(rng), d);  // strictly above 1
    const long k = ceil_log(x, base);
    EXPECT_GE(pow(base, k), x);
    EXPECT_LT(pow(base, k - 1), x);
    const double approx = std::ceil(std::log(x.to_double()) / std::log(base.to_double()));
    if (pow(base, k) != x) {
      EXPECT_EQ(static_cast<long>(approx), k) << x << " base " << base;
      ++compared;
    }
  }
  EXPECT_GT(compared, 900);
}

TEST(Pow, NegativeExponent) {
  EXPECT_EQ(pow(Rational(2, 3), 3), Rational(8, 27));
  EXPECT_EQ(pow(Rational(2, 3), -2), Rational(9, 4));
  EXPECT_EQ(pow(Rational(5), 0), Rational(1));
}

}  // namespace
}  // namespace mps
