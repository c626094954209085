#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mzv/error.hpp"
#include "mzv/rational.hpp"

using namespace mzv;

TEST(BigRational, CanonicalForm) {
  const BigRational x(6, -4);
  EXPECT_EQ(x.to_string(), "-3/2");
  EXPECT_EQ(x.numerator(), "-3");
  EXPECT_EQ(x.denominator(), "2");
  EXPECT_EQ(BigRational(0, 5).to_string(), "0");
  EXPECT_THROW(BigRational(1, 0), PreconditionError);
}

TEST(BigRational, Arithmetic) {
  const BigRational sum = BigRational(1, 3) + BigRational(1, 8) + BigRational(1, 15);
  EXPECT_EQ(sum, BigRational(21, 40));
  EXPECT_EQ(BigRational(1, 2) - BigRational(2, 3) + BigRational(1, 4), BigRational(1, 12));
  EXPECT_EQ(BigRational(3, 4) * BigRational(2, 9), BigRational(1, 6));
  EXPECT_EQ(BigRational(3, 4) / BigRational(3, 2), BigRational(1, 2));
  EXPECT_THROW(BigRational(1) / BigRational(0), PreconditionError);
  EXPECT_EQ(-BigRational(2, 5), BigRational(-2, 5));
  EXPECT_TRUE(BigRational(1, 3) < BigRational(1, 2));
  EXPECT_EQ(BigRational(-1, 3).sign(), -1);
}

TEST(BigRational, InversePower) {
  EXPECT_EQ(BigRational(3).inverse_power(2), BigRational(1, 9));
  EXPECT_EQ(BigRational(5, 2).inverse_power(3), BigRational(8, 125));
  EXPECT_EQ(BigRational(7).inverse_power(0), BigRational(1));
}

TEST(BigRational, FromString) {
  EXPECT_EQ(BigRational::from_string("10/4"), BigRational(5, 2));
  EXPECT_EQ(BigRational::from_string("-7"), BigRational(-7));
  EXPECT_THROW(BigRational::from_string("1/0"), PreconditionError);
  EXPECT_THROW(BigRational::from_string("abc"), ParseError);
}

TEST(BigRational, ToDoubleIsCorrectlyRounded) {
  EXPECT_EQ(BigRational(1, 3).to_double(), 1.0 / 3.0);
  EXPECT_EQ(BigRational(53, 120).to_double(), 53.0 / 120.0);
  EXPECT_EQ(BigRational(-5, 12).to_double(), -5.0 / 12.0);
  EXPECT_EQ(BigRational(0).to_double(), 0.0);
  // Quotients of doubles below 2^53 are correctly rounded by IEEE division itself.
  std::mt19937_64 rng(7);
  for (int i = 0; i < 2000; ++i) {
    const long num = static_cast<long>(rng() >> 12) - (1L << 51);
    const long den = static_cast<long>(rng() >> 12) + 1;
    ASSERT_EQ(BigRational(num, den).to_double(), static_cast<double>(num) / static_cast<double>(den))
        << num << "/" << den;
  }
  // Halfway case between 1 and 1 + 2^-52 rounds to even.
  const BigRational halfway = BigRational(1) + BigRational(1) / (BigRational(1L << 53));
  EXPECT_EQ(halfway.to_double(), 1.0);
  const BigRational above = halfway + BigRational(1) / (BigRational(1L << 60));
  EXPECT_EQ(above.to_double(), std::nextafter(1.0, 2.0));
}
