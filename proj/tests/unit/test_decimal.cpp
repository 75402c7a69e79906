#include <gtest/gtest.h>

#include <random>

#include "dthread/core/decimal.hpp"
#include "dthread/core/error.hpp"
#include "dthread/core/units.hpp"

using dthread::Decimal;
using dthread::Errc;
using dthread::Error;
using dthread::Quantity;

TEST(Decimal, ParseAndRender) {
  EXPECT_EQ(Decimal::parse("3.5").to_string(), "3.5");
  EXPECT_EQ(Decimal::parse("4.0").to_string(), "4");
  EXPECT_EQ(Decimal::parse("-0.25").to_string(), "-0.25");
  EXPECT_EQ(Decimal::parse("+12").to_string(), "12");
  EXPECT_EQ(Decimal::parse("1.5e3").to_string(), "1500");
  EXPECT_EQ(Decimal::parse("25e-3").to_string(), "0.025");
  EXPECT_EQ(Decimal::parse(".5").to_string(), "0.5");
}

TEST(Decimal, RejectsMalformedAndInexact) {
  for (const char* bad : {"", "-", "abc", "1.2.3", "1e", "1x"}) {
    EXPECT_THROW(Decimal::parse(bad), Error) << bad;
  }
  try {
    Decimal::parse("0.0000000001");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kSyntax);
  }
}

TEST(Decimal, ExactSums) {
  Decimal total = Decimal::parse("1.2") + Decimal::parse("0.8") + Decimal::parse("1.5");
  EXPECT_EQ(total, Decimal::parse("3.5"));
  EXPECT_EQ(Decimal::parse("0.1") + Decimal::parse("0.2"), Decimal::parse("0.3"));
}

TEST(Decimal, MultiplyAndDivideRoundHalfAway) {
  EXPECT_EQ((Decimal::parse("1.5") * Decimal::parse("2")).to_string(), "3");
  EXPECT_EQ((Decimal::from_int(1) / Decimal::from_int(3)).to_string(), "0.333333333");
  EXPECT_EQ((Decimal::from_int(2) / Decimal::from_int(3)).to_string(), "0.666666667");
  EXPECT_EQ((Decimal::from_int(-2) / Decimal::from_int(3)).to_string(), "-0.666666667");
  EXPECT_THROW(Decimal::from_int(1) / Decimal{}, Error);
}

TEST(Decimal, OverflowIsReported) {
  Decimal big = Decimal::from_int(9'000'000'000LL);
  try {
    (void)(big + big);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kOverflow);
  }
  EXPECT_THROW(Decimal::from_int(10'000'000'000LL), Error);
}

TEST(Decimal, RenderParseRoundTripProperty) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::int64_t> raw(-9'000'000'000'000'000'000LL, 9'000'000'000'000'000'000LL);
  for (int i = 0; i < 1000; ++i) {
    Decimal d = Decimal::from_raw(raw(rng));
    EXPECT_EQ(Decimal::parse(d.to_string()), d);
  }
}

TEST(Units, QuantityParsingAndConversion) {
  Quantity q = Quantity::parse("250 g");
  EXPECT_EQ(q.in_base_units(), Decimal::parse("0.25"));
  EXPECT_EQ(Quantity::parse("1.5m").in_base_units(), Decimal::from_int(1500));
  EXPECT_EQ(Quantity::parse("750 mW").in_base_units(), Decimal::parse("0.75"));
  EXPECT_EQ(q.to_string(), "250 g");
  try {
    Quantity::parse("3 lb");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kUnitMismatch);
  }
  EXPECT_THROW(Quantity::parse("kg"), Error);
}

TEST(Units, AttributeTable) {
  using dthread::BaseDimension;
  using dthread::Dimension;
  EXPECT_EQ(dthread::attribute_dimension("mass"), Dimension::of(BaseDimension::kMass));
  EXPECT_EQ(dthread::attribute_dimension("supply_min"), Dimension::of(BaseDimension::kVoltage));
  EXPECT_FALSE(dthread::attribute_dimension("colour").has_value());
  EXPECT_FALSE(dthread::attribute_dimension("_min").has_value());
  Dimension energy = Dimension::of(BaseDimension::kPower) * Dimension::of(BaseDimension::kTime);
  EXPECT_EQ(energy.base_unit_symbol(), "W*s");
  EXPECT_EQ((Dimension::of(BaseDimension::kMass) / Dimension::of(BaseDimension::kTime)).base_unit_symbol(), "kg/s");
}
