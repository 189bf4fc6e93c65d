// Copyright 2026 The amsq Authors
// SPDX-License-Identifier: Apache-2.0

#include "amsq/half.hpp"

#include <cmath>
#include <cstdint>

#include <gtest/gtest.h>

namespace {

using amsq::float_to_half;
using amsq::half_to_float;

TEST(HalfTest, KnownPatterns) {
  EXPECT_EQ(float_to_half(0.0f), 0x0000);
  EXPECT_EQ(float_to_half(-0.0f), 0x8000);
  EXPECT_EQ(float_to_half(1.0f), 0x3C00);
  EXPECT_EQ(float_to_half(-2.0f), 0xC000);
  EXPECT_EQ(float_to_half(0.5f), 0x3800);
  EXPECT_EQ(float_to_half(65504.0f), 0x7BFF);
  EXPECT_EQ(float_to_half(7.5f), 0x4780);
  EXPECT_EQ(float_to_half(std::ldexp(1.0f, -24)), 0x0001);  // min subnormal
  EXPECT_EQ(float_to_half(std::ldexp(1.0f, -14)), 0x0400);  // min normal
}

TEST(HalfTest, RoundsToNearestEven) {
  // Exact midpoint between 1.0 (0x3C00) and 1+2^-10 (0x3C01) picks the even.
  EXPECT_EQ(float_to_half(1.0f + std::ldexp(1.0f, -11)), 0x3C00);
  EXPECT_EQ(float_to_half(1.0f + 3 * std::ldexp(1.0f, -11)), 0x3C02);
  // Subnormal midpoints behave the same.
  EXPECT_EQ(float_to_half(std::ldexp(1.0f, -25)), 0x0000);
  EXPECT_EQ(float_to_half(std::ldexp(3.0f, -25)), 0x0002);
}

TEST(HalfTest, OverflowAndInfinity) {
  EXPECT_EQ(float_to_half(65520.0f), 0x7C00);  // rounds up to inf
  EXPECT_EQ(float_to_half(-65520.0f), 0xFC00);
  EXPECT_EQ(float_to_half(1e20f), 0x7C00);
  EXPECT_EQ(float_to_half(std::numeric_limits<float>::infinity()), 0x7C00);
  EXPECT_TRUE(std::isnan(half_to_float(0x7C01)));
}

TEST(HalfTest, WideningIsExactRoundTrip) {
  for (std::uint32_t h = 0; h < 0x10000; ++h) {
    const std::uint16_t bits = static_cast<std::uint16_t>(h);
    EXPECT_EQ(float_to_half(half_to_float(bits)), bits) << "h=" << h;
  }
}

TEST(HalfTest, WideningMatchesLdexp) {
  EXPECT_EQ(half_to_float(0x3C00), 1.0f);
  EXPECT_EQ(half_to_float(0x4780), 7.5f);
  EXPECT_EQ(half_to_float(0x0001), std::ldexp(1.0f, -24));
  EXPECT_EQ(half_to_float(0x03FF), std::ldexp(1023.0f, -24));  // max subnormal
  EXPECT_EQ(half_to_float(0x7BFF), 65504.0f);
  EXPECT_TRUE(std::signbit(half_to_float(0x8000)));
  EXPECT_EQ(half_to_float(0x8000), 0.0f);
}

}  // namespace
