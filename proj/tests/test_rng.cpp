#include <gtest/gtest.h>

#include <cmath>

#include "nfrlab/rng.hpp"

using namespace nfrlab;

// Known-answer vectors of the reference Philox4x32-10 implementation.
TEST(Philox, KnownAnswers) {
  auto a = philox4x32_10({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(a, (std::array<std::uint32_t, 4>{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
  auto b = philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                         {0xffffffffu, 0xffffffffu});
  EXPECT_EQ(b, (std::array<std::uint32_t, 4>{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
  auto c = philox4x32_10({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                         {0xa4093822u, 0x299f31d0u});
  EXPECT_EQ(c, (std::array<std::uint32_t, 4>{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(Philox, DrawsArePureFunctionsOfIndex) {
  Philox g(42, 3);
  double u7 = g.uniform(7);
  for (int i = 0; i < 100; ++i) g.uniform(static_cast<std::uint64_t>(i));
  EXPECT_EQ(g.uniform(7), u7);
  EXPECT_NE(Philox(42, 4).uniform(7), u7);
  EXPECT_NE(Philox(43, 3).uniform(7), u7);
}

TEST(Philox, UniformRangeAndMoments) {
  Philox g(1);
  double sum = 0, sum2 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    double u = g.uniform(static_cast<std::uint64_t>(i));
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    double z = g.normal(static_cast<std::uint64_t>(i));
    ASSERT_TRUE(std::isfinite(z));
    sum += z;
    sum2 += z * z;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.01);
  EXPECT_NEAR(sum2 / n, 1.0, 0.02);
}

TEST(PhiloxStream, IntegerBounds) {
  PhiloxStream s(9);
  for (int i = 0; i < 1000; ++i) {
    long long v = s.integer(-3, 5);
    EXPECT_GE(v, -3);
    EXPECT_LE(v, 5);
  }
}
