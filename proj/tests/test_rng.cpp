#include "optaccel/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>

using optaccel::CounterRng;

TEST(CounterRng, PureFunctionOfCoordinates) {
  const CounterRng a(42);
  const CounterRng b(42);
  EXPECT_EQ(a.bits(3, 7, 1), b.bits(3, 7, 1));
  EXPECT_NE(a.bits(3, 7, 1), a.bits(3, 7, 2));
  EXPECT_NE(a.bits(3, 7, 1), a.bits(3, 8, 1));
  EXPECT_NE(a.bits(3, 7, 1), a.bits(4, 7, 1));
  EXPECT_NE(a.bits(3, 7, 1), CounterRng(43).bits(3, 7, 1));
}

TEST(CounterRng, UniformIsOpenInterval) {
  const CounterRng r(1);
  for (std::uint64_t i = 0; i < 10000; ++i) {
    const double u = r.uniform(0, i, 0);
    EXPECT_GT(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
}

TEST(CounterRng, NormalMoments) {
  const CounterRng r(9);
  const int n = 200000;
  double s = 0.0;
  double s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal(0, static_cast<std::uint64_t>(i), 0);
    s += z;
    s2 += z * z;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.015);
}
